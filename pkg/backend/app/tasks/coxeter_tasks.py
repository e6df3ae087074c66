import logging
# 群闭包 / 点阵扫描 / 矩阵校验的异步任务，导入自己的celery_app实例
from app.core.celery_config import celery_app
from app.core.config import settings
from app.schemas.golden_schema import MatrixDocument
from app.services.affine_service import verify_matrix
from app.services.coxeter_service import group_summary
from app.services.pointarray_service import cardinality_scan, seed

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


@celery_app.task(bind=True)
def generate_group_task(self, group: str, include_elements: bool = False) -> dict:
    """群闭包任务（H4 的 14400 个元素耗时较长）"""
    try:
        summary = group_summary(group, include_elements=include_elements)
        return {
            "status": "success",
            "result": summary,
            "message": f"{summary['group']} 群闭包完成，阶 {summary['order']}"
        }
    except Exception as e:
        logger.error(f"群闭包任务失败：{str(e)}", exc_info=True)
        return {
            "status": "failed",
            "error": str(e),
            "message": "群闭包任务执行失败"
        }


@celery_app.task(bind=True)
def cardinality_scan_task(self, seed_name: str, axis: str, lengths: list, convention: str = "rotation") -> dict:
    """点阵基数扫描任务"""
    try:
        rows = cardinality_scan(seed(seed_name, convention), axis, lengths)
        return {
            "status": "success",
            "result": {"seed": seed_name, "axis": axis, "convention": convention, "rows": [r.to_dict() for r in rows]},
            "message": f"扫描完成，共 {len(rows)} 个长度"
        }
    except Exception as e:
        logger.error(f"点阵扫描任务失败：{str(e)}", exc_info=True)
        return {
            "status": "failed",
            "error": str(e),
            "message": "点阵扫描任务执行失败"
        }


@celery_app.task(bind=True)
def verify_matrix_task(self, document: dict) -> dict:
    """矩阵校验任务：规则 1–4 + 一致性 + 对称化"""
    try:
        parsed = MatrixDocument.model_validate(document)
        report = verify_matrix(parsed.to_matrix(), allow_rational=parsed.allow_rational)
        return {
            "status": "success",
            "result": report,
            "message": "校验通过" if report["passed"] else "校验未通过"
        }
    except Exception as e:
        logger.error(f"矩阵校验任务失败：{str(e)}", exc_info=True)
        return {
            "status": "failed",
            "error": str(e),
            "message": "矩阵校验任务执行失败"
        }
