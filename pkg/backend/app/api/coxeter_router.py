import asyncio
import logging
from fastapi import APIRouter, HTTPException

from app.schemas.golden_schema import ArrayRequest
from app.schemas.task_schema import TaskStatusEnum, TaskStatusResponse, TaskSubmitResponse
from app.services.coxeter_service import GroupId, group_summary, positive_roots, root_system, roots_as_rows
from app.services.pointarray_service import cardinality_scan, seed
from app.tasks.coxeter_tasks import cardinality_scan_task, generate_group_task

router = APIRouter()
logger = logging.getLogger(__name__)


@router.get("/roots/{group}")
async def roots(group: str, positive_only: bool = False):
    try:
        g = GroupId.parse(group)
        found = await asyncio.to_thread(positive_roots if positive_only else root_system, g)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {"status": "success", "result": {"group": g.value, "count": len(found), "roots": roots_as_rows(found)}}


@router.get("/group/{group}")
async def group(group: str, include_elements: bool = False):
    """H2/H3 直接计算；H4 提交 Celery 任务并返回任务ID"""
    try:
        g = GroupId.parse(group)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    if g == GroupId.H4:
        try:
            task = generate_group_task.delay(g.value, include_elements)
        except Exception as e:
            logger.error(f"群闭包任务提交失败：{str(e)}", exc_info=True)
            raise HTTPException(status_code=500, detail=f"任务提交失败: {str(e)}")
        return TaskSubmitResponse(task_id=task.id, status=TaskStatusEnum.PROCESSING, message="H4 群闭包任务已提交")
    summary = await asyncio.to_thread(group_summary, g, include_elements)
    return {"status": "success", "result": summary, "message": f"{g.value} 阶 {summary['order']}"}


@router.post("/array")
async def array(request: ArrayRequest):
    try:
        config = seed(request.seed, request.convention)
        rows = await asyncio.to_thread(cardinality_scan, config, request.axis, request.lengths)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"点阵参数错误：{str(e)}")
    except Exception as e:
        logger.error(f"点阵生成失败：{str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"点阵生成失败: {str(e)}")
    return {"status": "success", "result": [r.to_dict() for r in rows], "message": f"共 {len(rows)} 个长度"}


@router.post("/array/task", response_model=TaskSubmitResponse)
async def array_task(request: ArrayRequest):
    """H3 点阵较大时走异步任务"""
    try:
        seed(request.seed, request.convention)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"点阵参数错误：{str(e)}")
    try:
        task = cardinality_scan_task.delay(request.seed, request.axis, request.lengths, request.convention)
    except Exception as e:
        logger.error(f"点阵扫描任务提交失败：{str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"任务提交失败: {str(e)}")
    return TaskSubmitResponse(task_id=task.id, status=TaskStatusEnum.PROCESSING, message="点阵扫描任务已提交")


@router.get("/task/{task_id}")
async def get_task_status(task_id: str):
    from celery.result import AsyncResult
    task = AsyncResult(task_id)
    if not task.ready():
        return TaskStatusResponse(task_id=task_id, status=TaskStatusEnum.PROCESSING)
    if task.successful() and isinstance(task.result, dict) and task.result.get("status") == "success":
        return TaskStatusResponse(task_id=task_id, status=TaskStatusEnum.SUCCESS, result=task.result)
    error = task.result.get("error") if isinstance(task.result, dict) else str(task.result)
    return TaskStatusResponse(task_id=task_id, status=TaskStatusEnum.FAILED, error=error)
