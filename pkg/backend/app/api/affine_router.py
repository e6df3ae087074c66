import asyncio
import json
import logging
from fastapi import APIRouter, File, HTTPException, UploadFile
from pydantic import ValidationError

from app.core.config import settings
from app.schemas.golden_schema import EnumerateRequest, LengthsRequest, MatrixDocument, ParseRequest, SolveRequest
from app.schemas.task_schema import TaskStatusEnum, TaskSubmitResponse
from app.services.affine_service import (
    enumerate_family,
    length_series,
    preset_series,
    resolve_family,
    solve_constraint_orbits,
    verify_matrix,
)
from app.services.golden_service import parse_golden, parse_rational
from app.tasks.coxeter_tasks import verify_matrix_task

router = APIRouter()
golden_router = APIRouter()
logger = logging.getLogger(__name__)


@golden_router.post("/parse")
async def parse(request: ParseRequest):
    try:
        value = parse_golden(request.text)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"解析失败：{str(e)}")
    return {"text": value.to_text(), "value": value.to_json(), "float": value.embed(), "norm": str(value.norm())}


@router.post("/solve")
async def solve(request: SolveRequest):
    try:
        orbits = await asyncio.to_thread(
            solve_constraint_orbits,
            parse_golden(request.target),
            parse_rational(request.gamma),
            parse_rational(request.delta),
            request.bound,
        )
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"约束求解参数错误：{str(e)}")
    except Exception as e:
        logger.error(f"约束求解失败：{str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"约束求解失败: {str(e)}")
    return {
        "status": "success",
        "result": {"target": request.target, "bases": [str(o.base) for o in orbits], "orbits": [o.to_dict() for o in orbits]},
        "message": f"共 {len(orbits)} 个独立解族"
    }


def _k_range(k_min, k_max) -> tuple[int, int]:
    return (
        settings.DEFAULT_K_MIN if k_min is None else k_min,
        settings.DEFAULT_K_MAX if k_max is None else k_max,
    )


@router.post("/enumerate")
async def enumerate_matrices(request: EnumerateRequest):
    try:
        family = resolve_family(request.group, request.axis)
        gamma = parse_rational(request.gamma or settings.DEFAULT_GAMMA)
        members = await asyncio.to_thread(enumerate_family, family, _k_range(request.k_min, request.k_max), gamma)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"扩展族参数错误：{str(e)}")
    documents = [ext.to_document(k=m.k, quadruplet=m.quadruplet) for m, ext in members]
    return {"status": "success", "result": documents, "message": f"共 {len(documents)} 个扩展矩阵"}


@router.post("/lengths")
async def lengths(request: LengthsRequest):
    try:
        if request.preset:
            series = await asyncio.to_thread(preset_series, request.preset)
        else:
            family = resolve_family(request.group, request.axis)
            gamma = parse_rational(request.gamma or settings.DEFAULT_GAMMA)
            series = await asyncio.to_thread(length_series, family, gamma, _k_range(request.k_min, request.k_max))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"长度序列参数错误：{str(e)}")
    return {"status": "success", "result": [c.to_dict() for c in series], "message": f"共 {len(series)} 个长度"}


@router.post("/verify")
async def verify(file: UploadFile = File(...)):
    content = await file.read()
    try:
        document = MatrixDocument.model_validate(json.loads(content.decode("utf-8")))
        matrix = document.to_matrix()
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"矩阵文件无效：{str(e)}")
    try:
        report = await asyncio.to_thread(verify_matrix, matrix, document.allow_rational)
    except Exception as e:
        logger.error(f"矩阵校验失败：{str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"矩阵校验失败: {str(e)}")
    return {"status": "success", "result": report, "message": "校验通过" if report["passed"] else "校验未通过"}


@router.post("/verify/task", response_model=TaskSubmitResponse)
async def verify_task(file: UploadFile = File(...)):
    """矩阵文档提交到 Celery 校验，结果用 /api/coxeter/task/{task_id} 查询"""
    content = await file.read()
    try:
        payload = json.loads(content.decode("utf-8"))
        MatrixDocument.model_validate(payload)
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=f"矩阵文件无效：{str(e)}")
    try:
        task = verify_matrix_task.delay(payload)
    except Exception as e:
        logger.error(f"校验任务提交失败：{str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"任务提交失败: {str(e)}")
    return TaskSubmitResponse(task_id=task.id, status=TaskStatusEnum.PROCESSING, message="矩阵校验任务已提交")
