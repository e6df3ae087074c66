import logging

from celery import Celery
from app.core.config import settings

logger = logging.getLogger(__name__)
logger.info("REDIS_URL: %s", settings.REDIS_URL)

# 初始化Celery实例
celery_app = Celery(
    "affine_coxeter_tasks",
    broker=settings.CELERY_BROKER_URL,
    backend=settings.CELERY_RESULT_BACKEND,
    include=["app.tasks.coxeter_tasks"]  # 任务所在的模块路径
)

# 配置Celery
celery_app.conf.update(
    # 结果全部是 JSON 友好的 dict（GoldenRational 以 {"a","b"} 字符串对传输）
    task_serializer="json",
    result_serializer="json",
    accept_content=["json"],
    result_accept_content=["json"],
    timezone='Asia/Shanghai',
    enable_utc=False,
    task_time_limit=settings.CELERY_TASK_TIME_LIMIT,
    result_expires=3600,
    worker_concurrency=4
)
