import logging
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api.affine_router import golden_router, router as affine_router
from app.api.coxeter_router import router as coxeter_router
from app.core.config import settings

logging.basicConfig(level=settings.LOG_LEVEL)

# 创建 FastAPI 应用实例
app = FastAPI(title=settings.PROJECT_NAME, version="1.0")

# 配置 CORS
origins = ["http://localhost:3000", "http://127.0.0.1:3000"]
app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# 注册各个功能模块的路由
app.include_router(golden_router, prefix="/api/golden", tags=["黄金比算术"])
app.include_router(affine_router, prefix="/api/affine", tags=["仿射扩展"])
app.include_router(coxeter_router, prefix="/api/coxeter", tags=["Coxeter群与点阵"])


@app.get("/")
async def root():
    return {"message": f"{settings.PROJECT_NAME}服务已启动"}
