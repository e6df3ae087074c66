import os
from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv
from typing import ClassVar, Tuple

# 加载.env文件（优先加载项目根目录的.env）
load_dotenv(dotenv_path=Path(__file__).parent.parent.parent / ".env")


class Settings(BaseSettings):
    # ========== 项目基础配置（ClassVar标记静态变量，不参与.env加载） ==========
    PROJECT_ROOT: ClassVar[Path] = Path(__file__).parent.parent.parent
    PROJECT_NAME: str = "黄金域仿射Coxeter计算服务"
    LOG_LEVEL: str = "INFO"

    # ========== 输出目录 ==========
    AFFINE_OUTPUT_DIR: str = os.path.join(PROJECT_ROOT, "output")

    # ========== 计算默认值 ==========
    DEFAULT_SEARCH_BOUND: int = 12       # 约束求解 |a|,|b|,|c|,|d| 上界
    DEFAULT_K_MIN: int = -3
    DEFAULT_K_MAX: int = 3
    DEFAULT_GAMMA: str = "1"
    TAU_EXPONENT_LIMIT: int = 128        # r·τ^m 分解时 |m| 的搜索上限

    # ========== SVG渲染配置 ==========
    SVG_FIGSIZE: Tuple[int, int] = (6, 6)
    SVG_POINT_SIZE: float = 12.0
    SVG_SEED_COLOR: str = "#d62728"
    SVG_POINT_COLOR: str = "#1f77b4"

    # ========== Redis配置（从.env加载） ==========
    REDIS_HOST: str = "localhost"
    REDIS_PORT: int = 6379
    REDIS_DB: int = 0

    @property
    def REDIS_URL(self) -> str:
        return f"redis://{self.REDIS_HOST}:{self.REDIS_PORT}/{self.REDIS_DB}"

    # ========== Celery配置 ==========
    CELERY_TASK_TIME_LIMIT: int = 3600  # H4 闭包较慢，给足 1 小时

    @property
    def CELERY_BROKER_URL(self) -> str:
        return self.REDIS_URL

    @property
    def CELERY_RESULT_BACKEND(self) -> str:
        return self.REDIS_URL

    # ========== Pydantic配置 ==========
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"  # 忽略.env中未定义的字段
    )


# 全局配置实例（其他模块导入这个实例即可）
settings = Settings()
