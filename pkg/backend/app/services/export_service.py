"""
输出服务：JSON / CSV（pandas）/ SVG（matplotlib Agg），供 CLI、接口和异步任务共用
"""
import json
import logging
from pathlib import Path
from typing import Iterable, Optional

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pandas as pd

from app.core.config import settings
from app.services.pointarray_service import PointArray

logger = logging.getLogger(__name__)


class ExportError(OSError):
    """输出文件写入失败（路径不可写、渲染失败等）"""


def output_dir() -> Path:
    """输出目录，可用环境变量 AFFINE_OUTPUT_DIR 覆盖"""
    return Path(settings.AFFINE_OUTPUT_DIR)


def _resolve(path: "str | Path") -> Path:
    out_path = Path(path)
    if not out_path.is_absolute():
        out_path = output_dir() / out_path
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(f"无法创建输出目录：{out_path.parent}") from e
    return out_path


def dumps(document) -> str:
    """稳定的 JSON 文本（键排序），重复运行字节一致"""
    return json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True)


def write_json(document, path: "str | Path") -> str:
    out_path = _resolve(path)
    try:
        out_path.write_text(dumps(document) + "\n", encoding="utf-8")
    except OSError as e:
        logger.error(f"JSON 写入失败：{out_path}", exc_info=True)
        raise ExportError(f"JSON 写入失败：{out_path}") from e
    logger.info("JSON 已保存：%s", out_path)
    return str(out_path.resolve())


def rows_to_frame(rows: Iterable[dict]) -> pd.DataFrame:
    return pd.DataFrame(list(rows))


def write_csv(rows: Iterable[dict], path: "str | Path") -> str:
    out_path = _resolve(path)
    frame = rows_to_frame(rows)
    try:
        frame.to_csv(out_path, index=False, lineterminator="\n")
    except OSError as e:
        logger.error(f"CSV 写入失败：{out_path}", exc_info=True)
        raise ExportError(f"CSV 写入失败：{out_path}") from e
    logger.info("CSV 已保存：%s（%d 行）", out_path, len(frame))
    return str(out_path.resolve())


def csv_text(rows: Iterable[dict]) -> str:
    return rows_to_frame(rows).to_csv(index=False, lineterminator="\n")


def render_svg(array: PointArray, path: "str | Path", title: Optional[str] = None) -> str:
    """只支持二维点阵；种子点高亮"""
    if array.seed.dim != 2:
        raise ExportError(f"SVG 只支持二维点阵，当前维数 {array.seed.dim}")
    out_path = _resolve(path)
    coords = array.embedded()
    is_seed = [row["is_seed"] for row in array.to_rows()]
    try:
        # 固定 hashsalt，保证 SVG 内的 id 在重复运行时一致
        plt.rcParams["svg.hashsalt"] = "affine-coxeter"
        fig, ax = plt.subplots(figsize=settings.SVG_FIGSIZE)
        others = coords[[not s for s in is_seed]]
        seeds = coords[is_seed]
        ax.scatter(others[:, 0], others[:, 1], s=settings.SVG_POINT_SIZE, c=settings.SVG_POINT_COLOR)
        ax.scatter(seeds[:, 0], seeds[:, 1], s=settings.SVG_POINT_SIZE * 2, c=settings.SVG_SEED_COLOR)
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(title or f"{array.seed.name} ({array.cardinality})")
        fig.savefig(str(out_path), format="svg", bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)
    except Exception as e:
        logger.error(f"SVG 渲染错误详情: {str(e)}", exc_info=True)
        raise ExportError(f"SVG 渲染失败：{out_path}") from e
    logger.info("SVG 已保存：%s", out_path)
    return str(out_path.resolve())
