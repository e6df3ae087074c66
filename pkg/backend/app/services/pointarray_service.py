"""
点阵服务：把群不变的种子构型沿对称方向平移，再用点群闭合，统计基数

阵列 = P ∪ (P + G·t)
- rotation 约定（默认）：五边形为最高根在 H2 旋转子群下的轨道（外接圆半径 1），G 取旋转子群
- mirror 约定：五边形顶点位于 H2 的镜面上（与 α_2 正交的方向），G 取整个 H2
- H3：种子为 30 个根（截半二十面体），G 取整个 H3
去重全部基于精确坐标
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from app.services.coxeter_service import GroupElement, GroupId, generate_group, rotation_subgroup
from app.services.geometry_service import AXES, h2_plane, h3_group_cartesian, h3_roots_cartesian
from app.services.golden_service import (
    GMatrix,
    GoldenRational,
    Vector,
    as_golden,
    dot,
    vadd,
    vkey,
    vscale,
)

logger = logging.getLogger(__name__)


class PointArrayError(ValueError):
    """点阵参数错误（未知种子/约定/轴、坐标维数不符等）"""


CONVENTIONS = ("rotation", "mirror")
SEED_NAMES = ("pentagon", "icosidodecahedron")


@dataclass(frozen=True)
class SeedConfig:
    group: GroupId
    name: str
    convention: str
    points: tuple[Vector, ...]
    symmetry: tuple[GroupElement, ...]       # 作用在种子坐标上的点群
    gram: GMatrix | None = None              # None 表示笛卡尔坐标

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def is_invariant(self) -> bool:
        keys = {vkey(p) for p in self.points}
        return all({vkey(g.apply(p)) for p in self.points} == keys for g in self.symmetry)

    def scaled(self, factor) -> "SeedConfig":
        f = as_golden(factor)
        return SeedConfig(
            self.group, self.name, self.convention,
            tuple(vscale(f, p) for p in self.points), self.symmetry, self.gram,
        )

    def norm2(self, v: Sequence[GoldenRational]) -> GoldenRational:
        return dot(v, v, self.gram)


@dataclass
class PointArray:
    seed: SeedConfig
    translation: Vector
    points: list[Vector] = field(default_factory=list)
    seed_keys: frozenset = frozenset()

    @property
    def cardinality(self) -> int:
        return len(self.points)

    def contains_seed(self) -> bool:
        keys = {vkey(p) for p in self.points}
        return all(vkey(p) in keys for p in self.seed.points)

    def embedded(self) -> np.ndarray:
        """数值嵌入（仅用于绘图）：单根基坐标经 Gram 矩阵的 Cholesky 分解映到笛卡尔坐标"""
        coords = np.array([[c.embed() for c in p] for p in self.points], dtype=float)
        if self.seed.gram is None:
            return coords
        basis = np.linalg.cholesky(self.seed.gram.embed())
        return coords @ basis

    def to_rows(self) -> list[dict]:
        numeric = self.embedded()
        rows = []
        for idx, point in enumerate(self.points):
            row = {"index": idx, "is_seed": vkey(point) in self.seed_keys}
            for axis, component in enumerate(point):
                row[f"c{axis}"] = component.to_text()
            for axis, value in enumerate(numeric[idx]):
                row[f"x{axis}"] = float(value)
            rows.append(row)
        return rows


@dataclass(frozen=True)
class ScanRow:
    length: GoldenRational
    length2: GoldenRational
    cardinality: int

    def to_dict(self) -> dict:
        return {
            "length": self.length.to_text(),
            "length2": self.length2.to_text(),
            "length2_float": self.length2.embed(),
            "cardinality": self.cardinality,
        }


# ========== 种子 ==========
def _orbit(vector: Vector, elements: Sequence[GroupElement]) -> tuple[Vector, ...]:
    seen: dict[tuple, Vector] = {}
    for g in elements:
        image = g.apply(vector)
        seen.setdefault(vkey(image), image)
    return tuple(seen[k] for k in sorted(seen))


def seed(name: str, convention: str = "rotation") -> SeedConfig:
    key = name.strip().lower()
    if convention not in CONVENTIONS:
        raise PointArrayError(f"未知的点阵约定：{convention}（可选 {', '.join(CONVENTIONS)}）")
    if key == "pentagon":
        plane = h2_plane()
        if convention == "rotation":
            symmetry = tuple(rotation_subgroup(GroupId.H2))
            points = _orbit(plane.highest_root, symmetry)
        else:
            symmetry = tuple(generate_group(GroupId.H2))
            points = _orbit(plane.bisector, symmetry)
        config = SeedConfig(GroupId.H2, "pentagon", convention, points, symmetry, plane.gram)
    elif key == "icosidodecahedron":
        config = SeedConfig(
            GroupId.H3, "icosidodecahedron", "full",
            tuple(h3_roots_cartesian()), tuple(h3_group_cartesian()),
        )
    else:
        raise PointArrayError(f"未知的种子：{name}（可选 {', '.join(SEED_NAMES)}）")
    logger.debug("种子 %s/%s：%d 个点，群阶 %d", config.name, convention, len(config.points), len(config.symmetry))
    return config


def axis_vector(config: SeedConfig, axis: str, length) -> Vector:
    """
    highest：length·α_H；bisector：length·2w（|2w|² = 3−τ）
    H3：length·T_axis
    """
    scale = as_golden(length)
    key = axis.strip().lower()
    if config.group == GroupId.H2:
        plane = h2_plane()
        if key == "highest":
            return vscale(scale, plane.highest_root)
        if key == "bisector":
            return vscale(scale, plane.bisector_translation)
        raise PointArrayError(f"H2 点阵只支持 highest/bisector 轴，得到 {axis}")
    if key in AXES:
        return vscale(scale, AXES[key].vector)
    raise PointArrayError(f"H3 点阵只支持 2fold/3fold/5fold 轴，得到 {axis}")


# ========== 点阵生成 ==========
def generate_array(config: SeedConfig, t: Sequence[GoldenRational]) -> PointArray:
    translation = tuple(as_golden(c) for c in t)
    if len(translation) != config.dim:
        raise PointArrayError(f"平移向量维数 {len(translation)} 与种子维数 {config.dim} 不一致")
    seen: dict[tuple, Vector] = {vkey(p): p for p in config.points}
    for shifted in _orbit(translation, config.symmetry):
        for p in config.points:
            q = vadd(p, shifted)
            seen.setdefault(vkey(q), q)
    points = [seen[k] for k in sorted(seen)]
    logger.info(
        "点阵生成: %s/%s, |t|²=%s, 基数 %d",
        config.name, config.convention, config.norm2(translation).to_text(), len(points),
    )
    return PointArray(
        seed=config,
        translation=translation,
        points=points,
        seed_keys=frozenset(vkey(p) for p in config.points),
    )


def cardinality_scan(config: SeedConfig, axis: str, lengths: Sequence) -> list[ScanRow]:
    rows = []
    for length in lengths:
        value = as_golden(length)
        t = axis_vector(config, axis, value)
        rows.append(ScanRow(value, config.norm2(t), generate_array(config, t).cardinality))
    rows.sort(key=lambda r: (r.length2.embed(), r.length2.key))
    return rows


def generic_length(numerator: int = 7, denominator: int = 3) -> GoldenRational:
    """默认的“一般”有理长度"""
    return GoldenRational(Fraction(numerator, denominator))
