"""
几何服务：H3 的 Q[τ]³ 笛卡尔实现、仿射反射/平移/扭转平移、H2 平面（单根基坐标）

- 单根 α_1=(0,1,0)、α_2=−½(−σ,1,τ)、α_3=(0,0,1)
- 对称轴 T_2=(1,0,0)、T_3=(τ,0,σ)、T_5=(τ,−1,0)，分别与 α_2、α_3、α_1 配对
- 仿射算子 v ↦ L·v + s，L 为 Q[τ] 上的正交矩阵
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from app.services.affine_service import (
    ExtensionFamily,
    Quadruplet,
    constraint_constant,
    translation_coefficient,
)
from app.services.coxeter_service import GroupElement, close_group, gram_for, highest_root
from app.services.golden_service import (
    ONE,
    SIGMA,
    TAU,
    ZERO,
    GMatrix,
    GoldenRational,
    Vector,
    dot,
    vadd,
    vec,
    vembed,
    vkey,
    vneg,
    vscale,
)

logger = logging.getLogger(__name__)


class GeometryError(ValueError):
    """几何参数错误（零向量、非对称轴、旋转不在稳定子中等）"""


Vec3G = Vector

HALF = Fraction(1, 2)

ALPHA_1: Vec3G = vec(0, 1, 0)
ALPHA_2: Vec3G = (SIGMA * HALF, GoldenRational(-HALF), -TAU * HALF)
ALPHA_3: Vec3G = vec(0, 0, 1)
T_2: Vec3G = vec(1, 0, 0)
T_3: Vec3G = (TAU, ZERO, SIGMA)
T_5: Vec3G = (TAU, -ONE, ZERO)


@dataclass(frozen=True)
class H3Constants:
    simple_roots: tuple[Vec3G, Vec3G, Vec3G]
    t2: Vec3G
    t3: Vec3G
    t5: Vec3G


@dataclass(frozen=True)
class AxisInfo:
    name: str
    vector: Vec3G
    order: int
    paired_root: int            # 配对单根（1 起）
    family: ExtensionFamily


AXES: dict[str, AxisInfo] = {
    "2fold": AxisInfo("2fold", T_2, 2, 2, ExtensionFamily.H3_2FOLD),
    "3fold": AxisInfo("3fold", T_3, 3, 3, ExtensionFamily.H3_3FOLD),
    "5fold": AxisInfo("5fold", T_5, 5, 1, ExtensionFamily.H3_5FOLD),
}


def h3_constants() -> H3Constants:
    return H3Constants((ALPHA_1, ALPHA_2, ALPHA_3), T_2, T_3, T_5)


def resolve_axis(axis: "str | Vec3G") -> AxisInfo:
    if isinstance(axis, str):
        key = axis.strip().lower()
        if key not in AXES:
            raise GeometryError(f"未知的对称轴：{axis}（可选 2fold/3fold/5fold）")
        return AXES[key]
    for info in AXES.values():
        if _parallel(axis, info.vector):
            return info
    raise GeometryError(f"向量 {[c.to_text() for c in axis]} 不平行于任何对称轴")


def _cross(u: Sequence[GoldenRational], v: Sequence[GoldenRational]) -> Vec3G:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _parallel(u: Sequence[GoldenRational], v: Sequence[GoldenRational]) -> bool:
    return all(c.is_zero for c in _cross(u, v)) and not all(c.is_zero for c in u)


def _outer(u: Sequence[GoldenRational], v: Sequence[GoldenRational]) -> GMatrix:
    return GMatrix([[a * b for b in v] for a in u])


# ========== 仿射算子 ==========
@dataclass(frozen=True)
class AffineOperator:
    linear: GMatrix
    shift: Vec3G

    @classmethod
    def identity(cls, dim: int = 3) -> "AffineOperator":
        return cls(GMatrix.identity(dim), tuple(ZERO for _ in range(dim)))

    @classmethod
    def translation(cls, t: Sequence[GoldenRational]) -> "AffineOperator":
        return cls(GMatrix.identity(len(t)), tuple(t))

    @classmethod
    def linear_only(cls, matrix: GMatrix) -> "AffineOperator":
        return cls(matrix, tuple(ZERO for _ in range(matrix.rows)))

    def apply(self, v: Sequence[GoldenRational]) -> Vec3G:
        return vadd(self.linear.apply(v), self.shift)

    def compose(self, other: "AffineOperator") -> "AffineOperator":
        """self ∘ other：v ↦ L1(L2 v + s2) + s1"""
        return AffineOperator(self.linear @ other.linear, vadd(self.linear.apply(other.shift), self.shift))

    def __matmul__(self, other: "AffineOperator") -> "AffineOperator":
        return self.compose(other)

    def inverse(self) -> "AffineOperator":
        if not self.is_orthogonal():
            raise GeometryError("线性部分不是正交矩阵，不能用转置求逆")
        transposed = self.linear.transpose()
        return AffineOperator(transposed, vneg(transposed.apply(self.shift)))

    def power(self, n: int) -> "AffineOperator":
        base = self if n >= 0 else self.inverse()
        result = AffineOperator.identity(self.linear.rows)
        for _ in range(abs(n)):
            result = base.compose(result)
        return result

    def is_translation(self) -> bool:
        return self.linear == GMatrix.identity(self.linear.rows)

    def is_identity(self) -> bool:
        return self.is_translation() and all(c.is_zero for c in self.shift)

    def is_orthogonal(self) -> bool:
        return self.linear.transpose() @ self.linear == GMatrix.identity(self.linear.rows)

    @property
    def key(self) -> tuple:
        return (self.linear.key, vkey(self.shift))

    def to_dict(self) -> dict:
        return {
            "linear": self.linear.to_json(),
            "shift": [c.to_json() for c in self.shift],
            "is_translation": self.is_translation(),
        }


def reflection(alpha: Sequence[GoldenRational]) -> AffineOperator:
    """r_α v = v − 2(α,v)/(α,α) α"""
    norm2 = dot(alpha, alpha)
    if norm2.is_zero:
        raise GeometryError("不能对零向量做反射")
    n = len(alpha)
    matrix = GMatrix.identity(n) - _outer(alpha, alpha) * (GoldenRational(2) / norm2)
    return AffineOperator.linear_only(matrix)


def affine_reflection(alpha0: Sequence[GoldenRational]) -> AffineOperator:
    """r^aff v = α_0 + r_α0 v，固定平面 (v, α_0) = |α_0|²/2"""
    linear = reflection(alpha0).linear
    return AffineOperator(linear, tuple(alpha0))


# ========== H3 笛卡尔群 ==========
@lru_cache(maxsize=None)
def _h3_cartesian_matrices() -> tuple[GMatrix, ...]:
    generators = [reflection(a).linear for a in (ALPHA_1, ALPHA_2, ALPHA_3)]
    elements = close_group(generators)
    logger.info("H3 笛卡尔群闭包完成，阶 %d", len(elements))
    return tuple(elements)


def h3_group_cartesian() -> list[GroupElement]:
    return [GroupElement(m) for m in _h3_cartesian_matrices()]


@lru_cache(maxsize=None)
def _h3_roots() -> tuple[Vec3G, ...]:
    seen: dict[tuple, Vec3G] = {}
    for g in _h3_cartesian_matrices():
        for alpha in (ALPHA_1, ALPHA_2, ALPHA_3):
            image = g.apply(alpha)
            seen.setdefault(vkey(image), image)
    return tuple(seen[k] for k in sorted(seen))


def h3_roots_cartesian() -> list[Vec3G]:
    """30 个根（截半二十面体的顶点）"""
    return list(_h3_roots())


def _rotation_angle(matrix: GMatrix, axis: Vec3G) -> float:
    """绕 axis 的转角，取值 [0, 2π)，仅用于排序"""
    a = vembed(axis)
    a = a / np.linalg.norm(a)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(a, helper)
    u = u / np.linalg.norm(u)
    ru = matrix.embed() @ u
    angle = float(np.arctan2(np.dot(a, np.cross(u, ru)), np.dot(u, ru)))
    return angle % (2 * np.pi)


def _sorted_by_angle(elements: list[GroupElement], axis: Vec3G) -> list[GroupElement]:
    return sorted(elements, key=lambda g: round(_rotation_angle(g.matrix, axis), 9))


def axis_stabilizer(axis: "str | Vec3G") -> list[GroupElement]:
    """固定轴向量的元素（2n 个，含反射）"""
    info = resolve_axis(axis)
    return [g for g in h3_group_cartesian() if g.apply(info.vector) == info.vector]


def line_stabilizer(axis: "str | Vec3G") -> list[GroupElement]:
    """把轴所在直线映到自身的元素（4n 个）"""
    info = resolve_axis(axis)
    negated = vneg(info.vector)
    return [g for g in h3_group_cartesian() if g.apply(info.vector) in (info.vector, negated)]


def axis_rotations(axis: "str | Vec3G", order: int | None = None) -> list[GroupElement]:
    """H3 中固定轴且行列式为 +1 的循环子群，按转角排序"""
    info = resolve_axis(axis)
    n = order or info.order
    if n != info.order:
        raise GeometryError(f"{info.name} 轴的阶为 {info.order}，不是 {n}")
    rotations = [g for g in axis_stabilizer(info.name) if g.det() == ONE]
    if len(rotations) != n:
        raise GeometryError(f"{info.name} 轴的旋转子群阶为 {len(rotations)}，期望 {n}")
    return _sorted_by_angle(rotations, info.vector)


# ========== 扭转平移 ==========
def twist_translation(alpha0: Sequence[GoldenRational], element: "GroupElement | GMatrix") -> AffineOperator:
    """
    g ∘ r_α0 ∘ r^aff_α0：v ↦ −α_0 + g v，g 为轴稳定子中的任一元素
    g 为恒等时得到纯平移 v ↦ v − α_0；行列式 −1 的 g 给出滑移反射
    """
    info = resolve_axis(tuple(alpha0))
    matrix = element.matrix if isinstance(element, GroupElement) else element
    allowed = {g.key for g in axis_stabilizer(info.name)}
    if matrix.key not in allowed:
        raise GeometryError(f"给定矩阵不在 {info.name} 轴的稳定子中")
    operator = AffineOperator.linear_only(matrix).compose(reflection(alpha0)).compose(affine_reflection(alpha0))
    if operator.shift != vneg(tuple(alpha0)):
        raise GeometryError("扭转平移的平移部分不等于 −α_0")
    return operator


@dataclass(frozen=True)
class TwistChoice:
    index: int
    angle: float
    is_rotation: bool
    operator: AffineOperator

    @property
    def is_pure_translation(self) -> bool:
        return self.operator.is_translation()


def twist_choices(alpha0: Sequence[GoldenRational]) -> list[TwistChoice]:
    """轴稳定子的 2n 个元素各给出一个算子，先旋转后反射；恰有一个是纯平移"""
    info = resolve_axis(tuple(alpha0))
    rotations = axis_rotations(info.name)
    mirrors = _sorted_by_angle([g for g in axis_stabilizer(info.name) if g.det() != ONE], info.vector)
    choices = [
        TwistChoice(idx, _rotation_angle(g.matrix, info.vector), g.det() == ONE, twist_translation(alpha0, g))
        for idx, g in enumerate(rotations + mirrors)
    ]
    pure = sum(1 for c in choices if c.is_pure_translation)
    logger.info("%s 轴扭转平移：%d 个选择，纯平移 %d 个", info.name, len(choices), pure)
    return choices


def affine_root_vector(family_id: "ExtensionFamily | str", q: Quadruplet) -> Vec3G:
    """α_0 = λ·T_axis（沿 +T_axis 方向）"""
    fam = ExtensionFamily(family_id)
    info = next((a for a in AXES.values() if a.family == fam), None)
    if info is None:
        raise GeometryError(f"{fam.value} 没有 H3 笛卡尔轴")
    coefficient = translation_coefficient(fam, q)
    if coefficient is None:
        raise GeometryError(f"{q} 的平移系数不在 Q[τ] 中，无法给出精确的 α_0")
    return vscale(coefficient, info.vector)


def orbit(vector: Sequence[GoldenRational]) -> list[Vec3G]:
    seen: dict[tuple, Vec3G] = {}
    for g in h3_group_cartesian():
        image = g.apply(vector)
        seen.setdefault(vkey(image), image)
    return [seen[k] for k in sorted(seen)]


# ========== 夹角交叉检查 ==========
@dataclass(frozen=True)
class AxisAngleCheck:
    axis: str
    cos2: GoldenRational
    expected: GoldenRational

    @property
    def passed(self) -> bool:
        return self.cos2 == self.expected


def axis_angle_check(axis: str) -> AxisAngleCheck:
    """cos²(T_axis, 配对单根) 与族约束 xy/4 比较"""
    info = resolve_axis(axis)
    root = (ALPHA_1, ALPHA_2, ALPHA_3)[info.paired_root - 1]
    inner = dot(info.vector, root)
    cos2 = inner * inner / (dot(info.vector, info.vector) * dot(root, root))
    expected = constraint_constant(info.family) * Fraction(1, 4)
    return AxisAngleCheck(info.name, cos2, expected)


# ========== H2 平面（单根基坐标） ==========
@dataclass(frozen=True)
class H2Plane:
    gram: GMatrix
    highest_root: Vector
    bisector: Vector            # w = α_1 + (τ/2)α_2

    @property
    def bisector_translation(self) -> Vector:
        return vscale(2, self.bisector)


def h2_plane() -> H2Plane:
    gram = gram_for("H2")
    w = (ONE, TAU * HALF)
    plane = H2Plane(gram=gram, highest_root=highest_root("H2").coords, bisector=w)
    if not dot(w, (ZERO, ONE), gram).is_zero:
        raise GeometryError("平分方向与 α_2 不正交")
    return plane
