"""
仿射扩展服务：扩展 Cartan 矩阵族、行列式约束 xy = c、Fibonacci 解族、平移长度分类与对称化

约定：
- 扩展矩阵第 0 行/列对应仿射根 α_0，其余为原 Cartan 矩阵
- x = γ(a+bτ) 位于 (0, j)，y = δ(c+dτ) 位于 (j, 0)
- Fibonacci 下标 k>0 表示 x → τ^{-k}x、y → τ^{k}y
- 对称化采用右乘对角阵 S = A·D
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from app.core.config import settings
from app.services.coxeter_service import CartanMatrix, GroupId, cartan_matrix, check_km_rules
from app.services.golden_service import (
    ONE,
    ZERO,
    GMatrix,
    GoldenRational,
    as_golden,
    det,
    is_positive_semidefinite,
    rational_tau_decomposition,
    tau_pow,
)

logger = logging.getLogger(__name__)


class ExtensionError(ValueError):
    """仿射扩展参数错误（族与群不匹配、x/y 非负、零输入等）"""


class ExtensionFamily(str, Enum):
    H3_2FOLD = "H3-2fold"
    H3_3FOLD = "H3-3fold"
    H3_5FOLD = "H3-5fold"
    H2_HIGHEST = "H2-highest"
    H2_BISECTOR = "H2-bisector"
    H4_A1 = "H4-A1"
    H4_A2 = "H4-A2"
    H4_A3 = "H4-A3"
    H4_A4 = "H4-A4"


@dataclass(frozen=True)
class FamilyInfo:
    group: GroupId
    slots: tuple[int, ...]          # 与 α_0 相连的列（扩展矩阵下标）
    axis: str                       # 2fold / 3fold / 5fold / bisector / raw
    closed_form: GoldenRational     # 约束常数的闭式
    axis_norm2: GoldenRational | None


FAMILY_INFO: dict[ExtensionFamily, FamilyInfo] = {
    ExtensionFamily.H3_2FOLD: FamilyInfo(GroupId.H3, (2,), "2fold", GoldenRational(2, -1), ONE),
    ExtensionFamily.H3_3FOLD: FamilyInfo(
        GroupId.H3, (3,), "3fold", GoldenRational(2, -1) * Fraction(4, 3), GoldenRational(3)
    ),
    ExtensionFamily.H3_5FOLD: FamilyInfo(
        GroupId.H3, (1,), "5fold", GoldenRational(3, -1) * Fraction(4, 5), GoldenRational(2, 1)
    ),
    ExtensionFamily.H2_HIGHEST: FamilyInfo(GroupId.H2, (1, 2), "2fold", GoldenRational(2, -1), ONE),
    ExtensionFamily.H2_BISECTOR: FamilyInfo(GroupId.H2, (1,), "bisector", GoldenRational(3, -1), GoldenRational(3, -1)),
    ExtensionFamily.H4_A1: FamilyInfo(GroupId.H4, (1,), "2fold", GoldenRational(2, -1), ONE),
    ExtensionFamily.H4_A2: FamilyInfo(GroupId.H4, (2,), "raw", GoldenRational(7, -4) * Fraction(1, 5), None),
    ExtensionFamily.H4_A3: FamilyInfo(GroupId.H4, (3,), "raw", GoldenRational(5, -3) * Fraction(1, 3), None),
    ExtensionFamily.H4_A4: FamilyInfo(GroupId.H4, (4,), "raw", GoldenRational(5, -3) * Fraction(1, 2), None),
}

# CLI 的 --axis 名称 → 族
_AXIS_ALIASES: dict[tuple[GroupId, str], ExtensionFamily] = {
    (GroupId.H3, "2fold"): ExtensionFamily.H3_2FOLD,
    (GroupId.H3, "3fold"): ExtensionFamily.H3_3FOLD,
    (GroupId.H3, "5fold"): ExtensionFamily.H3_5FOLD,
    (GroupId.H2, "highest"): ExtensionFamily.H2_HIGHEST,
    (GroupId.H2, "2fold"): ExtensionFamily.H2_HIGHEST,
    (GroupId.H2, "bisector"): ExtensionFamily.H2_BISECTOR,
    (GroupId.H4, "highest"): ExtensionFamily.H4_A1,
    (GroupId.H4, "2fold"): ExtensionFamily.H4_A1,
    (GroupId.H4, "a1"): ExtensionFamily.H4_A1,
    (GroupId.H4, "a2"): ExtensionFamily.H4_A2,
    (GroupId.H4, "a3"): ExtensionFamily.H4_A3,
    (GroupId.H4, "a4"): ExtensionFamily.H4_A4,
}


def resolve_family(group: "GroupId | str", axis: "str | ExtensionFamily") -> ExtensionFamily:
    if isinstance(axis, ExtensionFamily):
        family = axis
    else:
        text = str(axis).strip()
        try:
            family = ExtensionFamily(text)
        except ValueError:
            key = (GroupId.parse(group), text.lower())
            if key not in _AXIS_ALIASES:
                raise ExtensionError(f"群 {group} 不支持轴/族 {axis}") from None
            family = _AXIS_ALIASES[key]
    if FAMILY_INFO[family].group != GroupId.parse(group):
        raise ExtensionError(f"族 {family.value} 不属于群 {GroupId.parse(group).value}")
    return family


# ========== 数据模型 ==========
@dataclass(frozen=True)
class ExtensionSpec:
    group: GroupId
    family: ExtensionFamily
    x: GoldenRational
    y: GoldenRational

    def __post_init__(self) -> None:
        object.__setattr__(self, "group", GroupId.parse(self.group))
        object.__setattr__(self, "family", ExtensionFamily(self.family))
        object.__setattr__(self, "x", as_golden(self.x))
        object.__setattr__(self, "y", as_golden(self.y))
        if FAMILY_INFO[self.family].group != self.group:
            raise ExtensionError(f"族 {self.family.value} 与群 {self.group.value} 不匹配")
        if self.x.sign() >= 0 or self.y.sign() >= 0:
            raise ExtensionError(f"x、y 必须严格为负：x={self.x.to_text()}, y={self.y.to_text()}")


@dataclass(frozen=True)
class ExtendedCartan:
    base: CartanMatrix
    spec: ExtensionSpec
    entries: GMatrix

    def det(self) -> GoldenRational:
        return det(self.entries)

    def base_part(self) -> GMatrix:
        return self.entries.delete_index(0)

    def to_document(self, k: int | None = None, quadruplet: "Quadruplet | None" = None) -> dict:
        """可被 verify 重新读取的 JSON 文档"""
        integral = all(v.is_zt_integer() for row in self.entries.entries for v in row)
        return {
            "group": self.spec.group.value,
            "family": self.spec.family.value,
            "k": k,
            "quadruplet": None if quadruplet is None else quadruplet.to_dict(),
            "x": self.spec.x.to_json(),
            "y": self.spec.y.to_json(),
            "entries": self.entries.to_json(),
            "det": self.det().to_json(),
            "allow_rational": not integral,
        }


@dataclass(frozen=True)
class Quadruplet:
    """x = γ(a+bτ)，y = δ(c+dτ)"""
    a: int
    b: int
    c: int
    d: int
    gamma: Fraction = Fraction(1)
    delta: Fraction = Fraction(1)

    @property
    def x_integer(self) -> GoldenRational:
        return GoldenRational(self.a, self.b)

    @property
    def y_integer(self) -> GoldenRational:
        return GoldenRational(self.c, self.d)

    @property
    def x(self) -> GoldenRational:
        return self.x_integer * self.gamma

    @property
    def y(self) -> GoldenRational:
        return self.y_integer * self.delta

    @property
    def product(self) -> GoldenRational:
        return self.x * self.y

    @property
    def coefficient_sum(self) -> int:
        return abs(self.a) + abs(self.b) + abs(self.c) + abs(self.d)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def with_multipliers(self, gamma, delta) -> "Quadruplet":
        return Quadruplet(self.a, self.b, self.c, self.d, Fraction(gamma), Fraction(delta))

    def __str__(self) -> str:
        text = f"({self.a},{self.b};{self.c},{self.d})"
        if self.gamma != 1 or self.delta != 1:
            text += f" γ={self.gamma} δ={self.delta}"
        return text

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "c": self.c, "d": self.d,
            "gamma": str(self.gamma), "delta": str(self.delta),
            "x": self.x.to_json(), "y": self.y.to_json(),
        }


@dataclass(frozen=True)
class FamilyMember:
    k: int
    quadruplet: Quadruplet

    @property
    def x(self) -> GoldenRational:
        return self.quadruplet.x

    @property
    def y(self) -> GoldenRational:
        return self.quadruplet.y


@dataclass
class FibonacciFamily:
    base: Quadruplet
    k_range: tuple[int, int]
    members: list[FamilyMember] = field(default_factory=list)


@dataclass
class ConstraintOrbit:
    """τ 单位轨道：同一轨道内的解相差 (τ^{-k}, τ^{k}) 缩放"""
    base: Quadruplet
    members: list[Quadruplet]
    anchors: list[Quadruplet]

    def to_dict(self) -> dict:
        return {
            "base": str(self.base),
            "members": [str(m) for m in self.members],
            "anchors": [str(m) for m in self.anchors],
        }


@dataclass
class ConsistencyReport:
    passed: bool
    ratios: list[tuple[int, GoldenRational]]
    ratios_consistent: bool
    corollary_triggered: bool
    symmetric: bool
    angle_products: list[tuple[int, GoldenRational]]
    angle_bound_ok: bool
    witness: str | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "ratios": [{"k": k, "ratio": r.to_json()} for k, r in self.ratios],
            "ratios_consistent": self.ratios_consistent,
            "corollary_triggered": self.corollary_triggered,
            "symmetric": self.symmetric,
            "angle_bound_ok": self.angle_bound_ok,
            "witness": self.witness,
        }


@dataclass
class LengthClass:
    """
    平移长度分类
    series: unit（ρτ^k）/ sqrt3/2 / sqrt(2+t)/2 / sqrt(5/4(3-t)) / sqrt(3-t) / raw
    length：长度本身属于 Q[τ] 时给出；coefficient：α_0 = λ·T_axis 中的 λ（属于 Q[τ] 时）
    """
    family: ExtensionFamily
    length2: GoldenRational
    series: str
    rho: Fraction | None = None
    k: int | None = None
    length: GoldenRational | None = None
    coefficient: GoldenRational | None = None
    solves_constraint: bool = True

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "length2": self.length2.to_json(),
            "series": self.series,
            "rho": None if self.rho is None else str(self.rho),
            "k": self.k,
            "length": None if self.length is None else self.length.to_json(),
            "coefficient": None if self.coefficient is None else self.coefficient.to_json(),
            "solves_constraint": self.solves_constraint,
        }


@dataclass
class Symmetrisation:
    symmetrisable: bool
    d: GMatrix | None = None
    s: GMatrix | None = None
    positive_semidefinite: bool = False
    witness: str | None = None

    def to_dict(self) -> dict:
        return {
            "symmetrisable": self.symmetrisable,
            "d": None if self.d is None else self.d.to_json(),
            "s": None if self.s is None else self.s.to_json(),
            "positive_semidefinite": self.positive_semidefinite,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class CornerRoot:
    family: ExtensionFamily
    x_squared: GoldenRational
    x: GoldenRational | None
    in_field: bool
    note: str | None = None


# ========== 业务函数：扩展矩阵与约束 ==========
def _extended_rows(info: FamilyInfo, base: CartanMatrix, x: GoldenRational, y: GoldenRational) -> GMatrix:
    n = base.rank + 1
    rows = [[ZERO] * n for _ in range(n)]
    rows[0][0] = GoldenRational(2)
    for i in range(1, n):
        for j in range(1, n):
            rows[i][j] = base.entries[i - 1, j - 1]
    for slot in info.slots:
        rows[0][slot] = x
        rows[slot][0] = y
    return GMatrix(rows)


def extend(spec: ExtensionSpec) -> ExtendedCartan:
    info = FAMILY_INFO[spec.family]
    base = cartan_matrix(spec.group)
    return ExtendedCartan(base=base, spec=spec, entries=_extended_rows(info, base, spec.x, spec.y))


def constraint_constant(family: "ExtensionFamily | str") -> GoldenRational:
    """
    det 对 p = xy 是仿射的：det = 2·det(B) − p·K
    由 x = y = 1 时的行列式求出 K，c = 2·det(B)/K
    """
    fam = ExtensionFamily(family)
    info = FAMILY_INFO[fam]
    base = cartan_matrix(info.group)
    two_det = base.det() * 2
    k_factor = two_det - det(_extended_rows(info, base, ONE, ONE))
    if k_factor.is_zero:
        raise ExtensionError(f"{fam.value} 的行列式不依赖 xy，无法确定约束常数")
    constant = two_det / k_factor
    if constant != info.closed_form:
        logger.warning("约束常数 %s 与闭式 %s 不一致: %s", constant.to_text(), info.closed_form.to_text(), fam.value)
    return constant


def consistency_check(matrix: "ExtendedCartan | GMatrix") -> ConsistencyReport:
    """所有非零对 (0,k) 的比值 A_k0/A_0k 必须一致；同时检查推论触发条件和夹角界"""
    m = matrix.entries if isinstance(matrix, ExtendedCartan) else matrix
    n = m.rows
    ratios: list[tuple[int, GoldenRational]] = []
    products: list[tuple[int, GoldenRational]] = []
    witness = None
    for k in range(1, n):
        upper, lower = m[0, k], m[k, 0]
        if upper.is_zero and lower.is_zero:
            continue
        if upper.is_zero or lower.is_zero:
            witness = f"A[0,{k}]={upper.to_text()}, A[{k},0]={lower.to_text()} 只有一个为零"
            continue
        ratios.append((k, lower / upper))
        products.append((k, upper * lower))

    ratios_consistent = witness is None and all(r == ratios[0][1] for _, r in ratios)
    if witness is None and not ratios_consistent:
        witness = "比值不一致：" + ", ".join(f"k={k}: {r.to_text()}" for k, r in ratios)
    corollary = any(m[0, k] == m[k, 0] for k, _ in ratios)
    symmetric = all(m[0, k] == m[k, 0] for k in range(1, n))
    if corollary and not symmetric and witness is None:
        witness = "存在 A_0k = A_k0，但第 0 行/列不完全对称"
    angle_ok = all(p.sign() >= 0 and (GoldenRational(4) - p).sign() >= 0 for _, p in products)
    if not angle_ok and witness is None:
        witness = "A_0k·A_k0 超出 [0, 4]"
    passed = ratios_consistent and (symmetric or not corollary) and angle_ok
    return ConsistencyReport(
        passed=passed,
        ratios=ratios,
        ratios_consistent=ratios_consistent,
        corollary_triggered=corollary,
        symmetric=symmetric,
        angle_products=products,
        angle_bound_ok=angle_ok,
        witness=witness,
    )


def root_geometry(x, y) -> tuple[GoldenRational, GoldenRational]:
    """(长度², cos²θ) = (x/y, xy/4)，基根长为 1"""
    x_g, y_g = as_golden(x), as_golden(y)
    if x_g.is_zero or y_g.is_zero:
        raise ExtensionError("root_geometry 要求 x、y 非零")
    return x_g / y_g, x_g * y_g * Fraction(1, 4)


# ========== 业务函数：约束求解与 Fibonacci 族 ==========
def fib_step(q: Quadruplet, direction: int) -> Quadruplet:
    """+1：(a,b;c,d) → (b,a+b;d−c,c)，即 (x,y) → (τx, τ^{-1}y)；−1 为其逆"""
    if direction == 1:
        return Quadruplet(q.b, q.a + q.b, q.d - q.c, q.c, q.gamma, q.delta)
    if direction == -1:
        return Quadruplet(q.b - q.a, q.a, q.d, q.c + q.d, q.gamma, q.delta)
    raise ExtensionError(f"fib_step 方向只能是 ±1，得到 {direction}")


def swap(q: Quadruplet) -> Quadruplet:
    return Quadruplet(q.c, q.d, q.a, q.b, q.delta, q.gamma)


def shift(q: Quadruplet, k: int) -> Quadruplet:
    """第 k 个族成员：x → τ^{-k}x"""
    current = q
    step = -1 if k > 0 else 1
    for _ in range(abs(k)):
        current = fib_step(current, step)
    return current


def family(base: Quadruplet, k_range: tuple[int, int]) -> FibonacciFamily:
    k_min, k_max = k_range
    if k_min > k_max:
        raise ExtensionError(f"k 范围无效：{k_min}..{k_max}")
    members = [FamilyMember(k, shift(base, k)) for k in range(k_min, k_max + 1)]
    return FibonacciFamily(base=base, k_range=(k_min, k_max), members=members)


def enumerate_solutions(target, bound: int, gamma=1, delta=1) -> list[Quadruplet]:
    """穷举 |a|,|b|,|c|,|d| ≤ bound 且两因子均为负的整数解"""
    if bound < 1:
        raise ExtensionError(f"搜索界必须 ≥ 1，得到 {bound}")
    gamma_f, delta_f = Fraction(gamma), Fraction(delta)
    if gamma_f == 0 or delta_f == 0:
        raise ExtensionError("γ、δ 不能为零")
    integer_target = as_golden(target) / (gamma_f * delta_f)
    if integer_target.is_zero or not integer_target.is_zt_integer():
        logger.info("目标 %s/(γδ) 不属于 Z[τ]，无整数解", as_golden(target).to_text())
        return []
    solutions = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            x = GoldenRational(a, b)
            if x.sign() >= 0:
                continue
            y = integer_target / x
            if y.sign() >= 0 or not y.is_zt_integer():
                continue
            c, d = int(y.a), int(y.b)
            if abs(c) > bound or abs(d) > bound:
                continue
            solutions.append(Quadruplet(a, b, c, d, gamma_f, delta_f))
    solutions.sort(key=Quadruplet.as_tuple)
    return solutions


def _same_orbit(p: Quadruplet, q: Quadruplet) -> bool:
    if (p.gamma, p.delta) != (q.gamma, q.delta):
        return False
    ratio = p.x_integer / q.x_integer
    return ratio.is_unit() and ratio.sign() > 0


def unit_orbits(solutions: Sequence[Quadruplet]) -> list[ConstraintOrbit]:
    """按 τ 单位轨道分组；规范基为 Σ|·| 最小者（并列时取 (a,b,c,d) 字典序最小）"""
    groups: list[list[Quadruplet]] = []
    for q in solutions:
        for group in groups:
            if _same_orbit(q, group[0]):
                group.append(q)
                break
        else:
            groups.append([q])
    orbits = []
    for group in groups:
        members = sorted(group, key=Quadruplet.as_tuple)
        base = min(members, key=lambda q: (q.coefficient_sum, q.as_tuple()))
        anchors = [q for q in members if q.x_integer == -1 or q.y_integer == -1]
        orbits.append(ConstraintOrbit(base=base, members=members, anchors=anchors))
    orbits.sort(key=lambda o: o.base.as_tuple())
    return orbits


def solve_constraint_orbits(target, gamma=1, delta=1, bound: int | None = None) -> list[ConstraintOrbit]:
    bound = settings.DEFAULT_SEARCH_BOUND if bound is None else bound
    solutions = enumerate_solutions(target, bound, gamma, delta)
    orbits = unit_orbits(solutions)
    logger.info(
        "约束求解: target=%s, bound=%d, 解 %d 个, 轨道 %d 个",
        as_golden(target).to_text(), bound, len(solutions), len(orbits),
    )
    return orbits


def solve_constraint(target, gamma=1, delta=1, bound: int | None = None) -> list[Quadruplet]:
    """返回每个 τ 单位轨道的规范基"""
    return [o.base for o in solve_constraint_orbits(target, gamma, delta, bound)]


# ========== 默认基解与 γ 预设 ==========
DEFAULT_BASES: dict[ExtensionFamily, Quadruplet] = {
    ExtensionFamily.H3_2FOLD: Quadruplet(1, -1, 1, -1),
    ExtensionFamily.H3_3FOLD: Quadruplet(1, -1, 1, -1),
    ExtensionFamily.H3_5FOLD: Quadruplet(-1, 0, -3, 1),
    ExtensionFamily.H2_HIGHEST: Quadruplet(1, -1, 1, -1),
    ExtensionFamily.H2_BISECTOR: Quadruplet(-3, 1, -1, 0),
    ExtensionFamily.H4_A1: Quadruplet(1, -1, 1, -1),
    ExtensionFamily.H4_A2: Quadruplet(-1, 0, -7, 4),
    ExtensionFamily.H4_A3: Quadruplet(-2, 1, -2, 1),
    ExtensionFamily.H4_A4: Quadruplet(-2, 1, -2, 1),
}

FIVE_FOLD_FIRST_SERIES_BASE = Quadruplet(-3, 1, -1, 0)

GAMMA_PRESETS: dict[str, tuple[Fraction, ...]] = {
    "2fold": (Fraction(1, 2), Fraction(1), Fraction(3, 2)),
    "3fold": (Fraction(1, 4), Fraction(3, 4), Fraction(1)),
    "5fold": (Fraction(1), Fraction(2)),
}


@dataclass(frozen=True)
class LengthPreset:
    name: str
    family: ExtensionFamily
    gamma: Fraction
    k_range: tuple[int, int]


LENGTH_PRESETS: tuple[LengthPreset, ...] = (
    LengthPreset("2fold-gamma-1", ExtensionFamily.H3_2FOLD, Fraction(1), (-2, 2)),
    LengthPreset("2fold-gamma-1/2", ExtensionFamily.H3_2FOLD, Fraction(1, 2), (-3, 3)),
    LengthPreset("2fold-gamma-3/2", ExtensionFamily.H3_2FOLD, Fraction(3, 2), (-1, 1)),
    LengthPreset("3fold-gamma-1/4", ExtensionFamily.H3_3FOLD, Fraction(1, 4), (-1, 1)),
    LengthPreset("3fold-gamma-3/4", ExtensionFamily.H3_3FOLD, Fraction(3, 4), (-1, 1)),
    LengthPreset("3fold-gamma-1", ExtensionFamily.H3_3FOLD, Fraction(1), (-2, 0)),
    LengthPreset("5fold-gamma-1", ExtensionFamily.H3_5FOLD, Fraction(1), (-2, 1)),
    LengthPreset("5fold-gamma-2", ExtensionFamily.H3_5FOLD, Fraction(2), (-1, 0)),
)


def multipliers_for(family_id: "ExtensionFamily | str", base: Quadruplet, gamma) -> tuple[Fraction, Fraction]:
    """给定 γ，求使 γδ·(a+bτ)(c+dτ) = c 成立的 δ"""
    fam = ExtensionFamily(family_id)
    gamma_f = Fraction(gamma)
    if gamma_f == 0:
        raise ExtensionError("γ 不能为零")
    ratio = constraint_constant(fam) / (base.x_integer * base.y_integer)
    if not ratio.is_rational():
        raise ExtensionError(f"基解 {base} 的整数部分乘积与 {fam.value} 的约束只差一个无理因子")
    return gamma_f, ratio.a / gamma_f


def enumerate_family(
    family_id: "ExtensionFamily | str",
    k_range: tuple[int, int],
    gamma=1,
    base: Quadruplet | None = None,
) -> list[tuple[FamilyMember, ExtendedCartan]]:
    """生成族成员对应的扩展矩阵（全部 det = 0）"""
    fam = ExtensionFamily(family_id)
    info = FAMILY_INFO[fam]
    base_q = base or DEFAULT_BASES[fam]
    gamma_f, delta_f = multipliers_for(fam, base_q, gamma)
    fib = family(base_q.with_multipliers(gamma_f, delta_f), k_range)
    result = []
    for member in fib.members:
        ext = extend(ExtensionSpec(info.group, fam, member.x, member.y))
        result.append((member, ext))
    logger.info("族 %s 生成 %d 个扩展矩阵 (γ=%s)", fam.value, len(result), gamma_f)
    return result


# ========== 业务函数：长度分类 ==========
_SERIES_NORMALIZERS: dict[str, tuple[tuple[str, GoldenRational], ...]] = {
    "2fold": (("unit", ONE),),
    "3fold": (("sqrt3/2", GoldenRational(Fraction(3, 4))),),
    # 第二列 √(5/(4(3−τ))) = √(2+τ)/2 先试；第一列 √(5/4(3−τ)) 依赖 (3−τ)(2+τ)=5
    "5fold": (
        ("sqrt(2+t)/2", GoldenRational(2, 1) * Fraction(1, 4)),
        ("sqrt(5/4(3-t))", GoldenRational(3, -1) * Fraction(5, 4)),
    ),
    "bisector": (("sqrt(3-t)", GoldenRational(3, -1)),),
    "raw": (),
}


def _decompose(value: GoldenRational) -> tuple[Fraction, int] | None:
    """value = ρ²·τ^{2k}，ρ 为正有理数"""
    found = rational_tau_decomposition(value, settings.TAU_EXPONENT_LIMIT)
    if found is None:
        return None
    scalar, exponent = found
    if exponent % 2 or scalar <= 0:
        return None
    root = GoldenRational(scalar).sqrt()
    if root is None or not root.is_rational():
        return None
    return root.a, exponent // 2


def classify_length(q: Quadruplet, family_id: "ExtensionFamily | str") -> LengthClass:
    fam = ExtensionFamily(family_id)
    info = FAMILY_INFO[fam]
    length2, _ = root_geometry(q.x, q.y)
    solves = q.product == constraint_constant(fam)
    coefficient = None
    if info.axis_norm2 is not None:
        coefficient = (length2 / info.axis_norm2).sqrt()
    for series, normalizer in _SERIES_NORMALIZERS[info.axis]:
        decomposition = _decompose(length2 / normalizer)
        if decomposition is None:
            continue
        rho, k = decomposition
        return LengthClass(
            family=fam,
            length2=length2,
            series=series,
            rho=rho,
            k=k,
            length=length2.sqrt(),
            coefficient=coefficient,
            solves_constraint=solves,
        )
    logger.warning("长度无法分类，仅给出长度²: %s (%s)", length2.to_text(), fam.value)
    return LengthClass(
        family=fam, length2=length2, series="raw", length=length2.sqrt(),
        coefficient=coefficient, solves_constraint=solves,
    )


def translation_coefficient(family_id: "ExtensionFamily | str", q: Quadruplet) -> GoldenRational | None:
    """α_0 = λ·T_axis 中的 λ（不在 Q[τ] 中时为 None）"""
    return classify_length(q, family_id).coefficient


def length_series(
    family_id: "ExtensionFamily | str",
    gamma,
    k_range: tuple[int, int],
    base: Quadruplet | None = None,
) -> list[LengthClass]:
    fam = ExtensionFamily(family_id)
    return [classify_length(member.quadruplet, fam) for member, _ in enumerate_family(fam, k_range, gamma, base)]


def preset_series(name: str) -> list[LengthClass]:
    preset = next((p for p in LENGTH_PRESETS if p.name == name), None)
    if preset is None:
        raise ExtensionError(f"未知的长度预设：{name}（可选：{', '.join(p.name for p in LENGTH_PRESETS)}）")
    return length_series(preset.family, preset.gamma, preset.k_range)


def sqrt5_folded_coefficient(g, k: int) -> GoldenRational:
    """
    乘子 γ = g/√5 的 5 次轴平移系数：g/(2√5)·τ^k = g·(1/10)(2+τ)·τ^{k−1}
    平方恰为 g²τ^{2k}/20
    """
    return GoldenRational(2, 1) * Fraction(g) * Fraction(1, 10) * tau_pow(k - 1)


# ========== 业务函数：对称化 ==========
def symmetrize(matrix: "ExtendedCartan | GMatrix") -> Symmetrisation:
    """
    求正对角阵 D 使 S = A·D 对称：A_ij d_j = A_ji d_i
    从下标 1 出发传播比值（基根上 d = 1），环上不一致或 D 非正时不可对称化
    """
    m = matrix.entries if isinstance(matrix, ExtendedCartan) else matrix
    n = m.rows
    if not m.is_square:
        return Symmetrisation(False, witness=f"非方阵 {m.shape}")
    d: list[GoldenRational | None] = [None] * n
    order = list(range(1, n)) + [0]
    for start in order:
        if d[start] is not None:
            continue
        d[start] = ONE
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if j == i or m[i, j].is_zero:
                    continue
                if m[j, i].is_zero:
                    return Symmetrisation(False, witness=f"A[{i},{j}] 非零但 A[{j},{i}] 为零")
                candidate = m[j, i] * d[i] / m[i, j]
                if d[j] is None:
                    d[j] = candidate
                    queue.append(j)
                elif d[j] != candidate:
                    logger.warning("对称化失败：d[%d] 比值在环上不一致", j)
                    return Symmetrisation(
                        False, witness=f"d[{j}] 不一致：{d[j].to_text()} vs {candidate.to_text()}"
                    )
    if any(v.sign() <= 0 for v in d):
        return Symmetrisation(False, witness="D 含非正元素：" + ", ".join(v.to_text() for v in d))
    diagonal = GMatrix.diagonal(d)
    symmetric = m @ diagonal
    if not symmetric.is_symmetric():
        return Symmetrisation(False, d=diagonal, s=symmetric, witness="A·D 不对称")
    return Symmetrisation(
        True, d=diagonal, s=symmetric, positive_semidefinite=is_positive_semidefinite(symmetric)
    )


def coxeter_corner_root(family_id: "ExtensionFamily | str") -> CornerRoot:
    """
    角元 S_00 = 2·d_0 = 2x²/c，令其为 2 得 x² = c，取负根
    """
    fam = ExtensionFamily(family_id)
    if fam not in (ExtensionFamily.H3_2FOLD, ExtensionFamily.H3_3FOLD, ExtensionFamily.H3_5FOLD):
        raise ExtensionError(f"coxeter_corner_root 只支持 H3 的三个轴族，得到 {fam.value}")
    x_squared = constraint_constant(fam)
    root = x_squared.sqrt()
    note = None
    if fam == ExtensionFamily.H3_5FOLD:
        note = "x² = (4/5)(3−τ)；写作 √(4/5)(τ−3) 时根号内为负，按 3−τ 处理"
    if root is None:
        logger.warning("%s 的角元根不在 Q[τ] 中，只返回 x² = %s", fam.value, x_squared.to_text())
        return CornerRoot(fam, x_squared, None, False, note)
    return CornerRoot(fam, x_squared, -root, True, note)


def verify_matrix(matrix: GMatrix, allow_rational: bool = False) -> dict:
    """规则 1–4 + 比值一致性 + 对称化，汇总成一个结果字典"""
    rules = check_km_rules(matrix, allow_rational=allow_rational)
    consistency = consistency_check(matrix)
    symmetrisation = symmetrize(matrix)
    logger.info(
        "矩阵校验: 规则 %s, 一致性 %s, 可对称化 %s",
        rules.passed, consistency.passed, symmetrisation.symmetrisable,
    )
    return {
        "passed": rules.passed and consistency.passed and symmetrisation.symmetrisable,
        "rules": rules.to_dict(),
        "consistency": consistency.to_dict(),
        "symmetrisation": symmetrisation.to_dict(),
    }
