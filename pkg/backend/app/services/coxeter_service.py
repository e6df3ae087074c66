"""
非晶体 Coxeter 群 H2 / H3 / H4 服务（单根基坐标 + Gram 双线性型）
- Cartan 矩阵、Gram 矩阵（单位根长约定 (α,α)=1）
- 单反射、群闭包（BFS + 规范序列化去重）、根系、最高根
- Kac-Moody 型扩展规则 1–4 检查
"""
from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from app.services.golden_service import (
    ONE,
    TAU,
    ZERO,
    GMatrix,
    GoldenRational,
    Vector,
    det,
    dot,
    is_positive_definite,
    vkey,
)

logger = logging.getLogger(__name__)


class CoxeterError(ValueError):
    """Coxeter 群相关参数错误（群名未知、反射下标越界等）"""


class GroupId(str, Enum):
    H2 = "H2"
    H3 = "H3"
    H4 = "H4"

    @property
    def rank(self) -> int:
        return int(self.value[1])

    @classmethod
    def parse(cls, value: "str | GroupId") -> "GroupId":
        if isinstance(value, GroupId):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError as e:
            raise CoxeterError(f"未知的群：{value}（支持 h2/h3/h4）") from e


# 相邻单根之间的 Cartan 元素（链状 Dynkin 图）
_CHAIN_LINKS: dict[GroupId, tuple[GoldenRational, ...]] = {
    GroupId.H2: (-TAU,),
    GroupId.H3: (-ONE, -TAU),
    GroupId.H4: (-ONE, -ONE, -TAU),
}


# ========== 数据模型 ==========
@dataclass(frozen=True)
class CartanMatrix:
    group: GroupId
    entries: GMatrix

    @property
    def rank(self) -> int:
        return self.entries.rows

    def det(self) -> GoldenRational:
        return det(self.entries)


@dataclass(frozen=True)
class RootVector:
    """单根基下的根坐标"""
    coords: Vector

    def __neg__(self) -> "RootVector":
        return RootVector(tuple(-c for c in self.coords))

    @property
    def key(self) -> tuple:
        return vkey(self.coords)

    def is_positive(self) -> bool:
        return all(c.sign() >= 0 for c in self.coords) and any(not c.is_zero for c in self.coords)

    def length2(self, gram: GMatrix) -> GoldenRational:
        return dot(self.coords, self.coords, gram)

    def height(self) -> float:
        return sum(c.embed() for c in self.coords)


@dataclass(frozen=True)
class GroupElement:
    """作用在单根基坐标上的群元素"""
    matrix: GMatrix

    @property
    def key(self) -> tuple:
        return self.matrix.key

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix)

    def apply(self, vector: Sequence[GoldenRational]) -> Vector:
        return self.matrix.apply(vector)

    def det(self) -> GoldenRational:
        return det(self.matrix)

    def preserves(self, gram: GMatrix) -> bool:
        return self.matrix.transpose() @ gram @ self.matrix == gram


@dataclass
class RuleResult:
    rule: int
    name: str
    passed: bool
    witness: str | None = None


@dataclass
class RuleReport:
    """Kac-Moody 型扩展规则 1–4 的检查结果"""
    rules: list[RuleResult] = field(default_factory=list)
    relaxed: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rules)

    def rule(self, number: int) -> RuleResult:
        return next(r for r in self.rules if r.rule == number)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "relaxed": self.relaxed,
            "rules": [
                {"rule": r.rule, "name": r.name, "passed": r.passed, "witness": r.witness} for r in self.rules
            ],
        }


# ========== 业务函数：Cartan / Gram ==========
def cartan_matrix(group: "GroupId | str") -> CartanMatrix:
    g = GroupId.parse(group)
    n = g.rank
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = GoldenRational(2)
    for i, link in enumerate(_CHAIN_LINKS[g]):
        rows[i][i + 1] = link
        rows[i + 1][i] = link
    return CartanMatrix(group=g, entries=GMatrix(rows))


def gram_matrix(cartan: CartanMatrix) -> GMatrix:
    """单位根长约定下 B = A/2，并精确校验正定"""
    gram = cartan.entries * Fraction(1, 2)
    if not is_positive_definite(gram):
        raise CoxeterError(f"{cartan.group.value} 的 Gram 矩阵不是正定的")
    return gram


@lru_cache(maxsize=None)
def _gram_for(group: GroupId) -> GMatrix:
    return gram_matrix(cartan_matrix(group))


def simple_reflection(group: "GroupId | str", i: int) -> GroupElement:
    """r_i(v) = v − (Σ_j A_ij v_j) α_i（i 从 1 开始）"""
    g = GroupId.parse(group)
    if not 1 <= i <= g.rank:
        raise CoxeterError(f"反射下标 {i} 超出范围 1..{g.rank}")
    cartan = cartan_matrix(g).entries
    n = g.rank
    k = i - 1
    rows = [[ONE if r == c else ZERO for c in range(n)] for r in range(n)]
    rows[k] = [(ONE if c == k else ZERO) - cartan[k, c] for c in range(n)]
    return GroupElement(GMatrix(rows))


# ========== 群闭包 ==========
def close_group(
    generators: Sequence[GMatrix],
    multiply: Callable[[int, GMatrix], GMatrix] | None = None,
) -> list[GMatrix]:
    """
    生成元集合在乘法下的闭包（广度优先，精确去重）
    multiply(i, M) 默认为 generators[i] @ M；调用方可提供更快的左乘实现
    返回值按规范序列化字典序排序
    """
    if not generators:
        raise CoxeterError("生成元集合为空")
    left_mul = multiply or (lambda idx, m: generators[idx] @ m)
    identity = GMatrix.identity(generators[0].rows)
    seen: dict[tuple, GMatrix] = {identity.key: identity}
    queue: deque[GMatrix] = deque([identity])
    while queue:
        current = queue.popleft()
        for idx in range(len(generators)):
            product = left_mul(idx, current)
            product_key = product.key
            if product_key not in seen:
                seen[product_key] = product
                queue.append(product)
    return [seen[k] for k in sorted(seen)]


def _chain_left_multiplier(group: GroupId) -> Callable[[int, GMatrix], GMatrix]:
    """r_i 只改变第 i 行：新行 = 行_i − Σ_j A_ij 行_j"""
    cartan = cartan_matrix(group).entries
    n = group.rank
    neighbours = [[(j, cartan[i, j]) for j in range(n) if j != i and not cartan[i, j].is_zero] for i in range(n)]

    def multiply(idx: int, matrix: GMatrix) -> GMatrix:
        rows = list(matrix.entries)
        new_row = [-v for v in rows[idx]]
        for j, coefficient in neighbours[idx]:
            new_row = [x - coefficient * y for x, y in zip(new_row, rows[j])]
        rows[idx] = tuple(new_row)
        return GMatrix(rows)

    return multiply


@lru_cache(maxsize=None)
def _group_matrices(group: GroupId, order: tuple[int, ...]) -> tuple[GMatrix, ...]:
    start = time.perf_counter()
    generators = [simple_reflection(group, i).matrix for i in order]
    fast = _chain_left_multiplier(group)
    elements = close_group(generators, multiply=lambda idx, m: fast(order[idx] - 1, m))
    logger.info(
        "群闭包完成: %s, 阶 %d, 耗时 %.2fs", group.value, len(elements), time.perf_counter() - start
    )
    return tuple(elements)


def generate_group(group: "GroupId | str", generator_order: Sequence[int] | None = None) -> list[GroupElement]:
    """由单反射生成整个群，输出按规范序列化排序（与生成元顺序无关）"""
    g = GroupId.parse(group)
    order = tuple(generator_order) if generator_order else tuple(range(1, g.rank + 1))
    if sorted(order) != list(range(1, g.rank + 1)):
        raise CoxeterError(f"生成元顺序必须是 1..{g.rank} 的排列：{order}")
    return [GroupElement(m) for m in _group_matrices(g, order)]


def rotation_subgroup(group: "GroupId | str") -> list[GroupElement]:
    """行列式为 +1 的元素（旋转子群）"""
    return [e for e in generate_group(group) if e.det() == ONE]


# ========== 根系 ==========
def _simple_roots(group: GroupId) -> list[Vector]:
    n = group.rank
    return [tuple(ONE if c == i else ZERO for c in range(n)) for i in range(n)]


@lru_cache(maxsize=None)
def _root_vectors(group: GroupId) -> tuple[RootVector, ...]:
    reflections = [simple_reflection(group, i) for i in range(1, group.rank + 1)]
    seen: dict[tuple, Vector] = {}
    queue: deque[Vector] = deque()
    for root in _simple_roots(group):
        seen[vkey(root)] = root
        queue.append(root)
    while queue:
        current = queue.popleft()
        for reflection in reflections:
            image = reflection.apply(current)
            image_key = vkey(image)
            if image_key not in seen:
                seen[image_key] = image
                queue.append(image)
    roots = tuple(RootVector(seen[k]) for k in sorted(seen))
    logger.info("根系生成完成: %s, 根数 %d", group.value, len(roots))
    return roots


def root_system(group: "GroupId | str") -> list[RootVector]:
    """单根在群作用下的轨道（单反射生成的轨道与整群轨道一致）"""
    return list(_root_vectors(GroupId.parse(group)))


def positive_roots(group: "GroupId | str") -> list[RootVector]:
    return [r for r in root_system(group) if r.is_positive()]


def _dominates(upper: RootVector, lower: RootVector) -> bool:
    return all((u - l).sign() >= 0 for u, l in zip(upper.coords, lower.coords))


def highest_root(group: "GroupId | str") -> RootVector:
    """逐坐标支配所有正根的那个正根"""
    g = GroupId.parse(group)
    positives = positive_roots(g)
    dominant = [r for r in positives if all(_dominates(r, other) for other in positives)]
    if len(dominant) == 1:
        return dominant[0]
    # 不存在唯一支配根时退回到高度最大的正根
    fallback = max(positives, key=lambda r: r.height())
    logger.warning("%s 没有唯一的逐坐标最大正根，改用高度最大的根 %s", g.value, fallback.coords)
    return fallback


# ========== Kac-Moody 型扩展规则 ==========
def check_km_rules(matrix: GMatrix, allow_rational: bool = False) -> RuleReport:
    """
    规则 1：A_ii = 2
    规则 2：A_ij ≤ 0，且 A_ij = 0 ⇔ A_ji = 0
    规则 3：元素属于 Z[τ]（allow_rational=True 时放宽到 Q[τ]，仍报告非整元素）
    规则 4：det A = 0
    """
    report = RuleReport(relaxed=allow_rational)
    if not matrix.is_square:
        report.rules.append(RuleResult(0, "square", False, f"shape={matrix.shape}"))
        return report
    n = matrix.rows

    bad_diagonal = [i for i in range(n) if matrix[i, i] != 2]
    report.rules.append(
        RuleResult(
            1, "A_ii = 2", not bad_diagonal,
            None if not bad_diagonal else f"A[{bad_diagonal[0]},{bad_diagonal[0]}]={matrix[bad_diagonal[0], bad_diagonal[0]].to_text()}",
        )
    )

    witness = None
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if matrix[i, j].sign() > 0:
                witness = f"A[{i},{j}]={matrix[i, j].to_text()} > 0"
                break
            if matrix[i, j].is_zero != matrix[j, i].is_zero:
                witness = f"A[{i},{j}]={matrix[i, j].to_text()}, A[{j},{i}]={matrix[j, i].to_text()}"
                break
        if witness:
            break
    report.rules.append(RuleResult(2, "A_ij <= 0 and A_ij = 0 <=> A_ji = 0", witness is None, witness))

    non_integral = [(i, j) for i in range(n) for j in range(n) if not matrix[i, j].is_zt_integer()]
    integral_witness = None
    if non_integral:
        i, j = non_integral[0]
        integral_witness = f"A[{i},{j}]={matrix[i, j].to_text()} 不属于 Z[τ]"
    report.rules.append(RuleResult(3, "Z[tau]-valued", allow_rational or not non_integral, integral_witness))

    determinant = det(matrix)
    report.rules.append(
        RuleResult(4, "det A = 0", determinant.is_zero, None if determinant.is_zero else f"det={determinant.to_text()}")
    )
    logger.debug("check_km_rules: %s", report.to_dict())
    return report


def gram_for(group: "GroupId | str") -> GMatrix:
    return _gram_for(GroupId.parse(group))


def roots_as_rows(roots: Iterable[RootVector]) -> list[list[str]]:
    return [[c.to_text() for c in r.coords] for r in roots]


def group_summary(group: "GroupId | str", include_elements: bool = False) -> dict:
    """群阶、旋转子群阶、根数与最高根（供接口、任务和 CLI 共用）"""
    g = GroupId.parse(group)
    elements = generate_group(g)
    roots = root_system(g)
    summary = {
        "group": g.value,
        "order": len(elements),
        "rotation_order": sum(1 for e in elements if e.det() == ONE),
        "root_count": len(roots),
        "positive_root_count": len(positive_roots(g)),
        "highest_root": [c.to_json() for c in highest_root(g).coords],
        "preserves_gram": all(e.preserves(gram_for(g)) for e in elements),
    }
    if include_elements:
        summary["elements"] = [e.matrix.to_json() for e in elements]
    return summary
