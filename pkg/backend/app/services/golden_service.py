"""
Q[τ] 精确算术服务
- GoldenRational：a + bτ（a、b 为有理数，τ² = τ + 1）
- GMatrix：元素为 GoldenRational 的稠密矩阵（乘法、行列式、主子式）
- 向量工具：内积（可带 Gram 矩阵）、加减、数乘
所有值不可变，运算结果始终为规范形式（分数约分、分母为正）
"""
from __future__ import annotations

import logging
import math
import re
from fractions import Fraction
from functools import lru_cache, reduce, total_ordering
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

TAU_FLOAT = (1 + math.sqrt(5)) / 2
SIGMA_FLOAT = (1 - math.sqrt(5)) / 2


# ========== 自定义异常 ==========
class GoldenArithmeticError(ValueError):
    """Q[τ] 运算异常基类"""


class GoldenDivisionError(GoldenArithmeticError, ZeroDivisionError):
    """除数为零"""


class GoldenParseError(GoldenArithmeticError):
    """黄金比有理数文本/JSON 解析失败"""


class ShapeMismatchError(GoldenArithmeticError):
    """矩阵形状不匹配（非方阵求行列式、乘法维度不一致等）"""


def _to_fraction(value) -> Fraction:
    if type(value) is Fraction:
        return value
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise GoldenParseError(f"无法解析有理数：{value!r}") from e
    raise TypeError(f"不支持的有理数类型：{type(value).__name__}")


def _fraction_sqrt(value: Fraction) -> Fraction | None:
    """有理数的精确平方根，不是完全平方时返回 None"""
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root != value.numerator or den_root * den_root != value.denominator:
        return None
    return Fraction(num_root, den_root)


def _sign_with_sqrt5(p: Fraction, q: Fraction) -> int:
    """p + q·√5 的精确符号（平方比较，不用浮点）"""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    # 异号：比较 p² 与 5q²，两者不可能相等
    diff = p * p - 5 * q * q
    if p > 0:
        return 1 if diff > 0 else -1
    return 1 if diff < 0 else -1


@total_ordering
class GoldenRational:
    """Q[τ] 中的元素 a + bτ，按第一嵌入 τ ↦ (1+√5)/2 定序"""

    def __init__(self, a=0, b=0) -> None:
        self._a: Fraction = _to_fraction(a)
        self._b: Fraction = _to_fraction(b)

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def key(self) -> tuple[Fraction, Fraction]:
        return (self._a, self._b)

    @classmethod
    def from_int(cls, value: int) -> GoldenRational:
        return cls(value, 0)

    def __repr__(self) -> str:
        return f"GoldenRational({self._a}, {self._b})"

    def __str__(self) -> str:
        if self._b == 0:
            return str(self._a)
        sign = "+" if self._b > 0 else "-"
        return f"{self._a}{sign}{abs(self._b)}τ"

    # ========== 比较与哈希 ==========
    def __eq__(self, other: object) -> bool:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return self._a == other_g.a and self._b == other_g.b

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b))

    def __lt__(self, other: object) -> bool:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return (self - other_g).sign() < 0

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    @property
    def is_zero(self) -> bool:
        return self._a == 0 and self._b == 0

    # ========== 环运算 ==========
    def __add__(self, other) -> GoldenRational:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return GoldenRational(self._a + other_g.a, self._b + other_g.b)

    def __radd__(self, other) -> GoldenRational:
        return self + other

    def __sub__(self, other) -> GoldenRational:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return GoldenRational(self._a - other_g.a, self._b - other_g.b)

    def __rsub__(self, other) -> GoldenRational:
        return (-self) + other

    def __neg__(self) -> GoldenRational:
        return GoldenRational(-self._a, -self._b)

    def __pos__(self) -> GoldenRational:
        return self

    def __mul__(self, other) -> GoldenRational:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        # (a+bτ)(c+dτ) = (ac+bd) + (ad+bc+bd)τ
        a, b, c, d = self._a, self._b, other_g.a, other_g.b
        bd = b * d
        return GoldenRational(a * c + bd, a * d + b * c + bd)

    def __rmul__(self, other) -> GoldenRational:
        return self * other

    def inverse(self) -> GoldenRational:
        n = self.norm()
        if n == 0:
            raise GoldenDivisionError("Q[τ] 中除数为零")
        conj = self.conjugate()
        return GoldenRational(conj.a / n, conj.b / n)

    def __truediv__(self, other) -> GoldenRational:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return self * other_g.inverse()

    def __rtruediv__(self, other) -> GoldenRational:
        other_g = _coerce(other)
        if other_g is None:
            return NotImplemented
        return other_g * self.inverse()

    def __pow__(self, exponent: int) -> GoldenRational:
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = ONE
        base = self
        n = exponent
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ========== 共轭、范数、迹 ==========
    def conjugate(self) -> GoldenRational:
        """Galois 共轭 τ ↦ σ = 1 − τ"""
        return GoldenRational(self._a + self._b, -self._b)

    def norm(self) -> Fraction:
        """域范数 x·x′ = a² + ab − b²"""
        return self._a * self._a + self._a * self._b - self._b * self._b

    def trace(self) -> Fraction:
        """x + x′ = 2a + b"""
        return 2 * self._a + self._b

    # ========== 整性与单位 ==========
    def is_rational(self) -> bool:
        return self._b == 0

    def is_zt_integer(self) -> bool:
        return self._a.denominator == 1 and self._b.denominator == 1

    def is_unit(self) -> bool:
        return self.is_zt_integer() and abs(self.norm()) == 1

    # ========== 符号与嵌入 ==========
    def sign(self) -> int:
        """第一嵌入下的精确符号：2x = (2a+b) + b√5"""
        return _sign_with_sqrt5(2 * self._a + self._b, self._b)

    def conjugate_sign(self) -> int:
        return self.conjugate().sign()

    def embed(self) -> float:
        return float(self._a) + float(self._b) * TAU_FLOAT

    def conjugate_embed(self) -> float:
        return float(self._a) + float(self._b) * SIGMA_FLOAT

    def __float__(self) -> float:
        return self.embed()

    def __abs__(self) -> GoldenRational:
        return -self if self.sign() < 0 else self

    def sqrt(self) -> GoldenRational | None:
        """Q[τ] 内的精确平方根（取第一嵌入为正的那个），不存在时返回 None"""
        if self.is_zero:
            return ZERO
        if self.sign() < 0 or self.conjugate_sign() < 0:
            return None
        n = _fraction_sqrt(self.norm())
        if n is None:
            return None
        trace = self.trace()
        for e in (1, -1):
            # r = p + qτ：(r + r′)² = tr + 2N(r)，(r − r′)² = 5q² = tr − 2N(r)
            t = _fraction_sqrt(trace + 2 * e * n)
            q = _fraction_sqrt((trace - 2 * e * n) / 5)
            if t is None or q is None:
                continue
            for qq in (q, -q):
                candidate = GoldenRational((t - qq) / 2, qq)
                if candidate * candidate == self:
                    return candidate if candidate.sign() > 0 else -candidate
        return None

    # ========== 序列化 ==========
    def to_text(self) -> str:
        """文本语法 INT[/INT][(+|-)INT[/INT]t]"""
        if self._b == 0:
            return str(self._a)
        sign = "+" if self._b > 0 else "-"
        return f"{self._a}{sign}{abs(self._b)}t"

    def to_json(self) -> dict:
        return {"a": str(self._a), "b": str(self._b)}

    @classmethod
    def from_json(cls, data) -> GoldenRational:
        if isinstance(data, GoldenRational):
            return data
        if isinstance(data, dict):
            if "a" not in data or "b" not in data:
                raise GoldenParseError(f"JSON 对象缺少 a/b 字段：{data}")
            return cls(_to_fraction(str(data["a"])), _to_fraction(str(data["b"])))
        if isinstance(data, (int, Fraction)):
            return cls(data)
        if isinstance(data, str):
            return parse_golden(data)
        raise GoldenParseError(f"无法从 JSON 构造 GoldenRational：{data!r}")


Scalar = Union[int, Fraction, GoldenRational]

ZERO = GoldenRational(0, 0)
ONE = GoldenRational(1, 0)
TAU = GoldenRational(0, 1)
SIGMA = GoldenRational(1, -1)
TAU_INV = GoldenRational(-1, 1)


def _coerce(value) -> GoldenRational | None:
    if isinstance(value, GoldenRational):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return GoldenRational(value, 0)
    return None


def as_golden(value) -> GoldenRational:
    """把 int / Fraction / 文本 / JSON 对象统一转成 GoldenRational"""
    if isinstance(value, GoldenRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GoldenRational(value, 0)
    if isinstance(value, str):
        return parse_golden(value)
    if isinstance(value, dict):
        return GoldenRational.from_json(value)
    raise TypeError(f"不支持的标量类型：{type(value).__name__}")


# ========== 业务函数：τ 的幂与环运算 ==========
@lru_cache(maxsize=None)
def tau_pow(k: int) -> GoldenRational:
    """τ^k，τ^{-1} = τ − 1"""
    base = TAU if k >= 0 else TAU_INV
    return base ** abs(k)


def ring_op(op: str, x: Scalar, y: Scalar) -> GoldenRational:
    """按名称执行二元运算（add/sub/mul/div），供 CLI 与接口复用"""
    x_g, y_g = as_golden(x), as_golden(y)
    if op == "add":
        return x_g + y_g
    if op == "sub":
        return x_g - y_g
    if op == "mul":
        return x_g * y_g
    if op == "div":
        return x_g / y_g
    raise GoldenArithmeticError(f"未知运算：{op}")


def rational_tau_decomposition(value: GoldenRational, limit: int = 128) -> tuple[Fraction, int] | None:
    """把 value 写成 r·τ^m（r 为有理数），找不到时返回 None"""
    if value.is_zero:
        return None
    for m in range(0, limit + 1):
        for exponent in ((m,) if m == 0 else (m, -m)):
            scaled = value * tau_pow(-exponent)
            if scaled.is_rational():
                return scaled.a, exponent
    return None


# ========== 文本解析 ==========
_NUMBER = r"\d+(?:/\d+)?"
_FULL_PATTERN = re.compile(rf"^(?P<a>[+-]?{_NUMBER})(?:(?P<sign>[+-])(?P<b>{_NUMBER})?\*?t)?$")
_TAU_ONLY_PATTERN = re.compile(rf"^(?P<sign>[+-]?)(?P<b>{_NUMBER})?\*?t$")
_TAU_POWER_PATTERN = re.compile(rf"^(?P<sign>[+-]?)(?:(?P<coef>{_NUMBER})\*?)?t\^\(?(?P<k>[+-]?\d+)\)?$")


def parse_golden(text: str) -> GoldenRational:
    """
    解析黄金比有理数文本，支持：
    "2-1t"、"3-t"、"-1/2+3/4t"、"t"、"1/2t"、"tau^-2"、"1/2*tau^3"（τ、tau、t 等价）
    """
    if not isinstance(text, str):
        raise GoldenParseError(f"期望字符串，得到 {type(text).__name__}")
    normalized = (
        text.strip().lower()
        .replace(" ", "")
        .replace("−", "-")
        .replace("τ", "t")
        .replace("tau", "t")
        .replace("**", "^")
    )
    if not normalized:
        raise GoldenParseError("空字符串无法解析")
    try:
        return _parse_normalized(normalized)
    except ZeroDivisionError as e:
        raise GoldenParseError(f"分母为零：{text!r}") from e


def _parse_normalized(normalized: str) -> GoldenRational:
    match = _TAU_POWER_PATTERN.match(normalized)
    if match:
        coef = Fraction(match.group("coef")) if match.group("coef") else Fraction(1)
        if match.group("sign") == "-":
            coef = -coef
        return tau_pow(int(match.group("k"))) * coef

    match = _FULL_PATTERN.match(normalized)
    if match:
        a = Fraction(match.group("a"))
        if match.group("sign") is None:
            return GoldenRational(a, 0)
        b = Fraction(match.group("b")) if match.group("b") else Fraction(1)
        return GoldenRational(a, b if match.group("sign") == "+" else -b)

    match = _TAU_ONLY_PATTERN.match(normalized)
    if match:
        b = Fraction(match.group("b")) if match.group("b") else Fraction(1)
        return GoldenRational(0, -b if match.group("sign") == "-" else b)

    logger.debug("parse_golden 失败: %s", normalized)
    raise GoldenParseError(f"无法解析黄金比有理数：{normalized!r}（语法：INT[/INT][(+|-)INT[/INT]t] 或 tau^k）")


# ========== 矩阵 ==========
class GMatrix:
    """元素为 GoldenRational 的矩形矩阵（行优先存储，不可变）"""

    def __init__(self, rows: Iterable[Iterable]) -> None:
        entries = tuple(tuple(as_golden(v) for v in row) for row in rows)
        widths = {len(row) for row in entries}
        if len(widths) > 1:
            raise ShapeMismatchError(f"矩阵各行长度不一致：{sorted(widths)}")
        self._entries = entries
        self._rows = len(entries)
        self._cols = widths.pop() if widths else 0

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def entries(self) -> tuple[tuple[GoldenRational, ...], ...]:
        return self._entries

    @property
    def is_square(self) -> bool:
        return self._rows == self._cols

    @property
    def key(self) -> tuple:
        """规范序列化：逐元素 (a, b)，用于精确去重和排序"""
        return tuple(value.key for row in self._entries for value in row)

    @classmethod
    def identity(cls, n: int) -> GMatrix:
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> GMatrix:
        return cls([[ZERO] * cols for _ in range(rows)])

    @classmethod
    def diagonal(cls, values: Sequence) -> GMatrix:
        n = len(values)
        return cls([[values[i] if i == j else ZERO for j in range(n)] for i in range(n)])

    def __getitem__(self, index: tuple[int, int]) -> GoldenRational:
        i, j = index
        return self._entries[i][j]

    def row(self, i: int) -> tuple[GoldenRational, ...]:
        return self._entries[i]

    def column(self, j: int) -> tuple[GoldenRational, ...]:
        return tuple(row[j] for row in self._entries)

    def __repr__(self) -> str:
        return f"GMatrix({[[v.to_text() for v in row] for row in self._entries]})"

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(v) for v in row) + "]" for row in self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GMatrix):
            return NotImplemented
        return self._entries == other.entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def transpose(self) -> GMatrix:
        return GMatrix(zip(*self._entries)) if self._rows else GMatrix([])

    def __matmul__(self, other: GMatrix) -> GMatrix:
        return mat_mul(self, other)

    def __mul__(self, scalar) -> GMatrix:
        factor = _coerce(scalar)
        if factor is None:
            return NotImplemented
        return GMatrix([[v * factor for v in row] for row in self._entries])

    def __rmul__(self, scalar) -> GMatrix:
        return self * scalar

    def __add__(self, other: GMatrix) -> GMatrix:
        if not isinstance(other, GMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeMismatchError(f"矩阵加法形状不一致：{self.shape} vs {other.shape}")
        return GMatrix([[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(self._entries, other.entries)])

    def __sub__(self, other: GMatrix) -> GMatrix:
        if not isinstance(other, GMatrix):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> GMatrix:
        return GMatrix([[-v for v in row] for row in self._entries])

    def apply(self, vector: Sequence) -> tuple[GoldenRational, ...]:
        if len(vector) != self._cols:
            raise ShapeMismatchError(f"向量长度 {len(vector)} 与矩阵列数 {self._cols} 不一致")
        vec = [as_golden(v) for v in vector]
        return tuple(_sum_products(row, vec) for row in self._entries)

    def delete_index(self, k: int) -> GMatrix:
        """同时删去第 k 行和第 k 列"""
        return GMatrix(
            [[v for j, v in enumerate(row) if j != k] for i, row in enumerate(self._entries) if i != k]
        )

    def leading_block(self, k: int) -> GMatrix:
        return GMatrix([row[:k] for row in self._entries[:k]])

    def replace(self, updates: dict[tuple[int, int], Scalar]) -> GMatrix:
        rows = [list(row) for row in self._entries]
        for (i, j), value in updates.items():
            rows[i][j] = as_golden(value)
        return GMatrix(rows)

    def is_symmetric(self) -> bool:
        return self.is_square and all(
            self._entries[i][j] == self._entries[j][i] for i in range(self._rows) for j in range(i + 1, self._cols)
        )

    def det(self) -> GoldenRational:
        return det(self)

    def embed(self) -> np.ndarray:
        return np.array([[v.embed() for v in row] for row in self._entries], dtype=float)

    def to_json(self) -> list[list[dict]]:
        return [[v.to_json() for v in row] for row in self._entries]

    def to_text_rows(self) -> list[list[str]]:
        return [[v.to_text() for v in row] for row in self._entries]

    @classmethod
    def from_json(cls, data: Sequence[Sequence]) -> GMatrix:
        try:
            return cls([[GoldenRational.from_json(v) for v in row] for row in data])
        except TypeError as e:
            raise GoldenParseError(f"矩阵 JSON 结构无效：{e}") from e


def _sum_products(left: Sequence[GoldenRational], right: Sequence[GoldenRational]) -> GoldenRational:
    total = ZERO
    for x, y in zip(left, right):
        if x.is_zero or y.is_zero:
            continue
        total = total + x * y
    return total


def mat_mul(left: GMatrix, right: GMatrix) -> GMatrix:
    if left.cols != right.rows:
        raise ShapeMismatchError(f"矩阵乘法维度不一致：{left.shape} @ {right.shape}")
    right_cols = list(zip(*right.entries)) if right.rows else []
    return GMatrix([[_sum_products(row, col) for col in right_cols] for row in left.entries])


def det(matrix: GMatrix) -> GoldenRational:
    """Bareiss 无分数消元求精确行列式"""
    if not matrix.is_square:
        raise ShapeMismatchError(f"行列式要求方阵，得到 {matrix.shape}")
    n = matrix.rows
    if n == 0:
        return ONE
    a = [list(row) for row in matrix.entries]
    sign = 1
    previous = ONE
    for k in range(n - 1):
        if a[k][k].is_zero:
            pivot = next((i for i in range(k + 1, n) if not a[i][k].is_zero), None)
            if pivot is None:
                return ZERO
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / previous
        previous = a[k][k]
    result = a[n - 1][n - 1]
    return result if sign > 0 else -result


def cofactor_det(matrix: GMatrix) -> GoldenRational:
    """按第一行展开的代数余子式行列式（与 det 相互校验）"""
    if not matrix.is_square:
        raise ShapeMismatchError(f"行列式要求方阵，得到 {matrix.shape}")
    n = matrix.rows
    if n == 0:
        return ONE
    if n == 1:
        return matrix[0, 0]
    total = ZERO
    for j, value in enumerate(matrix.row(0)):
        if value.is_zero:
            continue
        minor = GMatrix([[v for c, v in enumerate(row) if c != j] for row in matrix.entries[1:]])
        term = value * cofactor_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def leading_minors(matrix: GMatrix) -> list[GoldenRational]:
    if not matrix.is_square:
        raise ShapeMismatchError(f"主子式要求方阵，得到 {matrix.shape}")
    return [det(matrix.leading_block(k)) for k in range(1, matrix.rows + 1)]


def is_positive_definite(matrix: GMatrix) -> bool:
    return all(m.sign() > 0 for m in leading_minors(matrix))


def principal_minors(matrix: GMatrix) -> list[GoldenRational]:
    """全部 2^n − 1 个主子式（按下标组合顺序）"""
    if not matrix.is_square:
        raise ShapeMismatchError(f"主子式要求方阵，得到 {matrix.shape}")
    n = matrix.rows
    minors = []
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            minors.append(det(GMatrix([[matrix[i, j] for j in idx] for i in idx])))
    return minors


def is_positive_semidefinite(matrix: GMatrix) -> bool:
    """
    顺序主子式全正时直接判定（正定）；否则退回到全部主子式非负的判定
    顺序主子式非负本身不够，例如 diag(0, −1)
    """
    if is_positive_definite(matrix):
        return True
    return all(m.sign() >= 0 for m in principal_minors(matrix))


# ========== 向量工具 ==========
Vector = tuple[GoldenRational, ...]


def vec(*values) -> Vector:
    return tuple(as_golden(v) for v in values)


def dot(u: Sequence[GoldenRational], v: Sequence[GoldenRational], gram: GMatrix | None = None) -> GoldenRational:
    if len(u) != len(v):
        raise ShapeMismatchError(f"向量长度不一致：{len(u)} vs {len(v)}")
    if gram is None:
        return _sum_products(u, v)
    return _sum_products(u, gram.apply(v))


def vadd(u: Sequence[GoldenRational], v: Sequence[GoldenRational]) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def vsub(u: Sequence[GoldenRational], v: Sequence[GoldenRational]) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def vscale(factor: Scalar, v: Sequence[GoldenRational]) -> Vector:
    f = as_golden(factor)
    return tuple(f * x for x in v)


def vneg(v: Sequence[GoldenRational]) -> Vector:
    return tuple(-x for x in v)


def vkey(v: Sequence[GoldenRational]) -> tuple:
    return tuple(x.key for x in v)


def vembed(v: Sequence[GoldenRational]) -> np.ndarray:
    return np.array([x.embed() for x in v], dtype=float)


def vsum(vectors: Iterable[Sequence[GoldenRational]], dim: int) -> Vector:
    return reduce(vadd, vectors, tuple(ZERO for _ in range(dim)))


def parse_rational(text) -> Fraction:
    """γ、δ 等有理参数：接受 "3/2"、"1" 或数字"""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    value = parse_golden(str(text))
    if not value.is_rational():
        raise GoldenParseError(f"期望有理数，得到 {value.to_text()}")
    return value.a
