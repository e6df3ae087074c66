"""
JSON 文档与请求模型
GoldenRational 在 JSON 中写作 {"a": "p/q", "b": "r/s"}，也接受文本语法 "2-1t"
"""
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

from app.services.golden_service import GMatrix, GoldenParseError, GoldenRational


class GoldenValue(BaseModel):
    a: str = "0"
    b: str = "0"

    @classmethod
    def from_golden(cls, value: GoldenRational) -> "GoldenValue":
        return cls(**value.to_json())

    def to_golden(self) -> GoldenRational:
        return GoldenRational.from_json({"a": self.a, "b": self.b})


GoldenInput = Union[GoldenValue, str, int]


def _golden(value: GoldenInput) -> GoldenRational:
    if isinstance(value, GoldenValue):
        return value.to_golden()
    return GoldenRational.from_json(value)


# ========== 矩阵文档（enumerate 输出 / verify 输入） ==========
class MatrixDocument(BaseModel):
    group: Optional[str] = None
    family: Optional[str] = None
    k: Optional[int] = None
    x: Optional[GoldenInput] = None
    y: Optional[GoldenInput] = None
    entries: list[list[GoldenInput]]
    allow_rational: bool = False

    @field_validator("entries")
    @classmethod
    def _check_square(cls, rows):
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("entries 必须是非空方阵")
        return rows

    def to_matrix(self) -> GMatrix:
        try:
            return GMatrix([[_golden(v) for v in row] for row in self.entries])
        except GoldenParseError as e:
            raise ValueError(f"矩阵元素无法解析：{e}") from e


# ========== 请求模型 ==========
class ParseRequest(BaseModel):
    text: str


class SolveRequest(BaseModel):
    target: str
    gamma: str = "1"
    delta: str = "1"
    bound: Optional[int] = Field(default=None, ge=1, le=60)


class EnumerateRequest(BaseModel):
    group: str = "h3"
    axis: str = "2fold"
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    gamma: Optional[str] = None


class LengthsRequest(BaseModel):
    group: str = "h3"
    axis: str = "2fold"
    gamma: Optional[str] = None
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    preset: Optional[str] = None


class ArrayRequest(BaseModel):
    seed: str = "pentagon"
    axis: str = "highest"
    lengths: list[str] = Field(default_factory=lambda: ["1"])
    convention: str = "rotation"
