"""Certificate trees, exponent sequences and decomposition outputs."""

from __future__ import annotations

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tsirelson.models.vectors import GridVector


class CertificateMode(str, Enum):
    """Successive pieces build K; pairwise disjoint pieces build K^M."""

    SUCCESSIVE = "successive"
    DISJOINT = "disjoint"


class CertificateNode(BaseModel):
    """Either ``leaf = (sign, index)`` or a list of child nodes."""

    model_config = ConfigDict(frozen=True)

    leaf: tuple[int, int] | None = None
    children: list[CertificateNode] | None = None

    @model_validator(mode="after")
    def _one_kind(self) -> CertificateNode:
        if (self.leaf is None) == (self.children is None):
            raise ValueError("a node is either a leaf or has children")
        if self.leaf is not None and self.leaf[0] not in (1, -1):
            raise ValueError("leaf sign must be +1 or -1")
        if self.children is not None and not self.children:
            raise ValueError("internal node needs at least one child")
        return self

    @classmethod
    def make_leaf(cls, sign: int, index: int) -> CertificateNode:
        return cls(leaf=(sign, index))

    @classmethod
    def make_internal(cls, children: list[CertificateNode]) -> CertificateNode:
        return cls(children=children)

    def wrapped(self, times: int) -> CertificateNode:
        """Apply the one-child rule ``times`` times (scales by ``t^{-times}``)."""
        node = self
        for _ in range(times):
            node = CertificateNode(children=[node])
        return node

    def relabeled(self, mapping: dict[int, int]) -> CertificateNode:
        if self.leaf is not None:
            sign, index = self.leaf
            return CertificateNode(leaf=(sign, mapping[index]))
        return CertificateNode(children=[c.relabeled(mapping) for c in self.children or []])

    def depth(self) -> int:
        if self.children is None:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def to_json(self) -> dict[str, Any]:
        if self.leaf is not None:
            return {"leaf": list(self.leaf)}
        return {"children": [c.to_json() for c in self.children or []]}


class Certificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: CertificateMode
    node: CertificateNode

    def to_json(self) -> dict[str, Any]:
        return {"mode": self.mode.value, "node": self.node.to_json()}


class ExponentSeq(BaseModel):
    """Finite sequence ``m = (m(1), ..., m(n))`` of integer exponents."""

    model_config = ConfigDict(frozen=True)

    m: list[int]

    @field_validator("m")
    @classmethod
    def _nonempty(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("exponent sequence must be nonempty")
        return value

    @classmethod
    def parse(cls, text: str) -> ExponentSeq:
        """Parse ``"1,2,1"``."""
        return cls(m=[int(part) for part in text.split(",") if part.strip()])

    def __len__(self) -> int:
        return len(self.m)

    def shift(self, k: int) -> ExponentSeq:
        """``m + k * 1``."""
        return ExponentSeq(m=[v + k for v in self.m])

    def concat(self, other: ExponentSeq) -> ExponentSeq:
        return ExponentSeq(m=self.m + other.m)

    def window(self, start: int, stop: int) -> ExponentSeq:
        return ExponentSeq(m=self.m[start:stop])


class ClaimDecomposition(BaseModel):
    """``x = x_1 + ... + x_r`` with each part of q-mass exactly ``1/r``.

    ``order`` lists the support sorted by magnitude descending (index
    ascending on ties), the order the recursion works in.
    """

    parts: list[GridVector]
    order: list[int]


class ThreeSplit(BaseModel):
    """Consecutive pieces ``y_1 < y_2 < y_3`` summing to ``y``; an empty
    piece has no certificate."""

    pieces: list[GridVector]
    certificates: list[Certificate | None]
    single_leaf: bool = False


class EnumerationResult(BaseModel):
    mode: CertificateMode
    support: list[int]
    depth: int
    vectors: list[GridVector] = Field(default_factory=list)
    truncated: bool = False
