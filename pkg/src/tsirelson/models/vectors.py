"""Finite-support vectors: float coefficients, exact grid exponents, index families."""

import math
from enum import Enum
from typing import Iterable, Iterator

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GridBase(str, Enum):
    """Which derived base a grid vector is expressed in."""

    ALPHA = "alpha"
    S = "s"
    T = "t"


class SparseVector(BaseModel):
    """Element of c_00: index -> nonzero real coefficient, indices from 1."""

    model_config = ConfigDict(frozen=True)

    entries: dict[int, float] = Field(default_factory=dict)

    @field_validator("entries")
    @classmethod
    def _normalize(cls, value: dict[int, float]) -> dict[int, float]:
        cleaned: dict[int, float] = {}
        for index in sorted(value):
            coefficient = float(value[index])
            if index < 1:
                raise ValueError(f"indices start at 1, got {index}")
            if not math.isfinite(coefficient):
                raise ValueError(f"coefficient at {index} is not finite")
            if coefficient != 0.0:
                cleaned[index] = coefficient
        return cleaned

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        return cls(entries=dict(pairs))

    @classmethod
    def from_values(cls, values: Iterable[float], start: int = 1) -> "SparseVector":
        """Dense list to sparse vector, placing the first value at ``start``."""
        return cls(entries={start + k: v for k, v in enumerate(values)})

    @property
    def support(self) -> list[int]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self) -> Iterator[tuple[int, float]]:
        return iter(self.entries.items())

    def abs_values(self) -> list[float]:
        """Absolute coefficients in index order."""
        return [abs(v) for v in self.entries.values()]


class GridVector(BaseModel):
    """Exact vector with entries ``sign * base^exponent``.

    Exponents are integers; ``level(i) = -exponent(i)`` is the depth at which
    coordinate ``i`` sits in a norming tree.
    """

    model_config = ConfigDict(frozen=True)

    base: GridBase
    base_value: float = Field(gt=1.0)
    entries: dict[int, tuple[int, int]] = Field(default_factory=dict)

    @field_validator("entries")
    @classmethod
    def _check_entries(cls, value: dict[int, tuple[int, int]]) -> dict[int, tuple[int, int]]:
        cleaned: dict[int, tuple[int, int]] = {}
        for index in sorted(value):
            sign, exponent = value[index]
            if index < 1:
                raise ValueError(f"indices start at 1, got {index}")
            if sign not in (1, -1):
                raise ValueError(f"sign at {index} must be +1 or -1")
            cleaned[index] = (int(sign), int(exponent))
        return cleaned

    @property
    def support(self) -> list[int]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def levels(self) -> dict[int, int]:
        return {i: -e for i, (_, e) in self.entries.items()}

    def coefficient(self, index: int) -> float:
        sign, exponent = self.entries[index]
        return sign * self.base_value**exponent

    def to_sparse(self) -> SparseVector:
        return SparseVector(entries={i: self.coefficient(i) for i in self.entries})

    def with_entries(self, entries: dict[int, tuple[int, int]]) -> "GridVector":
        return GridVector(base=self.base, base_value=self.base_value, entries=entries)

    def shifted(self, delta: int) -> "GridVector":
        """Multiply by ``base^delta`` (exact)."""
        return self.with_entries({i: (sg, e + delta) for i, (sg, e) in self.entries.items()})

    def power_sum(self, power: float) -> float:
        """Sum of ``|x(i)|^power`` in index order."""
        return sum(self.base_value ** (e * power) for _, e in self.entries.values())


class IntervalSet(BaseModel):
    """Ordered family of pairwise-disjoint index sets (the E_i or F_i)."""

    model_config = ConfigDict(frozen=True)

    sets: list[list[int]]
    successive: bool = True

    @model_validator(mode="after")
    def _check_family(self) -> "IntervalSet":
        seen: set[int] = set()
        previous_max: int | None = None
        for members in self.sets:
            if len(set(members)) != len(members) or seen.intersection(members):
                raise ValueError("index sets must be pairwise disjoint")
            seen.update(members)
            if self.successive and members:
                if previous_max is not None and min(members) <= previous_max:
                    raise ValueError("successive sets must satisfy E_1 < E_2 < ...")
                previous_max = max(members)
        return self
