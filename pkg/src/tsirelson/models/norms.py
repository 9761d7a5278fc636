"""Norm results and their witnesses."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class SplitTree(BaseModel):
    """Optimal successive splitting of an index interval.

    A leaf carries ``index``; an internal node carries 2..r ``children`` whose
    intervals partition ``interval`` into consecutive pieces.
    """

    model_config = ConfigDict(frozen=True)

    interval: tuple[int, int]
    value: float
    index: int | None = None
    children: list[SplitTree] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def leaves(self) -> list[int]:
        if self.index is not None:
            return [self.index]
        return [i for child in self.children or [] for i in child.leaves()]

    def evaluate(self, magnitudes: dict[int, float], inv_t: float) -> float:
        """Re-evaluate bottom-up from ``|x(i)|``.

        Children are summed right-nested, which matches the order the
        interval table accumulates them.
        """
        if self.index is not None:
            return magnitudes[self.index]
        lo, hi = self.interval
        peak = max(v for i, v in magnitudes.items() if lo <= i <= hi)
        values = [child.evaluate(magnitudes, inv_t) for child in self.children or []]
        total = values[-1]
        for value in reversed(values[:-1]):
            total = value + total
        return max(peak, inv_t * total)


class ClassicalNormResult(BaseModel):
    value: float
    witness: SplitTree | None = None


class LevelAssignment(BaseModel):
    """Levels ``j(i) >= 0`` of the used coordinates; the induced functional is
    ``sign(x(i)) * t^{-j(i)}``."""

    model_config = ConfigDict(frozen=True)

    levels: dict[int, int] = Field(default_factory=dict)
    value: float = 0.0

    def kraft_numerator(self, r: int) -> tuple[int, int]:
        """Return ``(sum r^{J-j}, r^J)`` with ``J`` the deepest level."""
        if not self.levels:
            return 0, 1
        depth = max(self.levels.values())
        return sum(r ** (depth - j) for j in self.levels.values()), r**depth

    def is_kraft_feasible(self, r: int) -> bool:
        numerator, denominator = self.kraft_numerator(r)
        return numerator <= denominator


class ModifiedNormResult(BaseModel):
    value: float
    witness: LevelAssignment
    slack: float = 0.0


class OracleResult(BaseModel):
    """Brute-force value with its guaranteed distance to the true supremum."""

    value: float
    depth: int
    slack: float
    exact: bool
    patterns: int = 0
