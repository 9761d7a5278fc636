"""Modified norm as a Kraft-constrained level assignment."""

import logging
import math
from functools import lru_cache

import numpy as np

from tsirelson.errors import ConstructionError, ValidationError
from tsirelson.models import (
    LevelAssignment,
    ModifiedNormResult,
    OracleResult,
    Params,
    SparseVector,
)
from tsirelson.protocols import ModifiedNormProtocol

logger = logging.getLogger(__name__)


class ModifiedNormService(ModifiedNormProtocol):
    """Exact ``|x|_{p,r} = max sum |x(i)| t^{-j(i)}`` over ``sum r^{-j(i)} <= 1``.

    Levels are filled top-down in an r-ary tree. With coordinates sorted by
    magnitude, ``G(pos, R)`` is the best normalized value obtainable from
    coordinates ``pos..n-1`` when ``R`` slots are open at the current level.
    Each step either places coordinate ``pos`` in one slot, giving
    ``|x(pos)| + G(pos + 1, R - 1)``, or turns every open slot into ``r``
    slots one level down, giving ``t^{-1} G(pos, rR)``. ``R`` is capped at the
    number of remaining coordinates, where every one of them fits.
    """

    def __init__(self, tol: float = 1e-9, oracle_max_support: int = 6) -> None:
        self._tol = tol
        self._oracle_max_support = oracle_max_support

    def modified_norm(
        self, x: SparseVector, params: Params, tol: float | None = None
    ) -> ModifiedNormResult:
        tol = self._tol if tol is None else tol
        n = len(x)
        if n == 0:
            return ModifiedNormResult(value=0.0, witness=LevelAssignment())

        order = sorted(x.support, key=lambda i: (-abs(x.entries[i]), i))
        magnitudes = np.asarray([abs(x.entries[i]) for i in order], dtype=np.float64)
        value, descend = self._fill_slots(magnitudes, params)

        levels = self._assign_levels(n, params.r, descend)
        witness = LevelAssignment(
            levels={order[rank]: level for rank, level in enumerate(levels) if level >= 0},
            value=value,
        )
        if not witness.is_kraft_feasible(params.r):
            raise ConstructionError("level assignment violates the Kraft sum", levels=witness.levels)

        holder = math.fsum(float(a) ** params.p for a in magnitudes) ** (1.0 / params.p)
        if value > holder + tol * (1.0 + holder):
            raise ConstructionError(
                f"modified norm {value} exceeds the Holder bound {holder}", value=value, bound=holder
            )
        logger.debug(f"Modified norm over {n} coordinates: {value}")
        return ModifiedNormResult(value=value, witness=witness, slack=0.0)

    def _fill_slots(self, magnitudes: np.ndarray, params: Params) -> tuple[float, np.ndarray]:
        n = magnitudes.shape[0]
        r, inv_t = params.r, params.inv_t

        # descend[pos, R] marks states where opening the next level wins
        descend = np.zeros((n, n + 1), dtype=bool)
        following = np.zeros(1)
        for pos in range(n - 1, -1, -1):
            remaining = n - pos
            current = np.empty(remaining + 1)
            current[0] = 0.0
            current[1:] = magnitudes[pos] + following[:remaining]
            deeper = np.minimum(r * np.arange(remaining + 1), remaining)
            down = np.zeros(remaining + 1, dtype=bool)
            # R -> rR chains reach the cap within log_r(remaining) passes
            for _ in range(remaining):
                candidate = inv_t * current[deeper]
                better = candidate > current
                better[0] = better[remaining] = False
                if not better.any():
                    break
                current = np.where(better, candidate, current)
                down |= better
            descend[pos, : remaining + 1] = down
            following = current

        return float(following[1]), descend

    @staticmethod
    def _assign_levels(n: int, r: int, descend: np.ndarray) -> list[int]:
        levels = [-1] * n
        pos, slots, level = 0, 1, 0
        while pos < n and slots > 0:
            remaining = n - pos
            if slots >= remaining:
                levels[pos:] = [level] * remaining
                break
            if descend[pos, slots]:
                slots *= r
                level += 1
            else:
                levels[pos] = level
                pos += 1
                slots -= 1
        return levels

    def modified_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        """Evaluate the recursive definition with pairwise disjoint pieces."""
        n = len(x)
        if n > self._oracle_max_support:
            raise ValidationError(
                f"oracle support {n} exceeds guard {self._oracle_max_support}",
                support=n,
                guard=self._oracle_max_support,
            )
        if n == 0:
            return OracleResult(value=0.0, depth=0, slack=0.0, exact=True)
        if depth is None:
            depth = n - 1
        if depth < 0:
            raise ValidationError("depth must be nonnegative", depth=depth)

        magnitudes = x.abs_values()
        size = 1 << n
        best = [-math.inf] * size
        for i in range(n):
            best[1 << i] = magnitudes[i]

        for _ in range(depth):
            previous = best[:]
            for mask in range(1, size):
                candidate = max(previous[mask], params.inv_t * previous[mask])
                for blocks in _set_partitions(mask, params.r):
                    total = math.fsum(previous[block] for block in blocks)
                    candidate = max(candidate, params.inv_t * total)
                best[mask] = candidate

        value = max(best[1:])
        exact = depth >= n - 1
        slack = 0.0 if exact else math.fsum(magnitudes) * params.inv_t**depth
        return OracleResult(value=value, depth=depth, slack=slack, exact=exact, patterns=size - 1)


@lru_cache(maxsize=8192)
def _set_partitions(mask: int, max_blocks: int) -> tuple[tuple[int, ...], ...]:
    """Partitions of ``mask`` into 2..max_blocks nonempty blocks."""
    found = [p for p in _all_partitions(mask, max_blocks) if len(p) >= 2]
    return tuple(found)


@lru_cache(maxsize=8192)
def _all_partitions(mask: int, max_blocks: int) -> tuple[tuple[int, ...], ...]:
    if mask == 0:
        return ((),)
    if max_blocks == 0:
        return ()
    lowest = mask & -mask
    rest = mask ^ lowest
    partitions = []
    # the block holding the lowest bit is lowest | sub for every submask of rest
    sub = rest
    while True:
        block = lowest | sub
        for tail in _all_partitions(rest ^ sub, max_blocks - 1):
            partitions.append((block,) + tail)
        if sub == 0:
            break
        sub = (sub - 1) & rest
    return tuple(partitions)


# Type check
_: ModifiedNormProtocol = ModifiedNormService()
