"""Classical norm via interval-partition dynamic programming."""

import logging
import math
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import as_strided

from tsirelson.errors import BudgetExceededError, ValidationError
from tsirelson.models import ClassicalNormResult, OracleResult, Params, SparseVector, SplitTree
from tsirelson.protocols import ClassicalNormProtocol

logger = logging.getLogger(__name__)


class ClassicalNormService(ClassicalNormProtocol):
    """Exact ``||x||_{p,r}`` on the ordered support.

    For an interval ``I`` of support ranks, ``N(I)`` is the larger of the
    sup-norm on ``I`` and ``t^{-1}`` times the best sum over 2..r consecutive
    pieces. ``H_l(I)`` holds the best sum with exactly ``l`` pieces and is
    built from the first piece plus ``l - 1`` pieces of the rest, so every
    table entry only reads shorter intervals.
    """

    def __init__(self, cell_budget: int = 60_000_000, oracle_max_support: int = 8) -> None:
        self._cell_budget = cell_budget
        self._oracle_max_support = oracle_max_support

    def classical_norm(
        self, x: SparseVector, params: Params, with_witness: bool = True
    ) -> ClassicalNormResult:
        """Compute the norm and optionally rebuild the optimal split tree."""
        support = x.support
        n = len(support)
        if n == 0:
            return ClassicalNormResult(value=0.0, witness=None)

        pieces = min(params.r, n)
        cells = pieces * n * n
        if cells > self._cell_budget:
            raise BudgetExceededError(
                f"classical DP needs {cells} cells, budget is {self._cell_budget}",
                support=n,
                budget=self._cell_budget,
            )

        magnitudes = np.asarray(x.abs_values(), dtype=np.float64)
        tables, choices, best_parts = self._fill_tables(magnitudes, params, with_witness)
        value = float(tables[0][0, n - 1])
        logger.debug(f"Classical norm over {n} coordinates: {value}")

        witness = None
        if with_witness:
            witness = self._rebuild(0, n - 1, support, tables[0], choices, best_parts)
        return ClassicalNormResult(value=value, witness=witness)

    def _fill_tables(
        self, magnitudes: np.ndarray, params: Params, with_witness: bool
    ) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
        n = magnitudes.shape[0]
        pieces = min(params.r, n)
        inv_t = params.inv_t
        itemsize = magnitudes.itemsize

        # tables[0] is N; tables[l - 1] is H_l for l >= 2
        tables = [np.full((n, n), -np.inf) for _ in range(pieces)]
        flats = [table.reshape(-1) for table in tables]
        choices = [np.zeros((n, n), dtype=np.int32) for _ in range(pieces)] if with_witness else []
        best_parts = np.zeros((n, n), dtype=np.int32) if with_witness else np.zeros((0, 0), dtype=np.int32)

        diagonal = np.arange(n) * (n + 1)
        flats[0][diagonal] = magnitudes
        peak = magnitudes.copy()

        for d in range(2, n + 1):
            count = n - d + 1
            cells = diagonal[:count] + (d - 1)
            peak = np.maximum(peak[:count], magnitudes[d - 1 :])

            # first[i, e] = N[i, i+e], rest_l[i, e] = H_l[i+e+1, i+d-1]
            first = as_strided(
                flats[0], shape=(count, d - 1), strides=((n + 1) * itemsize, itemsize), writeable=False
            )
            best = np.full(count, -np.inf)
            chosen = np.zeros(count, dtype=np.int32)
            for parts in range(2, min(pieces, d) + 1):
                rest_flat = flats[parts - 2][n + d - 1 :]
                rest = as_strided(
                    rest_flat,
                    shape=(count, d - 1),
                    strides=((n + 1) * itemsize, n * itemsize),
                    writeable=False,
                )
                sums = first + rest
                split = np.argmax(sums, axis=1)
                h_values = sums[np.arange(count), split]
                flats[parts - 1][cells] = h_values
                if with_witness:
                    choices[parts - 1].reshape(-1)[cells] = split
                # strict improvement keeps the fewest parts on ties
                better = h_values > best
                best = np.where(better, h_values, best)
                chosen = np.where(better, parts, chosen)

            flats[0][cells] = np.maximum(peak, inv_t * best)
            if with_witness:
                best_parts.reshape(-1)[cells] = chosen

        return tables, choices, best_parts

    def _rebuild(
        self,
        lo: int,
        hi: int,
        support: list[int],
        norms: np.ndarray,
        choices: list[np.ndarray],
        best_parts: np.ndarray,
    ) -> SplitTree:
        interval = (support[lo], support[hi])
        if lo == hi:
            return SplitTree(interval=interval, value=float(norms[lo, hi]), index=support[lo])

        bounds: list[tuple[int, int]] = []
        start, parts = lo, int(best_parts[lo, hi])
        while parts > 1:
            cut = start + int(choices[parts - 1][start, hi])
            bounds.append((start, cut))
            start, parts = cut + 1, parts - 1
        bounds.append((start, hi))

        children = [self._rebuild(a, b, support, norms, choices, best_parts) for a, b in bounds]
        return SplitTree(interval=interval, value=float(norms[lo, hi]), children=children)

    def classical_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        """Best pairing over successive-mode functionals of tree depth <= depth.

        Works on arbitrary subsets of the support, so it does not rely on the
        interval-hull reduction the table method uses.
        """
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

        magnitudes = tuple(x.abs_values())
        best = _successive_table(magnitudes, params.r, params.inv_t, depth)
        value = max(best)
        exact = depth >= n - 1
        slack = 0.0 if exact else math.fsum(magnitudes) * params.inv_t**depth
        return OracleResult(value=value, depth=depth, slack=slack, exact=exact, patterns=len(best))


@lru_cache(maxsize=4096)
def _runs(members: tuple[int, ...], blocks: int) -> list[list[tuple[int, ...]]]:
    """Ways to cut ``members`` into ``blocks`` consecutive nonempty runs."""
    if blocks == 1:
        return [[members]]
    splits = []
    for cut in range(1, len(members) - blocks + 2):
        for tail in _runs(members[cut:], blocks - 1):
            splits.append([members[:cut]] + tail)
    return splits


def _successive_table(
    magnitudes: tuple[float, ...], r: int, inv_t: float, depth: int
) -> list[float]:
    """Best pairing per support mask with tree depth <= depth."""
    n = len(magnitudes)
    size = 1 << n
    members = [tuple(i for i in range(n) if mask >> i & 1) for mask in range(size)]
    best = [-math.inf] * size
    for i in range(n):
        best[1 << i] = magnitudes[i]

    for _ in range(depth):
        previous = best[:]
        for mask in range(1, size):
            ranks = members[mask]
            # one child is a pure rescale and never beats previous[mask]
            candidate = max(previous[mask], inv_t * previous[mask])
            for blocks in range(2, min(r, len(ranks)) + 1):
                for runs in _runs(ranks, blocks):
                    total = math.fsum(previous[_mask_of(run)] for run in runs)
                    candidate = max(candidate, inv_t * total)
            best[mask] = candidate
    return [v for v in best[1:] if v > -math.inf]


def _mask_of(ranks: tuple[int, ...]) -> int:
    mask = 0
    for rank in ranks:
        mask |= 1 << rank
    return mask


# Type check
_: ClassicalNormProtocol = ClassicalNormService()
