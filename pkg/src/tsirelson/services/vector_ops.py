"""Parameter derivation and elementary operations on finite-support vectors."""

import logging
import math
from typing import Iterable, Sequence

from pydantic import ValidationError as PydanticValidationError

from tsirelson.errors import ValidationError
from tsirelson.models import GridBase, GridVector, Params, SparseVector

logger = logging.getLogger(__name__)


def derive_params(p: float, r: int) -> Params:
    """Build the full parameter bundle from ``p`` and the branching factor ``r``."""
    if isinstance(r, bool) or not isinstance(r, int):
        raise ValidationError("r must be an integer", r=r)
    if not math.isfinite(p) or p <= 1.0:
        raise ValidationError("p must satisfy 1 < p < inf", p=p)
    if r < 2:
        raise ValidationError("r must be at least 2", r=r)

    q = p / (p - 1.0)
    level_count = r.bit_length() - 1
    try:
        return Params(
            p=p,
            q=q,
            r=r,
            t=r ** (1.0 / q),
            s=r ** (1.0 / p),
            M=level_count,
            alpha=r ** (1.0 / (p * level_count)),
        )
    except PydanticValidationError as e:
        raise ValidationError(f"derived parameters are inconsistent: {e}", p=p, r=r) from e


def base_value(params: Params, base: GridBase) -> float:
    return {GridBase.ALPHA: params.alpha, GridBase.S: params.s, GridBase.T: params.t}[base]


def lp_norm(x: SparseVector, e: float) -> float:
    """The l_e norm; ``e = inf`` gives the sup-norm."""
    if not e >= 1.0:
        raise ValidationError("exponent must be at least 1", e=e)
    values = x.abs_values()
    if not values:
        return 0.0
    if math.isinf(e):
        return max(values)
    return math.fsum(v**e for v in values) ** (1.0 / e)


def dual_pair(x: SparseVector, y: SparseVector) -> float:
    common = x.entries.keys() & y.entries.keys()
    return math.fsum(x.entries[i] * y.entries[i] for i in sorted(common))


def j_m_split(x: GridVector, params: Params) -> list[GridVector]:
    """Split an alpha-grid vector by exponent residue mod M."""
    if x.base != GridBase.ALPHA:
        raise ValidationError("J_m split needs an alpha-grid vector", base=x.base.value)
    parts: list[dict[int, tuple[int, int]]] = [{} for _ in range(params.M)]
    for index, (sign, exponent) in x.entries.items():
        parts[exponent % params.M][index] = (sign, exponent)
    return [x.with_entries(entries) for entries in parts]


def quantize_to_grid(x: SparseVector, base: float, tag: GridBase = GridBase.ALPHA) -> GridVector:
    """Round every ``|x(i)|`` to the nearest integer power of ``base`` in log
    scale; exact midpoints go to the smaller magnitude."""
    if not base > 1.0:
        raise ValidationError("grid base must exceed 1", base=base)
    log_base = math.log(base)
    entries: dict[int, tuple[int, int]] = {}
    for index, value in x.items():
        exponent = math.ceil(math.log(abs(value)) / log_base - 0.5)
        entries[index] = (1 if value > 0 else -1, exponent)
    return GridVector(base=tag, base_value=base, entries=entries)


def grid_from_sparse(x: SparseVector, params: Params, base: GridBase, tol: float = 1e-9) -> GridVector:
    """Recognize a float vector whose entries already lie on the grid."""
    value = base_value(params, base)
    grid = quantize_to_grid(x, value, base)
    for index, coefficient in x.items():
        if not math.isclose(abs(coefficient), value ** grid.entries[index][1], rel_tol=tol):
            raise ValidationError(
                f"coordinate {index} is not a power of the {base.value} grid",
                index=index,
                value=coefficient,
            )
    return grid


def exponent_limit(base: float) -> int:
    """Largest ``J`` with ``base^J`` and ``base^-J`` both normal doubles."""
    return int(1022 / math.log2(base))


def grid_to_sparse(x: GridVector) -> SparseVector:
    """Float image of a grid vector, refusing exponents outside the double range."""
    limit = exponent_limit(x.base_value)
    outside = [i for i, (_, e) in x.entries.items() if abs(e) > limit]
    if outside:
        raise ValidationError(
            f"exponents beyond {limit} in absolute value do not fit a double for base {x.base_value}",
            indices=outside[:5],
            limit=limit,
        )
    return x.to_sparse()


def restrict(x: SparseVector, subset: Iterable[int]) -> SparseVector:
    keep = set(subset)
    return SparseVector(entries={i: v for i, v in x.items() if i in keep})


def spread(x: SparseVector, mapping: dict[int, int] | Sequence[int]) -> SparseVector:
    """Image of ``x`` under a strictly increasing index map.

    ``mapping`` is either a dict on the support or a sequence of new indices
    aligned with the sorted support.
    """
    support = x.support
    targets = (
        [mapping[i] for i in support] if isinstance(mapping, dict) else list(mapping)
    )
    if len(targets) != len(support):
        raise ValidationError("spreading map must cover the support")
    if any(b <= a for a, b in zip(targets, targets[1:])):
        raise ValidationError("spreading map must be strictly increasing")
    return SparseVector(entries={t: x.entries[i] for i, t in zip(support, targets)})


def spread_grid(x: GridVector, targets: Sequence[int]) -> GridVector:
    support = x.support
    if len(targets) != len(support) or any(b <= a for a, b in zip(targets, targets[1:])):
        raise ValidationError("spreading map must be strictly increasing on the support")
    return x.with_entries({t: x.entries[i] for i, t in zip(support, targets)})


def is_block(vectors: Sequence[SparseVector | GridVector]) -> bool:
    """True iff every vector is nonzero and supports strictly increase."""
    previous: int | None = None
    for vector in vectors:
        support = vector.support
        if not support:
            return False
        if previous is not None and support[0] <= previous:
            return False
        previous = support[-1]
    return True


def grid_sum(vectors: Sequence[GridVector]) -> GridVector:
    """Sum of grid vectors with pairwise disjoint supports."""
    if not vectors:
        raise ValidationError("nothing to sum")
    entries: dict[int, tuple[int, int]] = {}
    for vector in vectors:
        overlap = entries.keys() & vector.entries.keys()
        if overlap:
            raise ValidationError("grid sum needs disjoint supports", index=min(overlap))
        entries.update(vector.entries)
    return vectors[0].with_entries(entries)


def min_level(x: GridVector) -> int:
    """``n(x)``: the smallest level ``-exponent`` present."""
    if not x.entries:
        raise ValidationError("level of the zero vector is undefined")
    return min(x.levels().values())


def max_level(x: GridVector) -> int:
    """``m(x)``: the largest level present."""
    if not x.entries:
        raise ValidationError("level of the zero vector is undefined")
    return max(x.levels().values())
