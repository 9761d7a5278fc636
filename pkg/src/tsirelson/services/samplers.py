"""Seeded random inputs for the invariant suites."""

from fractions import Fraction

import numpy as np

from tsirelson.models import ExponentSeq, GridBase, GridVector, Params, SparseVector


def random_vector(rng: np.random.Generator, max_support: int, params: Params, spread: int = 3) -> SparseVector:
    """Nonzero vector mixing t-grid and uniform coefficients on a sparse support."""
    size = int(rng.integers(1, max_support + 1))
    indices = np.sort(rng.choice(np.arange(1, spread * max_support + 1), size=size, replace=False))
    on_grid = rng.random() < 0.5
    entries: dict[int, float] = {}
    for index in indices:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        if on_grid:
            value = params.t ** -int(rng.integers(0, 5))
        else:
            value = float(rng.uniform(0.05, 1.0))
        entries[int(index)] = sign * value
    return SparseVector(entries=entries)


def random_levels(rng: np.random.Generator, size: int, max_level: int, r: int) -> list[int]:
    """Levels in ``0..max_level`` pushed down until the Kraft sum is at most 1."""
    levels = [int(v) for v in rng.integers(0, max_level + 1, size=size)]
    while levels and sum(r ** (max_level - j) for j in levels) > r**max_level:
        shallowest = min(range(len(levels)), key=lambda k: levels[k])
        if levels[shallowest] < max_level:
            levels[shallowest] += 1
        else:
            levels.pop()
    return levels


def random_member(
    rng: np.random.Generator, params: Params, max_support: int = 30, max_level: int = 6
) -> GridVector:
    """Nonzero member of the t-grid ball (Kraft sum at most 1)."""
    levels: list[int] = []
    while not levels:
        levels = random_levels(rng, int(rng.integers(1, max_support + 1)), max_level, params.r)
    indices = np.sort(rng.choice(np.arange(1, 3 * max_support + 1), size=len(levels), replace=False))
    entries = {
        int(i): (1 if rng.random() < 0.5 else -1, -j) for i, j in zip(indices, levels)
    }
    return GridVector(base=GridBase.T, base_value=params.t, entries=entries)


def random_non_member(rng: np.random.Generator, params: Params, max_level: int = 6) -> GridVector:
    """t-grid vector with nonnegative levels and Kraft sum strictly above 1."""
    member = random_member(rng, params, max_support=20, max_level=max_level)
    entries = dict(member.entries)
    next_index = member.support[-1] + 1
    total = sum(params.r ** (max_level + e) for _, e in entries.values())
    while total <= params.r**max_level:
        level = int(rng.integers(0, 2))
        entries[next_index] = (1, -level)
        total += params.r ** (max_level - level)
        next_index += 1
    return member.with_entries(entries)


def random_exponent_seq(rng: np.random.Generator, r: int, max_length: int = 20, max_entry: int = 6) -> ExponentSeq:
    """Sequence with entries in ``1..max_entry`` and weight functional at most 1."""
    m = [int(v) for v in rng.integers(1, max_entry + 1, size=int(rng.integers(1, max_length + 1)))]

    def weight(seq: list[int]) -> Fraction:
        w = [Fraction(r) ** -v for v in seq]
        return sum(w, Fraction(0)) if len(w) <= 2 else w[0] + 2 * sum(w[1:-1], Fraction(0)) + w[-1]

    while weight(m) > 1:
        smallest = min(range(len(m)), key=lambda k: m[k])
        if m[smallest] < max_entry:
            m[smallest] += 1
        else:
            m.pop()
    return ExponentSeq(m=m)


def random_s_grid(rng: np.random.Generator, params: Params, unit_ball: bool, max_support: int = 12) -> GridVector:
    """s-grid vector; inside the p-unit ball, or of p-mass at most r otherwise."""
    size = int(rng.integers(1, max_support + 1))
    if unit_ball:
        levels = random_levels(rng, size, 5, params.r)
        levels = levels or [0]
        exponents = [-j for j in levels]
    else:
        exponents = [int(v) for v in rng.integers(-4, 2, size=size)]
        while sum(float(params.r) ** e for e in exponents) > params.r:
            exponents[exponents.index(max(exponents))] -= 1
    indices = np.sort(rng.choice(np.arange(1, 3 * max_support + 1), size=len(exponents), replace=False))
    entries = {
        int(i): (1 if rng.random() < 0.5 else -1, e) for i, e in zip(indices, exponents)
    }
    return GridVector(base=GridBase.S, base_value=params.s, entries=entries)
