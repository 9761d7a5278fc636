"""Membership certificates for the successive (K) and disjoint (K^M) norming sets."""

import itertools
import logging
from fractions import Fraction
from typing import Iterator, Sequence

from tsirelson.errors import CertificateError, ValidationError
from tsirelson.models import (
    Certificate,
    CertificateMode,
    CertificateNode,
    ClaimDecomposition,
    EnumerationResult,
    ExponentSeq,
    GridBase,
    GridVector,
    Params,
    ThreeSplit,
)
from tsirelson.protocols import CertificateServiceProtocol
from tsirelson.services.vector_ops import min_level

logger = logging.getLogger(__name__)

# (index, sign, level) triples sorted by index
Pattern = tuple[tuple[int, int, int], ...]

HALF = Fraction(1, 2)

MAX_ENUMERATION_SUPPORT = 8
MAX_ENUMERATION_DEPTH = 10


def kraft_sum(y: GridVector, r: int) -> Fraction:
    """``||y||_q^q`` of a t-grid vector as an exact rational."""
    return sum((Fraction(r) ** exponent for _, exponent in y.entries.values()), Fraction(0))


class CertificateService(CertificateServiceProtocol):
    """Builds and replays closure-rule trees."""

    def __init__(self, enumeration_cap: int = 200_000) -> None:
        self._enumeration_cap = enumeration_cap

    # Verification

    def verify_certificate(self, certificate: Certificate, params: Params) -> GridVector:
        entries = self._evaluate(certificate.node, certificate.mode, params.r, ())
        return GridVector(base=GridBase.T, base_value=params.t, entries=entries)

    def _evaluate(
        self, node: CertificateNode, mode: CertificateMode, r: int, path: tuple[int, ...]
    ) -> dict[int, tuple[int, int]]:
        if node.leaf is not None:
            sign, index = node.leaf
            if index < 1:
                raise CertificateError("leaf index must be positive", path=list(path), index=index)
            return {index: (sign, 0)}

        children = node.children or []
        if len(children) > r:
            raise CertificateError(
                f"node has {len(children)} children, at most {r} allowed", path=list(path)
            )
        values = [self._evaluate(c, mode, r, path + (k,)) for k, c in enumerate(children)]

        merged: dict[int, tuple[int, int]] = {}
        previous_max: int | None = None
        for position, value in enumerate(values):
            if merged.keys() & value.keys():
                raise CertificateError("children overlap", path=list(path), child=position)
            if mode == CertificateMode.SUCCESSIVE:
                if previous_max is not None and min(value) <= previous_max:
                    raise CertificateError("ordering violation", path=list(path), child=position)
                previous_max = max(value)
            merged.update(value)
        return {i: (sign, exponent - 1) for i, (sign, exponent) in merged.items()}

    # Disjoint set K^M

    def kM_membership(self, y: GridVector, params: Params) -> bool:
        """Entries in C_t with q-mass at most 1, checked in integers.

        The zero vector has Kraft sum 0 and is a member, but no certificate
        produces it, so ``build_kM_certificate`` rejects it.
        """
        if y.base != GridBase.T:
            return False
        levels = list(y.levels().values())
        if not levels:
            return True
        if min(levels) < 0:
            return False
        depth = max(levels)
        r = params.r
        return sum(r ** (depth - j) for j in levels) <= r**depth

    def claim_decompose(self, x: GridVector, params: Params) -> ClaimDecomposition:
        """Split a unit-mass vector into r pieces of mass ``1/r`` each."""
        r = params.r
        if x.base != GridBase.T or not self.kM_membership(x, params):
            raise ValidationError("decomposition needs a member of the disjoint norming set")
        if kraft_sum(x, r) != 1:
            raise ValidationError("decomposition needs ||x||_q = 1 exactly")
        if min_level(x) == 0:
            raise ValidationError("a unit vector is its own decomposition (n(x) = 0)")

        order = sorted(x.support, key=lambda i: (x.entries[i][1] * -1, i))
        items = [((index,), -x.entries[index][1]) for index in order]
        groups = self._group_by_mass(items, r)
        parts = [x.with_entries({i: x.entries[i] for i in group}) for group in groups]
        return ClaimDecomposition(parts=parts, order=order)

    @staticmethod
    def _group_by_mass(items: list[tuple[tuple[int, ...], int]], r: int) -> list[tuple[int, ...]]:
        """Collapse the deepest level in runs of r until r items sit on level 1."""
        depth = max(level for _, level in items)
        while depth > 1:
            bottom = [members for members, level in items if level == depth]
            kept = [(members, level) for members, level in items if level != depth]
            assert len(bottom) % r == 0, "mass identity forces |J| to be a multiple of r"
            merged = [
                (tuple(itertools.chain.from_iterable(bottom[k : k + r])), depth - 1)
                for k in range(0, len(bottom), r)
            ]
            items = kept + merged
            depth -= 1
        assert len(items) == r, "unit mass leaves exactly r items on level 1"
        return [members for members, _ in items]

    def build_kM_certificate(self, y: GridVector, params: Params) -> Certificate:
        """Disjoint-mode certificate for any member, by padding to unit mass and
        decomposing recursively."""
        if not y.entries:
            raise ValidationError("the zero vector has no certificate")
        if not self.kM_membership(y, params):
            raise ValidationError("vector is not in the disjoint norming set")

        padded, padding = self._pad_to_unit_mass(y, params.r)
        node = self._build_disjoint(padded, params)
        pruned = _prune(node, padding)
        if pruned is None:
            raise CertificateError("padding swallowed the whole certificate")
        certificate = Certificate(mode=CertificateMode.DISJOINT, node=pruned)
        self._check_replay(certificate, y, params)
        return certificate

    @staticmethod
    def _pad_to_unit_mass(y: GridVector, r: int) -> tuple[GridVector, set[int]]:
        """Fill ``1 - ||y||_q^q`` with the base-r digits of the residual,
        placed after ``max supp y``."""
        levels = y.levels()
        depth = max(levels.values())
        residual = r**depth - sum(r ** (depth - j) for j in levels.values())
        entries = dict(y.entries)
        next_index = y.support[-1] + 1
        padding: set[int] = set()
        power = 0
        while residual:
            residual, digit = divmod(residual, r)
            for _ in range(digit):
                entries[next_index] = (1, power - depth)
                padding.add(next_index)
                next_index += 1
            power += 1
        return y.with_entries(entries), padding

    def _build_disjoint(self, x: GridVector, params: Params) -> CertificateNode:
        if len(x) == 1:
            (index,) = x.support
            sign, exponent = x.entries[index]
            if exponent != 0:
                raise CertificateError("unit-mass singleton must sit on level 0", index=index)
            return CertificateNode.make_leaf(sign, index)
        decomposition = self.claim_decompose(x, params)
        children = [self._build_disjoint(part.shifted(1), params) for part in decomposition.parts]
        return CertificateNode.make_internal(children)

    def _check_replay(self, certificate: Certificate, target: GridVector, params: Params) -> None:
        replayed = self.verify_certificate(certificate, params)
        if replayed.entries != target.entries:
            raise CertificateError("certificate does not reproduce the target vector")

    # Successive set K

    def phi_exact(self, m: ExponentSeq, params: Params) -> Fraction:
        return _phi(m.m, params.r)

    def phi(self, m: ExponentSeq, params: Params) -> float:
        return float(self.phi_exact(m, params))

    def v_map(self, m: ExponentSeq, params: Params, start: int = 1) -> GridVector:
        return GridVector(
            base=GridBase.T,
            base_value=params.t,
            entries={start + k: (1, -v) for k, v in enumerate(m.m)},
        )

    def build_K_certificate(
        self,
        m: ExponentSeq,
        params: Params,
        indices: Sequence[int] | None = None,
        signs: Sequence[int] | None = None,
    ) -> Certificate:
        """Successive-mode certificate for ``V(m)`` whenever ``Phi(m) <= 1``.

        ``indices`` and ``signs`` place the coordinates; by default they are
        ``1..n`` with positive signs.
        """
        if self.phi_exact(m, params) > 1:
            raise ValidationError("Phi(m) exceeds 1", m=m.m)
        positions = list(indices) if indices is not None else list(range(1, len(m) + 1))
        leaf_signs = list(signs) if signs is not None else [1] * len(m)
        if len(positions) != len(m) or len(leaf_signs) != len(m):
            raise ValidationError("indices and signs must match the sequence length")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValidationError("indices must be strictly increasing")

        node = self._build_successive(m.m, 0, params.r)
        mapping = {k + 1: positions[k] for k in range(len(m))}
        node = _apply_signs(node.relabeled(mapping), dict(zip(positions, leaf_signs)))
        certificate = Certificate(mode=CertificateMode.SUCCESSIVE, node=node)
        target = GridVector(
            base=GridBase.T,
            base_value=params.t,
            entries={i: (sg, -v) for i, sg, v in zip(positions, leaf_signs, m.m)},
        )
        self._check_replay(certificate, target, params)
        return certificate

    def _build_successive(self, m: list[int], offset: int, r: int) -> CertificateNode:
        """Tree over positions ``offset + 1 ..`` for a sequence with Phi <= 1."""
        if len(m) == 1:
            return CertificateNode.make_leaf(1, offset + 1).wrapped(m[0])

        shift = _normalizing_shift(m, r)
        m = [v - shift for v in m]
        limit = Fraction(1, r)
        children = []
        start = 0
        while start < len(m):
            stop = start + 1
            while stop < len(m) and _phi(m[start : stop + 1], r) <= limit:
                stop += 1
            children.append(self._build_successive([v - 1 for v in m[start:stop]], offset + start, r))
            start = stop
        if len(children) > r:
            raise CertificateError(f"greedy split produced {len(children)} pieces", r=r)
        return CertificateNode.make_internal(children).wrapped(shift)

    def certify_small_mass(self, y: GridVector, params: Params) -> Certificate:
        """Successive-mode certificate for a member with ``||y||_q^q <= 1/2``."""
        if not self.kM_membership(y, params) or not y.entries:
            raise ValidationError("vector is not a nonzero member of the disjoint norming set")
        if kraft_sum(y, params.r) > HALF:
            raise ValidationError("q-mass exceeds 1/2")
        levels = y.levels()
        return self.build_K_certificate(
            ExponentSeq(m=[levels[i] for i in y.support]),
            params,
            indices=y.support,
            signs=[y.entries[i][0] for i in y.support],
        )

    def three_split(self, y: GridVector, params: Params) -> ThreeSplit:
        """Cut a K^M member into ``y_1 < y_2 < y_3`` each certified in K."""
        if not y.entries:
            raise ValidationError("the zero vector has no certificate")
        if not self.kM_membership(y, params):
            raise ValidationError("vector is not in the disjoint norming set")

        if min_level(y) == 0:
            (index,) = y.support
            leaf = CertificateNode.make_leaf(y.entries[index][0], index)
            return ThreeSplit(
                pieces=[y],
                certificates=[Certificate(mode=CertificateMode.SUCCESSIVE, node=leaf)],
                single_leaf=True,
            )

        r = params.r
        runs: list[list[int]] = [[]]
        mass = Fraction(0)
        for index in y.support:
            weight = Fraction(r) ** y.entries[index][1]
            if runs[-1] and mass + weight > HALF:
                runs.append([])
                mass = Fraction(0)
            runs[-1].append(index)
            mass += weight
        if len(runs) > 3:
            raise CertificateError(f"greedy cut produced {len(runs)} pieces")
        runs += [[] for _ in range(3 - len(runs))]

        pieces = [y.with_entries({i: y.entries[i] for i in run}) for run in runs]
        certificates = [self.certify_small_mass(piece, params) if piece.entries else None for piece in pieces]
        return ThreeSplit(pieces=pieces, certificates=certificates)

    # Enumeration

    def enumerate_K(
        self,
        support: Sequence[int],
        depth: int,
        mode: CertificateMode,
        params: Params,
        cap: int | None = None,
    ) -> EnumerationResult:
        """All distinct evaluations of certificates over ``support`` with tree
        depth at most ``depth``."""
        cap = self._enumeration_cap if cap is None else cap
        indices = sorted(set(support))
        if not 0 <= depth <= MAX_ENUMERATION_DEPTH:
            raise ValidationError(
                f"depth must lie in [0, {MAX_ENUMERATION_DEPTH}]", depth=depth, guard=MAX_ENUMERATION_DEPTH
            )
        if len(indices) > MAX_ENUMERATION_SUPPORT:
            raise ValidationError(
                f"enumeration support {len(indices)} exceeds guard {MAX_ENUMERATION_SUPPORT}",
                support=len(indices),
                guard=MAX_ENUMERATION_SUPPORT,
            )
        if cap < 1:
            raise ValidationError("cap must be positive", cap=cap)

        found: set[Pattern] = {((i, sign, 0),) for i in indices for sign in (1, -1)}
        truncated = False
        for _ in range(depth):
            grown = set(found)
            for chain in _chains(sorted(found), mode, params.r):
                merged = tuple(sorted(itertools.chain.from_iterable(chain)))
                grown.add(tuple((i, sign, level + 1) for i, sign, level in merged))
                if len(grown) >= cap:
                    truncated = True
                    break
            found = grown
            if truncated:
                logger.warning(f"Enumeration truncated at {len(found)} patterns")
                break

        vectors = [
            GridVector(
                base=GridBase.T,
                base_value=params.t,
                entries={i: (sign, -level) for i, sign, level in pattern},
            )
            for pattern in sorted(found)
        ]
        return EnumerationResult(
            mode=mode, support=indices, depth=depth, vectors=vectors, truncated=truncated
        )


def _phi(m: Sequence[int], r: int) -> Fraction:
    weights = [Fraction(r) ** (-v) for v in m]
    if len(weights) <= 2:
        return sum(weights, Fraction(0))
    return weights[0] + 2 * sum(weights[1:-1], Fraction(0)) + weights[-1]


def _normalizing_shift(m: Sequence[int], r: int) -> int:
    """The ``k >= 0`` with ``r^{-k-1} < Phi(m) <= r^{-k}``."""
    value = _phi(m, r)
    shift = 0
    while value * r <= 1:
        value *= r
        shift += 1
    return shift


def _apply_signs(node: CertificateNode, signs: dict[int, int]) -> CertificateNode:
    if node.leaf is not None:
        _, index = node.leaf
        return CertificateNode.make_leaf(signs[index], index)
    return CertificateNode.make_internal([_apply_signs(c, signs) for c in node.children or []])


def _prune(node: CertificateNode, dropped: set[int]) -> CertificateNode | None:
    """Restriction: remove the given leaves and any node left childless."""
    if node.leaf is not None:
        return None if node.leaf[1] in dropped else node
    kept = [c for c in (_prune(child, dropped) for child in node.children or []) if c is not None]
    return CertificateNode.make_internal(kept) if kept else None


def _chains(patterns: list[Pattern], mode: CertificateMode, r: int) -> Iterator[tuple[Pattern, ...]]:
    """Compatible tuples of 1..r patterns: successive supports, or pairwise
    disjoint supports taken in a canonical order."""
    by_mask: dict[frozenset[int], list[Pattern]] = {}
    for pattern in patterns:
        by_mask.setdefault(frozenset(i for i, _, _ in pattern), []).append(pattern)
    masks = sorted(by_mask, key=lambda s: (min(s), sorted(s)))

    def extend(prefix: list[frozenset[int]], used: frozenset[int], start: int) -> Iterator[list[frozenset[int]]]:
        if prefix:
            yield prefix
        if len(prefix) == r:
            return
        for k in range(start, len(masks)):
            mask = masks[k]
            if mode == CertificateMode.SUCCESSIVE:
                if prefix and min(mask) <= max(prefix[-1]):
                    continue
            elif used & mask:
                continue
            yield from extend(prefix + [mask], used | mask, k + 1)

    for mask_chain in extend([], frozenset(), 0):
        yield from itertools.product(*(by_mask[mask] for mask in mask_chain))


# Type check
_: CertificateServiceProtocol = CertificateService()
