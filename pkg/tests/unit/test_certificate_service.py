"""Unit tests for norming-set certificates."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from tsirelson.errors import CertificateError, ValidationError
from tsirelson.models import (
    Certificate,
    CertificateMode,
    CertificateNode,
    ExponentSeq,
    GridBase,
    GridVector,
    Params,
)
from tsirelson.services.certificate_service import CertificateService, kraft_sum
from tsirelson.services.samplers import random_exponent_seq, random_member, random_non_member
from tsirelson.services.vector_ops import derive_params


def t_vector(params: Params, levels: dict[int, int], signs: dict[int, int] | None = None) -> GridVector:
    signs = signs or {}
    return GridVector(
        base=GridBase.T,
        base_value=params.t,
        entries={i: (signs.get(i, 1), -j) for i, j in levels.items()},
    )


def leaf(index: int, sign: int = 1) -> CertificateNode:
    return CertificateNode.make_leaf(sign, index)


@pytest.fixture
def service() -> CertificateService:
    return CertificateService()


class TestVerifyCertificate:
    """Unit tests for certificate replay."""

    def test_leaf_is_unit_vector(self, service: CertificateService, params_2_2: Params):
        """Test that a leaf evaluates to +-e_index at level 0."""
        replay = service.verify_certificate(
            Certificate(mode=CertificateMode.SUCCESSIVE, node=leaf(4, -1)), params_2_2
        )

        assert replay.entries == {4: (-1, 0)}

    def test_internal_node_scales_by_t(self, service: CertificateService, params_2_2: Params):
        """Test that every internal node lowers its leaves one level."""
        node = CertificateNode.make_internal([leaf(1), CertificateNode.make_internal([leaf(2), leaf(3)])])

        replay = service.verify_certificate(Certificate(mode=CertificateMode.SUCCESSIVE, node=node), params_2_2)

        assert replay.levels() == {1: 1, 2: 2, 3: 2}

    def test_wrapped_leaf(self, service: CertificateService, params_2_2: Params):
        """Test that the one-child rule applies t^-1 per wrap."""
        node = leaf(2).wrapped(3)

        assert service.verify_certificate(Certificate(mode=CertificateMode.DISJOINT, node=node), params_2_2).levels() == {2: 3}

    def test_successive_order_violation(self, service: CertificateService, params_2_2: Params):
        """Test that out-of-order children fail in successive mode but pass in disjoint mode."""
        node = CertificateNode.make_internal([leaf(2), leaf(1)])

        with pytest.raises(CertificateError) as info:
            service.verify_certificate(Certificate(mode=CertificateMode.SUCCESSIVE, node=node), params_2_2)
        assert info.value.context["path"] == []

        replay = service.verify_certificate(Certificate(mode=CertificateMode.DISJOINT, node=node), params_2_2)
        assert replay.levels() == {1: 1, 2: 1}

    def test_too_many_children(self, service: CertificateService, params_2_2: Params):
        """Test that a node with more than r children is rejected."""
        node = CertificateNode.make_internal([leaf(1), CertificateNode.make_internal([leaf(2), leaf(3), leaf(4)])])

        with pytest.raises(CertificateError) as info:
            service.verify_certificate(Certificate(mode=CertificateMode.DISJOINT, node=node), params_2_2)

        assert info.value.context["path"] == [1]

    def test_overlapping_children(self, service: CertificateService, params_2_2: Params):
        """Test that a repeated index is rejected."""
        node = CertificateNode.make_internal([leaf(1), leaf(1)])

        with pytest.raises(CertificateError):
            service.verify_certificate(Certificate(mode=CertificateMode.DISJOINT, node=node), params_2_2)


class TestDisjointSet:
    """Unit tests for K^M membership, decomposition and certificates."""

    def test_membership(self, service: CertificateService, params_2_2: Params):
        """Test the integer Kraft check."""
        assert service.kM_membership(t_vector(params_2_2, {1: 1, 2: 1}), params_2_2)
        assert not service.kM_membership(t_vector(params_2_2, {1: 0, 2: 1}), params_2_2)
        assert not service.kM_membership(t_vector(params_2_2, {1: -1}), params_2_2)
        s_grid = GridVector(base=GridBase.S, base_value=params_2_2.s, entries={1: (1, 0)})
        assert not service.kM_membership(s_grid, params_2_2)

    def test_claim_decompose(self, service: CertificateService, params_2_2: Params):
        """Test that a unit-mass vector splits into r parts of mass 1/r."""
        x = t_vector(params_2_2, {1: 1, 2: 2, 3: 2})

        decomposition = service.claim_decompose(x, params_2_2)

        assert decomposition.order == [1, 2, 3]
        assert [part.support for part in decomposition.parts] == [[1], [2, 3]]
        assert all(kraft_sum(part, 2) == Fraction(1, 2) for part in decomposition.parts)

    def test_claim_decompose_needs_unit_mass(self, service: CertificateService, params_2_2: Params):
        """Test that mass below 1 or a level-0 coordinate is rejected."""
        with pytest.raises(ValidationError):
            service.claim_decompose(t_vector(params_2_2, {1: 1}), params_2_2)
        with pytest.raises(ValidationError):
            service.claim_decompose(t_vector(params_2_2, {1: 0}), params_2_2)

    def test_build_kM_certificate(self, service: CertificateService, params_2_2: Params):
        """Test that a partial-mass member gets a disjoint certificate that replays it."""
        y = t_vector(params_2_2, {2: 1, 5: 3}, {5: -1})

        certificate = service.build_kM_certificate(y, params_2_2)

        assert certificate.mode == CertificateMode.DISJOINT
        assert service.verify_certificate(certificate, params_2_2).entries == y.entries

    @pytest.mark.parametrize("p,r", [(2.0, 2), (2.0, 4), (1.5, 3), (3.0, 2)])
    def test_random_members_round_trip(self, service: CertificateService, p: float, r: int):
        """Test builder and verifier agreement on random members and rejection of non-members."""
        params = derive_params(p, r)
        rng = np.random.default_rng(r * 31 + int(p * 10))
        for _ in range(30):
            y = random_member(rng, params)
            certificate = service.build_kM_certificate(y, params)
            assert service.verify_certificate(certificate, params).entries == y.entries

            bad = random_non_member(rng, params)
            assert not service.kM_membership(bad, params)
            with pytest.raises(ValidationError):
                service.build_kM_certificate(bad, params)

    def test_zero_vector(self, service: CertificateService, params_2_2: Params):
        """Test that the zero vector has no certificate."""
        with pytest.raises(ValidationError):
            service.build_kM_certificate(t_vector(params_2_2, {}), params_2_2)

    def test_zero_vector_is_member_without_certificate(self, service: CertificateService, params_2_2: Params):
        """Test that the zero vector passes the Kraft check but has no certificate."""
        zero = t_vector(params_2_2, {})

        assert service.kM_membership(zero, params_2_2)
        assert kraft_sum(zero, params_2_2.r) == 0
        with pytest.raises(ValidationError, match="no certificate"):
            service.build_kM_certificate(zero, params_2_2)


class TestSuccessiveSet:
    """Unit tests for the weight functional and successive certificates."""

    def test_phi_example(self, service: CertificateService, params_2_2: Params):
        """Test that Phi(1, 2, 1) with r=2 is 3/2."""
        m = ExponentSeq.parse("1,2,1")

        assert service.phi_exact(m, params_2_2) == Fraction(3, 2)
        assert service.phi(m, params_2_2) == 1.5

    def test_phi_short_sequences(self, service: CertificateService, params_2_2: Params):
        """Test that sequences of length at most 2 use the plain sum."""
        assert service.phi_exact(ExponentSeq(m=[1]), params_2_2) == Fraction(1, 2)
        assert service.phi_exact(ExponentSeq(m=[1, 1]), params_2_2) == 1

    def test_phi_additivity(self, service: CertificateService, params_2_4: Params):
        """Test that Phi splits exactly at a shared coordinate."""
        rng = np.random.default_rng(41)
        for _ in range(100):
            m = random_exponent_seq(rng, params_2_4.r)
            if len(m) < 3:
                continue
            i = int(rng.integers(1, len(m) - 1))
            left, right = m.window(0, i + 1), m.window(i, len(m))

            assert service.phi_exact(m, params_2_4) == service.phi_exact(left, params_2_4) + service.phi_exact(right, params_2_4)

    def test_phi_bounded_by_twice_mass(self, service: CertificateService, params_2_4: Params):
        """Test that Phi(m) <= 2 ||V(m)||_q^q."""
        rng = np.random.default_rng(43)
        for _ in range(100):
            m = random_exponent_seq(rng, params_2_4.r)

            assert service.phi_exact(m, params_2_4) <= 2 * kraft_sum(service.v_map(m, params_2_4), params_2_4.r)

    def test_v_map(self, service: CertificateService, params_2_2: Params):
        """Test that V(m) puts t^-m(i) at consecutive indices."""
        v = service.v_map(ExponentSeq.parse("1,2,1"), params_2_2, start=4)

        assert v.entries == {4: (1, -1), 5: (1, -2), 6: (1, -1)}

    def test_build_K_certificate(self, service: CertificateService, params_2_2: Params):
        """Test that a sequence with Phi <= 1 gets a successive certificate."""
        m = ExponentSeq.parse("2,3,3,2")

        certificate = service.build_K_certificate(m, params_2_2)

        assert certificate.mode == CertificateMode.SUCCESSIVE
        assert service.verify_certificate(certificate, params_2_2).entries == service.v_map(m, params_2_2).entries

    def test_build_K_certificate_placement(self, service: CertificateService, params_2_2: Params):
        """Test that indices and signs place the leaves."""
        m = ExponentSeq.parse("1,1")

        certificate = service.build_K_certificate(m, params_2_2, indices=[3, 9], signs=[-1, 1])

        assert service.verify_certificate(certificate, params_2_2).entries == {3: (-1, -1), 9: (1, -1)}

    def test_build_K_certificate_rejects(self, service: CertificateService, params_2_2: Params):
        """Test that Phi > 1 and non-increasing indices are rejected."""
        with pytest.raises(ValidationError):
            service.build_K_certificate(ExponentSeq.parse("1,2,1"), params_2_2)
        with pytest.raises(ValidationError):
            service.build_K_certificate(ExponentSeq.parse("1,1"), params_2_2, indices=[2, 2])

    def test_random_sequences(self, service: CertificateService, params_2_4: Params):
        """Test builder and verifier agreement on random sequences."""
        rng = np.random.default_rng(47)
        for _ in range(50):
            m = random_exponent_seq(rng, params_2_4.r)
            certificate = service.build_K_certificate(m, params_2_4)

            assert service.verify_certificate(certificate, params_2_4).entries == service.v_map(m, params_2_4).entries

    def test_exponent_seq_helpers(self):
        """Test shift, concatenation and windows."""
        m = ExponentSeq.parse("1, 2,3")

        assert m.shift(2).m == [3, 4, 5]
        assert m.concat(ExponentSeq(m=[7])).m == [1, 2, 3, 7]
        assert m.window(1, 3).m == [2, 3]
        assert len(m) == 3


class TestSmallMassAndThreeSplit:
    """Unit tests for certifying K^M members inside K."""

    def test_certify_small_mass(self, service: CertificateService, params_2_2: Params):
        """Test that mass 1/2 members are certified in successive mode."""
        y = t_vector(params_2_2, {1: 2, 4: 2}, {4: -1})

        certificate = service.certify_small_mass(y, params_2_2)

        assert certificate.mode == CertificateMode.SUCCESSIVE
        assert service.verify_certificate(certificate, params_2_2).entries == y.entries

    def test_certify_small_mass_rejects_heavy(self, service: CertificateService, params_2_2: Params):
        """Test that mass above 1/2 is rejected."""
        with pytest.raises(ValidationError):
            service.certify_small_mass(t_vector(params_2_2, {1: 1, 2: 2}), params_2_2)

    def test_three_split(self, service: CertificateService, params_2_2: Params):
        """Test that a unit-mass member cuts into consecutive certified pieces."""
        y = t_vector(params_2_2, {1: 1, 2: 2, 3: 2})

        split = service.three_split(y, params_2_2)

        assert [piece.support for piece in split.pieces] == [[1], [2, 3], []]
        assert split.certificates[2] is None
        for piece, certificate in zip(split.pieces[:2], split.certificates[:2]):
            assert certificate is not None
            assert service.verify_certificate(certificate, params_2_2).entries == piece.entries

    def test_three_split_single_leaf(self, service: CertificateService, params_2_2: Params):
        """Test that a level-0 member is one leaf."""
        split = service.three_split(t_vector(params_2_2, {7: 0}, {7: -1}), params_2_2)

        assert split.single_leaf
        assert split.certificates[0] is not None
        assert split.certificates[0].node.leaf == (-1, 7)

    def test_three_split_random(self, service: CertificateService, params_2_4: Params):
        """Test that pieces always sum back to the member."""
        rng = np.random.default_rng(53)
        for _ in range(40):
            y = random_member(rng, params_2_4, max_support=12, max_level=5)
            split = service.three_split(y, params_2_4)

            combined: dict[int, tuple[int, int]] = {}
            for piece in split.pieces:
                combined.update(piece.entries)
            assert combined == y.entries
            assert len(split.pieces) <= 3


class TestEnumeration:
    """Unit tests for bounded-depth enumeration of the norming sets."""

    def test_two_coordinates_depth_one(self, service: CertificateService, params_2_2: Params):
        """Test the count of patterns on two coordinates."""
        result = service.enumerate_K([1, 2], 1, CertificateMode.SUCCESSIVE, params_2_2)

        assert len(result.vectors) == 12
        assert not result.truncated

    def test_disjoint_enumeration_equals_kraft_ball(self, service: CertificateService, params_2_2: Params):
        """Test that depth-2 disjoint enumeration is every member with levels <= 2."""
        support = [1, 2, 3]
        expected = set()
        for size in range(1, 4):
            for subset in itertools.combinations(support, size):
                for levels in itertools.product(range(3), repeat=size):
                    for signs in itertools.product((1, -1), repeat=size):
                        y = t_vector(params_2_2, dict(zip(subset, levels)), dict(zip(subset, signs)))
                        if service.kM_membership(y, params_2_2):
                            expected.add(tuple(sorted(y.entries.items())))

        result = service.enumerate_K(support, 2, CertificateMode.DISJOINT, params_2_2)
        found = {tuple(sorted(v.entries.items())) for v in result.vectors}

        assert found == expected

    def test_successive_is_smaller(self, service: CertificateService, params_2_2: Params):
        """Test that K sits inside K^M and misses a non-consecutive grouping."""
        successive = service.enumerate_K([1, 2, 3], 2, CertificateMode.SUCCESSIVE, params_2_2)
        disjoint = service.enumerate_K([1, 2, 3], 2, CertificateMode.DISJOINT, params_2_2)
        succ = {tuple(sorted(v.entries.items())) for v in successive.vectors}
        disj = {tuple(sorted(v.entries.items())) for v in disjoint.vectors}
        interleaved = tuple(sorted(t_vector(params_2_2, {1: 2, 2: 1, 3: 2}).entries.items()))

        assert succ < disj
        assert interleaved in disj
        assert interleaved not in succ

    def test_cap_truncates(self, service: CertificateService, params_2_2: Params):
        """Test that the pattern cap stops the enumeration."""
        result = service.enumerate_K([1, 2, 3], 3, CertificateMode.DISJOINT, params_2_2, cap=20)

        assert result.truncated
        assert len(result.vectors) <= 20

    def test_support_guard(self, service: CertificateService, params_2_2: Params):
        """Test that supports above eight indices are refused before any work."""
        with pytest.raises(ValidationError) as info:
            service.enumerate_K(range(1, 10), 1, CertificateMode.DISJOINT, params_2_2)

        assert info.value.context["guard"] == 8

    @pytest.mark.parametrize("depth", [-1, 11])
    def test_depth_guard(self, service: CertificateService, params_2_2: Params, depth: int):
        """Test that depths outside [0, 10] are refused."""
        with pytest.raises(ValidationError):
            service.enumerate_K([1, 2], depth, CertificateMode.SUCCESSIVE, params_2_2)

    def test_cap_stops_before_building_every_chain(self, service: CertificateService, params_2_4: Params):
        """Test that a small cap on a wide support returns quickly and truncated."""
        result = service.enumerate_K(range(1, 9), 10, CertificateMode.DISJOINT, params_2_4, cap=50)

        assert result.truncated
        assert len(result.vectors) <= 50
