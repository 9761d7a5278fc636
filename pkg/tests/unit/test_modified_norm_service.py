"""Unit tests for the modified norm service."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from tsirelson.errors import ValidationError
from tsirelson.models import LevelAssignment, Params, SparseVector
from tsirelson.services.classical_norm_service import ClassicalNormService
from tsirelson.services.modified_norm_service import ModifiedNormService
from tsirelson.services.samplers import random_vector
from tsirelson.services.vector_ops import derive_params, dual_pair, lp_norm


def induced_functional(x: SparseVector, witness: LevelAssignment, params: Params) -> SparseVector:
    return SparseVector(
        entries={i: math.copysign(params.t**-j, x.entries[i]) for i, j in witness.levels.items()}
    )


class TestModifiedNorm:
    """Unit tests for the top-down level assignment."""

    @pytest.fixture
    def service(self) -> ModifiedNormService:
        return ModifiedNormService()

    def test_zero_vector(self, service: ModifiedNormService, params_2_2: Params):
        """Test that the zero vector has norm 0 and an empty witness."""
        result = service.modified_norm(SparseVector(), params_2_2)

        assert result.value == 0.0
        assert result.witness.levels == {}

    def test_unit_vector(self, service: ModifiedNormService, params_2_4: Params):
        """Test that e_1 sits alone at level 0."""
        result = service.modified_norm(SparseVector(entries={1: 1.0}), params_2_4)

        assert result.value == 1.0
        assert result.witness.levels == {1: 0}

    def test_r_ones_reach_holder_bound(self, service: ModifiedNormService, params_2_4: Params):
        """Test that r equal coordinates give s = r^(1/p), all on level 1."""
        result = service.modified_norm(SparseVector.from_values([1.0] * 4), params_2_4)

        assert result.value == pytest.approx(params_2_4.s, rel=1e-12)
        assert result.witness.levels == {1: 1, 2: 1, 3: 1, 4: 1}

    def test_three_ones_p2_r2(self, service: ModifiedNormService, params_2_2: Params):
        """Test that (1, 1, 1) with p=2, r=2 gives 1 + 1/sqrt(2) at levels (1, 2, 2)."""
        result = service.modified_norm(SparseVector.from_values([1.0, 1.0, 1.0]), params_2_2)

        assert result.value == pytest.approx(1.0 + 1.0 / math.sqrt(2.0), rel=1e-12)
        assert result.witness.levels == {1: 1, 2: 2, 3: 2}
        assert result.slack == 0.0

    def test_witness_is_feasible_and_pairs_to_value(self, service: ModifiedNormService, params_2_4: Params):
        """Test the Kraft sum and the pairing with the induced functional."""
        rng = np.random.default_rng(17)
        for _ in range(30):
            x = random_vector(rng, 40, params_2_4)
            result = service.modified_norm(x, params_2_4)

            assert result.witness.is_kraft_feasible(params_2_4.r)
            pairing = dual_pair(x, induced_functional(x, result.witness, params_2_4))
            assert pairing == pytest.approx(result.value, rel=1e-12)

    def test_permutation_and_sign_invariance(self, service: ModifiedNormService, params_2_4: Params):
        """Test that reordering and sign flips leave the value unchanged."""
        values = [0.9, -0.2, 0.45, 1.3, -0.7, 0.05]
        x = SparseVector.from_values(values)
        shuffled = SparseVector.from_values([abs(v) for v in reversed(values)], start=10)

        assert service.modified_norm(shuffled, params_2_4).value == service.modified_norm(x, params_2_4).value

    def test_large_support_mixes_two_levels(self, service: ModifiedNormService, params_2_4: Params):
        """Test that 1536 ones split 853 / 683 between levels 5 and 6."""
        x = SparseVector.from_values([1.0] * 1536)

        result = service.modified_norm(x, params_2_4)

        assert result.value == pytest.approx(853 / 32 + 683 / 64, rel=1e-12)
        assert result.witness.is_kraft_feasible(params_2_4.r)
        assert sorted(set(result.witness.levels.values())) == [5, 6]
        assert len(result.witness.levels) == 1536

    def test_large_support_pairs_to_value(self, service: ModifiedNormService, params_2_4: Params):
        """Test feasibility and pairing on a long random vector."""
        rng = np.random.default_rng(41)
        x = SparseVector.from_values(rng.uniform(-1.0, 1.0, size=1200).tolist())

        result = service.modified_norm(x, params_2_4)

        assert result.witness.is_kraft_feasible(params_2_4.r)
        pairing = dual_pair(x, induced_functional(x, result.witness, params_2_4))
        assert pairing == pytest.approx(result.value, rel=1e-9)
        assert result.value <= lp_norm(x, params_2_4.p) + 1e-9

    @seed(23)
    @settings(max_examples=100, deadline=None)
    @given(values=st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=1, max_size=40))
    def test_sandwich(self, values: list[float]):
        """Test classical <= modified <= l_p and modified <= 3 classical."""
        params = derive_params(2.0, 4)
        x = SparseVector.from_values(values)

        classical = ClassicalNormService().classical_norm(x, params, with_witness=False).value
        modified = ModifiedNormService().modified_norm(x, params).value

        assert classical <= modified + 1e-9
        assert modified <= lp_norm(x, params.p) + 1e-9
        assert modified <= 3 * classical + 1e-9


class TestModifiedOracle:
    """Unit tests for the disjoint-partition recursion oracle."""

    @pytest.fixture
    def service(self) -> ModifiedNormService:
        return ModifiedNormService()

    @pytest.mark.parametrize("p,r", [(2.0, 2), (2.0, 4), (1.5, 3), (3.0, 2)])
    def test_matches_optimizer(self, service: ModifiedNormService, p: float, r: int):
        """Test that the full-depth oracle agrees with the level assignment."""
        params = derive_params(p, r)
        rng = np.random.default_rng(int(p * 100) + r)
        for _ in range(10):
            x = random_vector(rng, 5, params)

            oracle = service.modified_norm_oracle(x, params)
            value = service.modified_norm(x, params).value

            assert oracle.exact
            assert abs(value - oracle.value) <= 1e-6 * (1 + oracle.value)

    def test_unit_vector(self, service: ModifiedNormService, params_2_2: Params):
        """Test that e_1 evaluates to 1."""
        assert service.modified_norm_oracle(SparseVector(entries={1: 1.0}), params_2_2).value == 1.0

    def test_negative_entries(self, service: ModifiedNormService, params_2_2: Params):
        """Test that the oracle only sees magnitudes."""
        x = SparseVector.from_values([-1.0, 0.5, -0.25])
        y = SparseVector.from_values([1.0, 0.5, 0.25])

        assert service.modified_norm_oracle(x, params_2_2).value == service.modified_norm_oracle(y, params_2_2).value

    def test_truncated_depth(self, service: ModifiedNormService, params_2_2: Params):
        """Test that a truncated recursion brackets the norm with its slack."""
        x = SparseVector.from_values([1.0, 1.0, 1.0, 1.0])

        oracle = service.modified_norm_oracle(x, params_2_2, depth=1)
        value = service.modified_norm(x, params_2_2).value

        assert not oracle.exact
        assert oracle.value <= value + 1e-12
        assert value <= oracle.value + oracle.slack

    def test_support_guard(self, params_2_2: Params):
        """Test that oversized supports are rejected."""
        service = ModifiedNormService(oracle_max_support=4)

        with pytest.raises(ValidationError):
            service.modified_norm_oracle(SparseVector.from_values([1.0] * 5), params_2_2)
