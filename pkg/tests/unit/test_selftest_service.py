"""Unit tests for the built-in property suites."""

import pytest

from tsirelson.cli.dependencies import get_selftest_service
from tsirelson.errors import BudgetExceededError, ValidationError
from tsirelson.services import selftest_service
from tsirelson.services.selftest_service import SelftestService

FAST_SUITES = ["core", "classical-oracle", "modified-oracle", "kraft-certificates", "phi-certificates"]


class TestSelftestService:
    """Unit tests for suite dispatch and reporting."""

    @pytest.fixture
    def service(self) -> SelftestService:
        return get_selftest_service()

    def test_fast_suites_pass(self, service: SelftestService):
        """Test that the real services pass the fast suites at a small size."""
        report = service.run(FAST_SUITES, n=5, seed=0)

        assert [s.name for s in report.suites] == FAST_SUITES
        assert report.passed
        assert all(s.cases > 0 for s in report.suites)

    def test_closure_and_invariance_suites_pass(self, service: SelftestService):
        """Test the closure, invariance, restriction and round-trip suites at a small size."""
        names = ["closure", "invariance", "restriction", "grid-roundtrip"]

        report = service.run(names, n=3, seed=1)

        assert [s.name for s in report.suites] == names
        assert report.passed
        assert all(s.cases > 0 for s in report.suites)

    def test_kraft_enumeration_covers_every_small_pattern(self, service: SelftestService):
        """Test that support 4 with exponents up to 3 checks all 6560 patterns for r = 2 and r = 3."""
        report = service.run(["kraft-enumeration"], seed=0)

        (suite,) = report.suites
        assert suite.passed
        assert suite.cases == 2 * (9**4 - 1 + 2)

    def test_grid_roundtrip_reaches_exponent_512(self, service: SelftestService, mocker):
        """Test that the round-trip suite drives exponents out to +-512."""
        spy = mocker.spy(selftest_service, "grid_to_sparse")

        report = service.run(["grid-roundtrip"], n=4, seed=2)

        assert report.passed
        extremes = {max(abs(e) for _, e in call.args[0].entries.values()) for call in spy.call_args_list}
        assert extremes == {512}

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "suite,n",
        [
            ("classical-oracle", 200),
            ("modified-oracle", 200),
            ("sandwich", 1000),
            ("kraft-certificates", 300),
            ("phi-certificates", 300),
            ("comparison", 500),
            ("approximation", 1),
            ("stabilization", 100),
        ],
    )
    def test_acceptance_sizes(self, service: SelftestService, suite: str, n: int):
        """Test every suite at its full acceptance size."""
        report = service.run([suite], n=n, seed=0)

        assert report.passed, report.suites[0].failing_case

    def test_unknown_suite(self, service: SelftestService):
        """Test that unknown suite names are rejected up front."""
        with pytest.raises(ValidationError) as info:
            service.run(["core", "fuzz"])

        assert "fuzz" in info.value.detail

    def test_deterministic(self, service: SelftestService):
        """Test that the same seed gives the same report."""
        first = service.run(["modified-oracle"], n=4, seed=3)
        second = service.run(["modified-oracle"], n=4, seed=3)

        assert first.model_dump() == second.model_dump()

    def test_domain_error_becomes_failing_case(self, service: SelftestService, mocker):
        """Test that a domain error inside a suite is recorded, not raised."""
        mocker.patch.object(service, "_suite_core", side_effect=BudgetExceededError("too big"))

        report = service.run(["core", "phi-certificates"], n=3)

        core, phi = report.suites
        assert not core.passed
        assert core.failing_case == {"error": "E_BUDGET", "message": "too big"}
        assert phi.passed
        assert not report.passed
