"""Protocol for the stabilization experiment service."""

from typing import Any, Protocol, Sequence

from tsirelson.models import (
    ApproximResult,
    BlockSequence,
    ComparisonResult,
    GridVector,
    Params,
    SparseVector,
    StabReport,
    TrialRecord,
)


class StabilizationServiceProtocol(Protocol):
    """Interface for the comparison checks, averaging and two-sided estimates."""

    def check_comparing1(self, x: GridVector, params: Params) -> ComparisonResult:
        """Check ``||x||_p^p <= |x|_{p,r}`` on an s-grid vector of p-norm at most 1."""
        ...

    def check_comparing2(self, x: GridVector, params: Params) -> ComparisonResult:
        """Check ``|x|_{p,r} <= 1 + ||x||_p^p / t`` on an s-grid vector."""
        ...

    def approxim_construct(
        self, seq: BlockSequence, eps: float, params: Params, count: int = 1
    ) -> ApproximResult:
        """
        Average level-matched blocks.

        Args:
            seq: Alpha-grid blocks with p-norm in [alpha^-2, alpha^-1].
            eps: Profile tolerance.
            params: Parameter bundle.
            count: Number of output vectors, each from fresh input blocks.

        Returns:
            ApproximResult with assembled outputs, components and checks.

        Raises:
            InsufficientInputError: Too few (admitted) input blocks.
            ConstructionError: An output leaves its guaranteed bounds.
        """
        ...

    def stab_verify(
        self, seq: BlockSequence, coeffs: Sequence[float], params: Params, trial: int = 0
    ) -> TrialRecord:
        """Evaluate the two-sided estimate on one coefficient vector."""
        ...

    async def run_pipeline(
        self,
        basis: Sequence[SparseVector],
        params: Params,
        trials: int,
        seed: int,
        eps: float,
        blocks: int = 2,
        config: dict[str, Any] | None = None,
    ) -> StabReport:
        """Run the full experiment and return its report."""
        ...
