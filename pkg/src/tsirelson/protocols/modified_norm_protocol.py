"""Protocol for the disjoint-splitting (modified) norm."""

from typing import Protocol

from tsirelson.models import ModifiedNormResult, OracleResult, Params, SparseVector


class ModifiedNormProtocol(Protocol):
    """Interface for computing |x|_{p,r} and its brute-force cross-check."""

    def modified_norm(
        self, x: SparseVector, params: Params, tol: float | None = None
    ) -> ModifiedNormResult:
        """
        Compute the modified norm as a level-assignment optimum.

        Args:
            x: Vector to evaluate.
            params: Parameter bundle.
            tol: Accepted violation of the Holder upper bound.

        Returns:
            ModifiedNormResult with value, LevelAssignment witness and slack.
        """
        ...

    def modified_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        """Evaluate the depth-truncated disjoint-partition recursion."""
        ...
