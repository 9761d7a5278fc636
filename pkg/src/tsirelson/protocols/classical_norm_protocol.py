"""Protocol for the successive-splitting (classical) norm."""

from typing import Protocol

from tsirelson.models import ClassicalNormResult, OracleResult, Params, SparseVector


class ClassicalNormProtocol(Protocol):
    """Interface for computing ||x||_{p,r} and its brute-force cross-check."""

    def classical_norm(
        self, x: SparseVector, params: Params, with_witness: bool = True
    ) -> ClassicalNormResult:
        """
        Compute the classical norm of a finite-support vector.

        Args:
            x: Vector to evaluate.
            params: Parameter bundle.
            with_witness: Also reconstruct the optimal SplitTree.

        Returns:
            ClassicalNormResult with the value and, if requested, the witness.
        """
        ...

    def classical_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        """Maximise the pairing with successive-mode norming functionals of bounded depth."""
        ...
