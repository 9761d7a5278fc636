"""Protocol for norming-set certificates."""

from fractions import Fraction
from typing import Protocol, Sequence

from tsirelson.models import (
    Certificate,
    CertificateMode,
    ClaimDecomposition,
    EnumerationResult,
    ExponentSeq,
    GridVector,
    Params,
    ThreeSplit,
)


class CertificateServiceProtocol(Protocol):
    """Interface for building, replaying and enumerating certificate trees."""

    def verify_certificate(self, certificate: Certificate, params: Params) -> GridVector:
        """
        Replay the closure rules bottom-up.

        Args:
            certificate: Tree to replay.
            params: Parameter bundle (r bounds the children per node).

        Returns:
            The root vector as an exact t-grid vector.

        Raises:
            CertificateError: At the first node that breaks a rule.
        """
        ...

    def kM_membership(self, y: GridVector, params: Params) -> bool:
        """Exact membership test for the disjoint norming set."""
        ...

    def claim_decompose(self, x: GridVector, params: Params) -> ClaimDecomposition:
        """Split a unit-mass member into r parts of q-norm 1/t."""
        ...

    def build_kM_certificate(self, y: GridVector, params: Params) -> Certificate:
        """Disjoint-mode certificate for a member."""
        ...

    def phi(self, m: ExponentSeq, params: Params) -> float:
        """Weight functional of an exponent sequence."""
        ...

    def phi_exact(self, m: ExponentSeq, params: Params) -> Fraction:
        """Weight functional as an exact rational."""
        ...

    def v_map(self, m: ExponentSeq, params: Params, start: int = 1) -> GridVector:
        """Place ``t^{-m(i)}`` at consecutive positions."""
        ...

    def build_K_certificate(
        self,
        m: ExponentSeq,
        params: Params,
        indices: Sequence[int] | None = None,
        signs: Sequence[int] | None = None,
    ) -> Certificate:
        """Successive-mode certificate for ``V(m)`` when ``Phi(m) <= 1``."""
        ...

    def certify_small_mass(self, y: GridVector, params: Params) -> Certificate:
        """Successive-mode certificate for a member of q-mass at most 1/2."""
        ...

    def three_split(self, y: GridVector, params: Params) -> ThreeSplit:
        """Cut a member into three consecutive pieces, each certified."""
        ...

    def enumerate_K(
        self,
        support: Sequence[int],
        depth: int,
        mode: CertificateMode,
        params: Params,
        cap: int | None = None,
    ) -> EnumerationResult:
        """Enumerate certificate evaluations of bounded depth."""
        ...
