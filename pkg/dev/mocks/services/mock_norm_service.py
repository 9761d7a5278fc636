"""Mock norm service for pipeline plumbing tests."""

import math

from tsirelson.models import (
    ClassicalNormResult,
    LevelAssignment,
    ModifiedNormResult,
    OracleResult,
    Params,
    SparseVector,
)
from tsirelson.protocols import ClassicalNormProtocol, ModifiedNormProtocol
from tsirelson.services.vector_ops import lp_norm


class MockNormService(ClassicalNormProtocol, ModifiedNormProtocol):
    """Returns the sup norm as classical and the l_p norm as modified."""

    def classical_norm(
        self, x: SparseVector, params: Params, with_witness: bool = True
    ) -> ClassicalNormResult:
        return ClassicalNormResult(value=lp_norm(x, math.inf), witness=None)

    def classical_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        return OracleResult(value=lp_norm(x, math.inf), depth=0, slack=0.0, exact=False, patterns=0)

    def modified_norm(
        self, x: SparseVector, params: Params, tol: float | None = None
    ) -> ModifiedNormResult:
        value = lp_norm(x, params.p)
        return ModifiedNormResult(
            value=value,
            witness=LevelAssignment(levels={i: 0 for i in x.support}, value=value),
            slack=0.0,
        )

    def modified_norm_oracle(
        self, x: SparseVector, params: Params, depth: int | None = None
    ) -> OracleResult:
        return OracleResult(value=lp_norm(x, params.p), depth=0, slack=0.0, exact=False, patterns=0)


# Type check
_classical: ClassicalNormProtocol = MockNormService()
_modified: ModifiedNormProtocol = MockNormService()
