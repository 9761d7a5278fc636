"""Data models for params, vectors, norms, certificates and experiments."""

from tsirelson.models.certificates import (
    Certificate,
    CertificateMode,
    CertificateNode,
    ClaimDecomposition,
    EnumerationResult,
    ExponentSeq,
    ThreeSplit,
)
from tsirelson.models.experiments import (
    ApproximResult,
    BlockSequence,
    ComparisonResult,
    Envelope,
    LevelProfile,
    RunConfig,
    SelftestReport,
    StabReport,
    SuiteResult,
    TrialRecord,
)
from tsirelson.models.norms import (
    ClassicalNormResult,
    LevelAssignment,
    ModifiedNormResult,
    OracleResult,
    SplitTree,
)
from tsirelson.models.params import Params, ParamsInput
from tsirelson.models.vectors import GridBase, GridVector, IntervalSet, SparseVector

__all__ = [
    "ApproximResult",
    "BlockSequence",
    "Certificate",
    "CertificateMode",
    "CertificateNode",
    "ClaimDecomposition",
    "ClassicalNormResult",
    "ComparisonResult",
    "EnumerationResult",
    "Envelope",
    "ExponentSeq",
    "GridBase",
    "GridVector",
    "IntervalSet",
    "LevelAssignment",
    "LevelProfile",
    "ModifiedNormResult",
    "OracleResult",
    "Params",
    "ParamsInput",
    "RunConfig",
    "SelftestReport",
    "SplitTree",
    "StabReport",
    "SuiteResult",
    "ThreeSplit",
    "TrialRecord",
]
