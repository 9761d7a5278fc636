"""Service implementations for tsirelson."""

from .certificate_service import CertificateService
from .classical_norm_service import ClassicalNormService
from .modified_norm_service import ModifiedNormService
from .selftest_service import SelftestService
from .stabilization_service import StabilizationService

__all__ = [
    "CertificateService",
    "ClassicalNormService",
    "ModifiedNormService",
    "SelftestService",
    "StabilizationService",
]
