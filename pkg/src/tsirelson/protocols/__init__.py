"""Protocol definitions for tsirelson services."""

from .certificate_service_protocol import CertificateServiceProtocol
from .classical_norm_protocol import ClassicalNormProtocol
from .modified_norm_protocol import ModifiedNormProtocol
from .selftest_service_protocol import SelftestServiceProtocol
from .stabilization_service_protocol import StabilizationServiceProtocol

__all__ = [
    "CertificateServiceProtocol",
    "ClassicalNormProtocol",
    "ModifiedNormProtocol",
    "SelftestServiceProtocol",
    "StabilizationServiceProtocol",
]
