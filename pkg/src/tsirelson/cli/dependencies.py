"""Dependency injection for the tsirelson CLI."""

from functools import lru_cache
from typing import Any, Optional

from tsirelson.config import AppSettings
from tsirelson.protocols import (
    CertificateServiceProtocol,
    ClassicalNormProtocol,
    ModifiedNormProtocol,
)
from tsirelson.services import (
    CertificateService,
    ClassicalNormService,
    ModifiedNormService,
    SelftestService,
    StabilizationService,
)

# Global service instances (lazily initialized)
_classical_norm_service: Optional[ClassicalNormProtocol] = None
_modified_norm_service: Optional[ModifiedNormProtocol] = None
_certificate_service: Optional[CertificateServiceProtocol] = None
_stabilization_service: Optional[StabilizationService] = None
_selftest_service: Optional[SelftestService] = None

# CLI flags layered over environment settings
_overrides: dict[str, Any] = {}


@lru_cache()
def get_app_settings() -> AppSettings:
    """Get application settings (cached), with CLI overrides applied."""
    return AppSettings().model_copy(update=_overrides)


def override_settings(**values: Any) -> None:
    """Apply CLI flag values on top of the environment; drops built services."""
    reset_services()
    _overrides.update({key: value for key, value in values.items() if value is not None})


def get_classical_norm_service() -> ClassicalNormProtocol:
    """Get the classical norm service instance."""
    global _classical_norm_service

    settings = get_app_settings()

    if _classical_norm_service is None:
        if settings.use_mock_norms:
            from dev.mocks.services.mock_norm_service import MockNormService

            _classical_norm_service = MockNormService()
        else:
            _classical_norm_service = ClassicalNormService(
                cell_budget=settings.classical_cell_budget,
                oracle_max_support=settings.classical_oracle_max_support,
            )

    return _classical_norm_service


def get_modified_norm_service() -> ModifiedNormProtocol:
    """Get the modified norm service instance."""
    global _modified_norm_service

    settings = get_app_settings()

    if _modified_norm_service is None:
        if settings.use_mock_norms:
            from dev.mocks.services.mock_norm_service import MockNormService

            _modified_norm_service = MockNormService()
        else:
            _modified_norm_service = ModifiedNormService(
                tol=settings.tol,
                oracle_max_support=settings.modified_oracle_max_support,
            )

    return _modified_norm_service


def get_certificate_service() -> CertificateServiceProtocol:
    """Get the certificate service instance."""
    global _certificate_service

    if _certificate_service is None:
        settings = get_app_settings()
        _certificate_service = CertificateService(enumeration_cap=settings.enumeration_cap)

    return _certificate_service


def get_stabilization_service() -> StabilizationService:
    """Get the stabilization service instance."""
    global _stabilization_service

    if _stabilization_service is None:
        settings = get_app_settings()
        _stabilization_service = StabilizationService(
            classical=get_classical_norm_service(),
            modified=get_modified_norm_service(),
            certificates=get_certificate_service(),
            tol=settings.tol,
            support_budget=settings.support_budget,
            workers=settings.workers,
        )

    return _stabilization_service


def get_selftest_service() -> SelftestService:
    """Get the selftest service instance."""
    global _selftest_service

    if _selftest_service is None:
        settings = get_app_settings()
        _selftest_service = SelftestService(
            classical=get_classical_norm_service(),
            modified=get_modified_norm_service(),
            certificates=get_certificate_service(),
            stabilization=get_stabilization_service(),
            tol=settings.tol,
        )

    return _selftest_service


def reset_services() -> None:
    """Reset service instances and overrides (for testing)."""
    global _classical_norm_service, _modified_norm_service, _certificate_service
    global _stabilization_service, _selftest_service
    _classical_norm_service = None
    _modified_norm_service = None
    _certificate_service = None
    _stabilization_service = None
    _selftest_service = None
    _overrides.clear()
    get_app_settings.cache_clear()
