"""Service-level mocks for tsirelson testing."""

from .mock_norm_service import MockNormService

__all__ = ["MockNormService"]
