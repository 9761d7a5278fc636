import pytest


@pytest.fixture(autouse=True)
def real_norms_for_integration_tests(monkeypatch):
    """Integration tests exercise the real norm services."""
    monkeypatch.setenv("TSIRELSON_USE_MOCK_NORMS", "false")
    monkeypatch.setenv("TSIRELSON_WORKERS", "1")
