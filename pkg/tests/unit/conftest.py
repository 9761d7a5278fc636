import pytest


@pytest.fixture(autouse=True)
def setup_unit_test(monkeypatch):
    """Pin environment variables so unit tests ignore a local .env."""
    monkeypatch.setenv("TSIRELSON_USE_MOCK_NORMS", "false")
    monkeypatch.setenv("TSIRELSON_TOL", "1e-9")
