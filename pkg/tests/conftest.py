"""Shared pytest fixtures for the tsirelson project."""

import json
from pathlib import Path
from typing import Any, Callable

import pytest

from tsirelson.cli.dependencies import reset_services
from tsirelson.models import Params
from tsirelson.services.vector_ops import derive_params


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment():
    """Setup test environment with dotenv loading."""
    try:
        import dotenv

        dotenv.load_dotenv()
    except ImportError:
        pass


@pytest.fixture(autouse=True)
def reset_app_state():
    """Reset service singletons and CLI overrides before each test."""
    reset_services()
    yield
    reset_services()


@pytest.fixture()
def params_2_2() -> Params:
    return derive_params(2.0, 2)


@pytest.fixture()
def params_2_4() -> Params:
    return derive_params(2.0, 4)


@pytest.fixture()
def write_json(tmp_path: Path) -> Callable[[str, Any], Path]:
    """Write a JSON document under tmp_path and return its path."""

    def _write(name: str, payload: Any) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
