"""End-to-end fixtures running the installed CLI as a subprocess."""

import json
import os
import subprocess
import sys
from pathlib import Path
from typing import Callable

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli_env() -> dict[str, str]:
    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join([str(ROOT / "src"), str(ROOT), env.get("PYTHONPATH", "")])
    env["TSIRELSON_USE_MOCK_NORMS"] = "false"
    return env


@pytest.fixture()
def run_cli(cli_env: dict[str, str], tmp_path: Path) -> Callable[..., subprocess.CompletedProcess[str]]:
    """Run ``python -m tsirelson`` with the given arguments inside tmp_path."""

    def _run(*args: str) -> subprocess.CompletedProcess[str]:
        return subprocess.run(
            [sys.executable, "-m", "tsirelson", *args],
            capture_output=True,
            text=True,
            cwd=tmp_path,
            env=cli_env,
            timeout=300,
        )

    return _run


@pytest.fixture()
def params_file(tmp_path: Path) -> Callable[[float, int], Path]:
    def _write(p: float, r: int) -> Path:
        path = tmp_path / f"params_p{p}_r{r}.json"
        path.write_text(json.dumps({"p": p, "r": r}), encoding="utf-8")
        return path

    return _write
