"""End-to-end tests running ``python -m tsirelson`` as a subprocess."""

import json
from pathlib import Path

import pytest


class TestCli:
    """End-to-end tests for the command-line surface."""

    def test_version(self, run_cli):
        """Test that --version prints and exits 0."""
        completed = run_cli("--version")

        assert completed.returncode == 0
        assert completed.stdout.strip()

    def test_norm_classical(self, run_cli, params_file, tmp_path: Path):
        """Test the classical norm document on stdout."""
        vector = tmp_path / "x.json"
        vector.write_text(json.dumps({"format": "sparse", "entries": [[1, 1.0], [2, 1.0], [3, 1.0]]}))

        completed = run_cli("norm", "classical", "--params", str(params_file(2.0, 2)), "--vector", str(vector))

        assert completed.returncode == 0, completed.stderr
        document = json.loads(completed.stdout)
        assert document["result"]["value"] == pytest.approx(1.7071067811865475, rel=1e-15)
        assert document["config"]["seed"] == 0

    def test_phi(self, run_cli, params_file):
        """Test phi(1, 2, 1) with r=2."""
        completed = run_cli("phi", "--params", str(params_file(2.0, 2)), "--m", "1,2,1")

        assert completed.returncode == 0, completed.stderr
        assert json.loads(completed.stdout)["result"]["phi"] == 1.5

    def test_selftest_subset(self, run_cli):
        """Test that a selftest subset prints its table and passes."""
        completed = run_cli("selftest", "--suite", "core", "--suite", "kraft-certificates", "--n", "5")

        assert completed.returncode == 0, completed.stderr
        assert "kraft-certificates" in completed.stdout
        assert "all suites passed" in completed.stdout

    @pytest.mark.slow
    def test_experiment(self, run_cli, params_file, tmp_path: Path):
        """Test the stabilization experiment with report and CSV outputs."""
        out = tmp_path / "out" / "report.json"
        table = tmp_path / "out" / "report.csv"

        completed = run_cli(
            "experiment", "stabilization", "--params", str(params_file(2.0, 4)), "--basis-gen", "unit",
            "--eps", "0.1", "--trials", "3", "--out", str(out), "--csv", str(table),
        )

        assert completed.returncode == 0, completed.stderr
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["tool"] == "tsirelson"
        assert len(report["result"]["trials"]) == 3
        assert table.read_text(encoding="utf-8").splitlines()[0] == "trial,lp_norm,classical,modified,rho,within_bounds"

    @pytest.mark.slow
    def test_same_seed_gives_identical_bytes(self, run_cli, params_file, tmp_path: Path):
        """Test that selftest and experiment repeat byte for byte under a fixed seed."""
        params = str(params_file(2.0, 4))
        out = tmp_path / "report.json"
        table = tmp_path / "report.csv"
        selftest_report = tmp_path / "selftest.json"
        experiment = (
            "experiment", "stabilization", "--params", params, "--basis-gen", "unit", "--eps", "0.1",
            "--trials", "5", "--seed", "7", "--out", str(out), "--csv", str(table),
        )
        selftest = (
            "selftest", "--suite", "sandwich", "--suite", "closure", "--n", "10", "--seed", "7",
            "--out", str(selftest_report),
        )

        runs = []
        for _ in range(2):
            first = run_cli(*experiment)
            second = run_cli(*selftest)
            assert first.returncode == 0, first.stderr
            assert second.returncode == 0, second.stderr
            runs.append(
                (first.stdout, out.read_bytes(), table.read_bytes(), second.stdout, selftest_report.read_bytes())
            )

        assert runs[0] == runs[1]

    def test_error_exit_code(self, run_cli, params_file):
        """Test that invalid params exit 2 with a JSON error line on stderr."""
        completed = run_cli("phi", "--params", str(params_file(1.0, 2)), "--m", "1")

        assert completed.returncode == 2
        assert completed.stdout == ""
        assert json.loads(completed.stderr.strip().splitlines()[-1])["error"] == "E_VALIDATION"
