"""Command-line entry point for tsirelson."""

import argparse
import json
import logging
import sys
from importlib import metadata
from typing import Callable, NoReturn, Sequence

from tsirelson.errors import TsirelsonError, UsageError
from tsirelson.models import RunConfig
from tsirelson.services.artifact_io import dumps, envelope

from . import commands
from .dependencies import get_app_settings, override_settings

# Configure logging
logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

HANDLERS: dict[str, Callable[[argparse.Namespace, RunConfig], commands.CommandResult]] = {
    "norm": commands.norm,
    "certify": commands.certify,
    "decompose": commands.decompose,
    "phi": commands.phi,
    "split3": commands.split3,
    "oracle": commands.oracle,
    "experiment": commands.experiment,
    "selftest": commands.selftest,
}


def get_safe_version(package_name: str, fallback: str = "0.1.0") -> str:
    """
    Safely get the version of a package.

    Args:
        package_name: Name of the package
        fallback: Default version if retrieval fails

    Returns:
        Version string
    """
    try:
        return metadata.version(package_name)
    except metadata.PackageNotFoundError:
        return fallback


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(message, prog=self.prog)


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--params", help="params JSON, e.g. {\"p\": 2.0, \"r\": 4}")
    common.add_argument("--tol", type=float, help="numeric tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, help="root seed (default 0)")
    common.add_argument("--support-budget", type=int, help="largest evaluated support (default 2000)")
    common.add_argument("--cell-budget", type=int, help="classical DP cell budget")
    common.add_argument("--workers", type=int, help="worker processes for experiment trials")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = _ArgumentParser(prog="tsirelson", description="Tsirelson-type norms and certificates.")
    parser.add_argument("--version", action="version", version=get_safe_version("tsirelson"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", parents=[common], help="evaluate a norm")
    p.add_argument("kind", choices=["classical", "modified"])
    p.add_argument("--vector")
    p.add_argument("--witness", help="write the optimal witness here")

    p = sub.add_parser("certify", parents=[common], help="build and verify a norming-set certificate")
    p.add_argument("kind", choices=["kM", "K", "verify"])
    p.add_argument("--vector")
    p.add_argument("--m", help="exponent sequence for K, e.g. \"1,2,1\"")
    p.add_argument("--certificate", help="certificate JSON to replay with 'verify'")

    p = sub.add_parser("decompose", parents=[common], help="split a t-grid member into r parts of equal mass")
    p.add_argument("--vector")

    p = sub.add_parser("phi", parents=[common], help="weight functional and exponent vector of m")
    p.add_argument("--m", required=True)

    p = sub.add_parser("split3", parents=[common], help="cut a member into three certified pieces")
    p.add_argument("--vector")

    p = sub.add_parser("oracle", parents=[common], help="brute-force cross-checks")
    p.add_argument("kind", choices=["classical", "modified", "enumerate"])
    p.add_argument("--vector")
    p.add_argument("--depth", type=int)
    p.add_argument("--support", help="comma-separated indices for enumerate")
    p.add_argument("--mode", choices=["successive", "disjoint"], default="successive")

    p = sub.add_parser("experiment", parents=[common], help="seeded numerical experiments")
    p.add_argument("kind", choices=["stabilization"])
    p.add_argument("--basis", help="block basis JSON")
    p.add_argument("--basis-gen", choices=["unit", "random"])
    p.add_argument("--width", type=int, default=3, help="block width for --basis-gen random")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--blocks", type=int, default=2, help="averaged vectors to combine")
    p.add_argument("--out")
    p.add_argument("--csv")

    p = sub.add_parser("selftest", parents=[common], help="run the invariant suites")
    p.add_argument("--suite", action="append", help="suite name (repeatable)")
    p.add_argument("--n", type=int, help="cases per suite")
    p.add_argument("--out", help="write the JSON report here")

    return parser


def _configure(args: argparse.Namespace) -> RunConfig:
    override_settings(
        tol=args.tol,
        seed=args.seed,
        support_budget=args.support_budget,
        classical_cell_budget=args.cell_budget,
        workers=args.workers,
    )
    settings = get_app_settings()
    level = {0: settings.log_level.upper(), 1: "INFO"}.get(args.verbose, "DEBUG")
    logging.getLogger().setLevel(level)
    return RunConfig(
        params_path=args.params,
        tol=settings.tol,
        seed=settings.seed,
        support_budget=settings.support_budget,
        classical_cell_budget=settings.classical_cell_budget,
        workers=settings.workers,
        verbosity=level,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; 0 on success, 1 on failed checks, 2 on errors."""
    try:
        args = build_parser().parse_args(argv)
        config = _configure(args)
        command = HANDLERS[args.command](args, config)
        settings = get_app_settings()
        version = get_safe_version("tsirelson")
        commands.write_files(command, settings.app_name, version, config)
    except SystemExit as e:
        return int(e.code or 0)
    except TsirelsonError as e:
        logger.debug(f"{e.code}: {e.detail}")
        print(json.dumps(e.to_payload()), file=sys.stderr)
        return 2

    if args.command == "selftest":
        print(commands.format_table(command.result))
        for suite in command.result["suites"]:
            if suite["failing_case"] is not None:
                print(json.dumps({"suite": suite["name"], "case": suite["failing_case"]}), file=sys.stderr)
    else:
        print(dumps(envelope(settings.app_name, version, command.params, config.model_dump(), command.result)))
    return command.exit_code


def run() -> None:
    sys.exit(main())
