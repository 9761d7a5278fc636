"""Subcommand handlers; each returns the ``result`` block of the output envelope."""

import argparse
import asyncio
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tsirelson.errors import InputFormatError, UsageError, ValidationError
from tsirelson.models import (
    CertificateMode,
    ExponentSeq,
    GridBase,
    GridVector,
    Params,
    RunConfig,
    SparseVector,
)
from tsirelson.services.artifact_io import (
    envelope,
    levels_to_json,
    load_certificate,
    load_basis,
    load_grid_vector,
    load_params,
    load_vector,
    save_csv,
    save_json,
    split_tree_to_json,
    vector_to_json,
)
from tsirelson.services.stabilization_service import generate_basis
from tsirelson.services.vector_ops import grid_to_sparse

from .dependencies import (
    get_certificate_service,
    get_classical_norm_service,
    get_modified_norm_service,
    get_selftest_service,
    get_stabilization_service,
)

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    params: Params | None
    result: Any
    exit_code: int = 0
    files: dict[str, Any] = field(default_factory=dict)


def _params(args: argparse.Namespace) -> Params:
    if args.params is None:
        raise UsageError(f"'{args.command}' needs --params")
    return load_params(Path(args.params))


def _sparse(args: argparse.Namespace, params: Params) -> SparseVector:
    if args.vector is None:
        raise UsageError(f"'{args.command}' needs --vector")
    vector = load_vector(Path(args.vector), params)
    return grid_to_sparse(vector) if isinstance(vector, GridVector) else vector


def _exponents(text: str) -> ExponentSeq:
    try:
        return ExponentSeq.parse(text)
    except ValueError as e:
        raise InputFormatError(f"--m must be comma-separated integers, got '{text}'") from e


def _t_grid(args: argparse.Namespace, params: Params) -> GridVector:
    if args.vector is None:
        raise UsageError(f"'{args.command}' needs --vector")
    return load_grid_vector(Path(args.vector), params, GridBase.T)


def norm(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    x = _sparse(args, params)
    if args.kind == "classical":
        classical = get_classical_norm_service().classical_norm(x, params, with_witness=args.witness is not None)
        result: dict[str, Any] = {"kind": "classical", "value": classical.value}
        witness: Any = split_tree_to_json(classical.witness)
    else:
        modified = get_modified_norm_service().modified_norm(x, params, config.tol)
        result = {"kind": "modified", "value": modified.value, "slack": modified.slack}
        witness = levels_to_json(modified.witness, modified.slack)

    files = {}
    if args.witness is not None:
        config.outputs["witness"] = args.witness
        files[args.witness] = witness
        result["witness"] = args.witness
    return CommandResult(params=params, result=result, files=files)


def certify(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    service = get_certificate_service()
    if args.kind == "verify":
        return _verify_certificate(args, params)
    if args.kind == "kM":
        y = _t_grid(args, params)
        certificate = service.build_kM_certificate(y, params)
    elif args.m is not None:
        m = _exponents(args.m)
        certificate = service.build_K_certificate(m, params)
        y = service.v_map(m, params)
    else:
        y = _t_grid(args, params)
        if not y.entries:
            raise ValidationError("the zero vector has no certificate")
        levels = y.levels()
        certificate = service.build_K_certificate(
            ExponentSeq(m=[levels[i] for i in y.support]),
            params,
            indices=y.support,
            signs=[y.entries[i][0] for i in y.support],
        )

    replay = service.verify_certificate(certificate, params)
    return CommandResult(
        params=params,
        result={
            "vector": vector_to_json(y),
            "certificate": certificate.to_json(),
            "depth": certificate.node.depth(),
            "verified": replay.entries == y.entries,
        },
    )


def _verify_certificate(args: argparse.Namespace, params: Params) -> CommandResult:
    if args.certificate is None:
        raise UsageError("'certify verify' needs --certificate")
    certificate = load_certificate(Path(args.certificate))
    replay = get_certificate_service().verify_certificate(certificate, params)
    result: dict[str, Any] = {
        "mode": certificate.mode.value,
        "vector": vector_to_json(replay),
        "depth": certificate.node.depth(),
    }
    if args.vector is not None:
        result["verified"] = replay.entries == _t_grid(args, params).entries
    return CommandResult(params=params, result=result, exit_code=0 if result.get("verified", True) else 1)


def decompose(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    decomposition = get_certificate_service().claim_decompose(_t_grid(args, params), params)
    return CommandResult(
        params=params,
        result={
            "order": decomposition.order,
            "parts": [vector_to_json(part) for part in decomposition.parts],
        },
    )


def phi(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    service = get_certificate_service()
    m = _exponents(args.m)
    exact = service.phi_exact(m, params)
    return CommandResult(
        params=params,
        result={
            "m": m.m,
            "phi": service.phi(m, params),
            "phi_exact": f"{exact.numerator}/{exact.denominator}",
            "certifiable": exact <= 1,
            "v": vector_to_json(service.v_map(m, params)),
        },
    )


def split3(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    split = get_certificate_service().three_split(_t_grid(args, params), params)
    return CommandResult(
        params=params,
        result={
            "single_leaf": split.single_leaf,
            "pieces": [
                {
                    "vector": vector_to_json(piece),
                    "certificate": None if certificate is None else certificate.to_json(),
                }
                for piece, certificate in zip(split.pieces, split.certificates)
            ],
        },
    )


def oracle(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    if args.kind == "enumerate":
        if args.support is None:
            raise UsageError("'oracle enumerate' needs --support")
        try:
            support = [int(v) for v in args.support.split(",") if v.strip()]
        except ValueError as e:
            raise InputFormatError(f"--support must be comma-separated indices, got '{args.support}'") from e
        enumeration = get_certificate_service().enumerate_K(
            support, args.depth if args.depth is not None else 1, CertificateMode(args.mode), params
        )
        return CommandResult(
            params=params,
            result={
                "mode": enumeration.mode.value,
                "support": enumeration.support,
                "depth": enumeration.depth,
                "truncated": enumeration.truncated,
                "count": len(enumeration.vectors),
                "vectors": [vector_to_json(v) for v in enumeration.vectors],
            },
        )

    x = _sparse(args, params)
    if args.kind == "classical":
        value = get_classical_norm_service().classical_norm_oracle(x, params, args.depth)
    else:
        value = get_modified_norm_service().modified_norm_oracle(x, params, args.depth)
    return CommandResult(params=params, result={"kind": args.kind, **value.model_dump()})


def experiment(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args)
    service = get_stabilization_service()
    if (args.basis is None) == (args.basis_gen is None):
        raise UsageError("give exactly one of --basis or --basis-gen")
    if args.basis is not None:
        basis = load_basis(Path(args.basis))
    else:
        count = service.required_count(args.eps, params, args.blocks)
        basis = generate_basis(args.basis_gen, count, seed=config.seed, width=args.width)

    run_config = config.model_dump()
    run_config.update({"trials": args.trials, "eps": args.eps, "blocks": args.blocks})
    report = asyncio.run(
        service.run_pipeline(basis, params, args.trials, config.seed, args.eps, args.blocks, config=run_config)
    )
    if args.csv is not None:
        save_csv(report, Path(args.csv))
        config.outputs["csv"] = args.csv

    summary = {
        "trials": len(report.trials),
        "min_rho": report.min_rho,
        "max_rho": report.max_rho,
        "lambda_hat": report.lambda_hat,
        "lambda_bound": report.lambda_bound,
        "passed": report.passed,
    }
    files = {}
    if args.out is not None:
        config.outputs["report"] = args.out
        files[args.out] = report.model_dump(mode="json")
    else:
        summary["report"] = report.model_dump(mode="json")
    return CommandResult(params=params, result=summary, exit_code=0 if report.passed else 1, files=files)


def selftest(args: argparse.Namespace, config: RunConfig) -> CommandResult:
    params = _params(args) if args.params is not None else None
    report = get_selftest_service().run(args.suite, args.n, config.seed)
    files = {}
    if args.out is not None:
        config.outputs["report"] = args.out
        files[args.out] = report.model_dump(mode="json")
    return CommandResult(
        params=params,
        result=report.model_dump(mode="json"),
        exit_code=0 if report.passed else 1,
        files=files,
    )


def format_table(report: dict[str, Any]) -> str:
    """Fixed-width pass/fail table for the selftest report."""
    rows = [f"{'suite':<20} {'cases':>7} {'fail':>6}  status  checks"]
    for suite in report["suites"]:
        status = "PASS" if suite["passed"] else "FAIL"
        rows.append(f"{suite['name']:<20} {suite['cases']:>7} {suite['failures']:>6}  {status:<6}  {suite['label']}")
    rows.append("all suites passed" if report["passed"] else "FAILED")
    return "\n".join(rows)


def write_files(command: CommandResult, tool: str, version: str, config: RunConfig) -> None:
    for path, payload in command.files.items():
        save_json(envelope(tool, version, command.params, config.model_dump(), payload), Path(path))
