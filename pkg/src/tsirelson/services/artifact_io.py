"""JSON and CSV interchange for vectors, params, certificates and reports."""

import csv
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError as PydanticValidationError

from tsirelson.errors import InputFormatError
from tsirelson.models import (
    Certificate,
    CertificateNode,
    GridBase,
    GridVector,
    LevelAssignment,
    Params,
    ParamsInput,
    SparseVector,
    SplitTree,
    StabReport,
)
from tsirelson.services.vector_ops import base_value, derive_params

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["trial", "lp_norm", "classical", "modified", "rho", "within_bounds"]


def load_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputFormatError(f"file not found: {path}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise InputFormatError(f"malformed JSON in {path}: {e.msg}", path=str(path), line=e.lineno) from e


def parse_params(payload: Any) -> Params:
    try:
        raw = ParamsInput.model_validate(payload)
    except PydanticValidationError as e:
        raise InputFormatError(f"params must look like {{\"p\": 2.0, \"r\": 4}}: {e}") from e
    return derive_params(raw.p, raw.r)


def load_params(path: Path) -> Params:
    return parse_params(load_json(path))


def parse_vector(payload: Any, params: Params | None = None) -> SparseVector | GridVector:
    """Decode the sparse or grid vector format."""
    if not isinstance(payload, dict) or "format" not in payload:
        raise InputFormatError("vector JSON needs a 'format' field")
    try:
        if payload["format"] == "sparse":
            return SparseVector(entries={int(i): float(v) for i, v in payload["entries"]})
        if payload["format"] == "grid":
            if params is None:
                raise InputFormatError("grid vectors need params to fix the base")
            base = GridBase(payload["base"])
            return GridVector(
                base=base,
                base_value=base_value(params, base),
                entries={int(i): (int(sign), int(e)) for i, sign, e in payload["entries"]},
            )
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"malformed vector entries: {e}") from e
    raise InputFormatError(f"unknown vector format '{payload['format']}'")


def load_vector(path: Path, params: Params | None = None) -> SparseVector | GridVector:
    return parse_vector(load_json(path), params)


def load_grid_vector(path: Path, params: Params, base: GridBase) -> GridVector:
    vector = load_vector(path, params)
    if not isinstance(vector, GridVector) or vector.base != base:
        raise InputFormatError(f"expected a grid vector with base '{base.value}'")
    return vector


def load_basis(path: Path) -> list[SparseVector]:
    """``{"blocks": [<sparse vector>, ...]}``."""
    payload = load_json(path)
    if not isinstance(payload, dict) or not isinstance(payload.get("blocks"), list):
        raise InputFormatError("basis JSON needs a 'blocks' list")
    blocks = []
    for block in payload["blocks"]:
        vector = parse_vector(block)
        if not isinstance(vector, SparseVector):
            raise InputFormatError("basis blocks must use the sparse format")
        blocks.append(vector)
    return blocks


def vector_to_json(vector: SparseVector | GridVector) -> dict[str, Any]:
    if isinstance(vector, GridVector):
        return {
            "format": "grid",
            "base": vector.base.value,
            "entries": [[i, sign, e] for i, (sign, e) in vector.entries.items()],
        }
    return {"format": "sparse", "entries": [[i, v] for i, v in vector.entries.items()]}


def split_tree_to_json(tree: SplitTree | None) -> dict[str, Any] | None:
    return None if tree is None else tree.model_dump(exclude_none=True)


def levels_to_json(witness: LevelAssignment, slack: float) -> dict[str, Any]:
    return {
        "levels": [[i, j] for i, j in sorted(witness.levels.items())],
        "value": witness.value,
        "slack": slack,
    }


def parse_certificate(payload: Any) -> Certificate:
    def node(raw: Any) -> CertificateNode:
        if isinstance(raw, dict) and "leaf" in raw:
            sign, index = raw["leaf"]
            return CertificateNode.make_leaf(int(sign), int(index))
        if isinstance(raw, dict) and isinstance(raw.get("children"), list):
            return CertificateNode.make_internal([node(child) for child in raw["children"]])
        raise InputFormatError("certificate node needs 'leaf' or 'children'")

    try:
        return Certificate(mode=payload["mode"], node=node(payload["node"]))
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"malformed certificate: {e}") from e


def load_certificate(path: Path) -> Certificate:
    """A bare certificate, or the envelope written by ``certify``."""
    payload = load_json(path)
    if isinstance(payload, dict) and isinstance(payload.get("result"), dict):
        payload = payload["result"].get("certificate")
    return parse_certificate(payload)


def envelope(
    tool: str, version: str, params: Params | None, config: dict[str, Any], result: Any
) -> dict[str, Any]:
    """Common wrapper embedded in every output document."""
    return {
        "tool": tool,
        "version": version,
        "params": params.echo() if params is not None else None,
        "config": config,
        "result": result,
    }


def dumps(payload: Any) -> str:
    """Deterministic JSON; floats keep their shortest round-trip repr."""
    return json.dumps(payload, ensure_ascii=False, indent=2)


def save_json(payload: Any, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(payload))
        f.write("\n")
    logger.info(f"Wrote {path}")


def save_csv(report: StabReport, path: Path) -> None:
    """Plot-ready per-trial table."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in report.trials:
            writer.writerow(
                [
                    record.trial,
                    repr(record.lp_norm),
                    "" if record.classical is None else repr(record.classical),
                    repr(record.modified),
                    repr(record.rho),
                    str(record.within_bounds).lower(),
                ]
            )
    logger.info(f"Wrote {path}")
