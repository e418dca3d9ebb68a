"""Reading and writing fitted models as JSON documents.

The on-disk document stores points row-major alongside heights, the log
partition value, the normalization flag, a seed and config echo, and the
fit diagnostics. Floats are encoded as shortest round-tripping decimals,
so write-then-read reproduces every numeric bit-for-bit.
"""

import json

import numpy as np

from .errors import ParseError
from .fit import Model
from .tent import PointSet

SCHEMA_VERSION = 1


def _plain(value):
    """Recursively convert numpy containers and scalars to JSON-ready types."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def model_to_document(model: Model, *, seed=None, config=None) -> dict:
    """Serializable document for ``model`` with a seed and config echo."""
    ps = model.point_set
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": ps.dim,
        "count": ps.count,
        "points": _plain(ps.points.T),
        "heights": _plain(model.heights),
        "log_partition": float(model.log_partition),
        "normalized": bool(model.normalized),
        "seed": None if seed is None else int(seed),
        "config": _plain(config) if config is not None else None,
        "diagnostics": _plain(model.diagnostics),
    }


def document_to_model(doc: dict) -> Model:
    """Rebuild a model from a document, checking shape and version."""
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported model schema version {version!r}")
    try:
        dim = int(doc["dim"])
        count = int(doc["count"])
        rows = np.asarray(doc["points"], dtype=float)
        heights = np.asarray(doc["heights"], dtype=float)
        log_partition = float(doc["log_partition"])
        normalized = bool(doc["normalized"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc}") from exc
    if rows.shape != (count, dim):
        raise ParseError(
            f"points have shape {rows.shape}, expected ({count}, {dim})"
        )
    if heights.shape != (count,):
        raise ParseError(f"expected {count} heights, got {heights.shape}")
    diagnostics = doc.get("diagnostics") or {}
    if not isinstance(diagnostics, dict):
        raise ParseError("diagnostics must be a JSON object")
    return Model(
        PointSet.from_rows(rows),
        heights,
        log_partition,
        normalized=normalized,
        diagnostics=diagnostics,
    )


def write_model(path, model: Model, *, seed=None, config=None) -> None:
    document = model_to_document(model, seed=seed, config=config)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")


def read_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON in model file: {exc}", row=exc.lineno, column=exc.colno
        ) from exc
    except OSError as exc:
        raise ParseError(f"cannot read model file: {exc}") from exc


def read_model(path) -> Model:
    return document_to_model(read_document(path))
