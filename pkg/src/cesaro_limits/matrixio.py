"""JSON matrix files.

Wire format: {"d": n, "entries": [[[re, im], ...], ...]} with entries
row-major and every scalar a finite [re, im] pair.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MatrixFileError
from .linalg import as_matrix

__all__ = ["matrix_to_obj", "obj_to_matrix", "load_matrix", "save_matrix"]


def matrix_to_obj(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    return {
        "d": int(M.shape[0]),
        "entries": [
            [[float(z.real), float(z.imag)] for z in row] for row in M
        ],
    }


def obj_to_matrix(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise MatrixFileError('expected an object with "d" and "entries"')
    entries = obj["entries"]
    try:
        rows = [[complex(float(e[0]), float(e[1])) for e in row] for row in entries]
    except (TypeError, ValueError, IndexError) as exc:
        raise MatrixFileError(f"entries must be [re, im] pairs: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise MatrixFileError("entries must form a nonempty square array")
    d = int(obj.get("d", len(rows)))
    if d != len(rows):
        raise MatrixFileError(f'"d" = {d} does not match {len(rows)} rows')
    return as_matrix(rows, d_rows=d, d_cols=d)


def load_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"invalid JSON in {path}: {exc}") from exc
    return obj_to_matrix(obj)


def save_matrix(path, M: np.ndarray) -> None:
    Path(path).write_text(json.dumps(matrix_to_obj(M), indent=2, sort_keys=True))
