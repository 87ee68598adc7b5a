"""JSON serialization of matrices and instance files.

Matrices are stored as ``{"rows", "cols", "re", "im"}`` with row-major nested
lists.  Python's ``json`` writes floats with ``repr`` so binary64 values
round-trip exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import GammaKitError, ShapeError
from .pairs import OperatorPair

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "pair_to_instance",
    "instance_to_pair",
    "load_json",
    "dump_json",
    "InstanceFormatError",
]


class InstanceFormatError(GammaKitError, ValueError):
    """Malformed instance or matrix document."""


def matrix_to_json(M):
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {M.shape}")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": M.real.tolist(),
        "im": M.imag.tolist(),
    }


def matrix_from_json(doc):
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        re = np.array(doc["re"], dtype=float).reshape(rows, cols)
        im = np.array(doc.get("im", np.zeros((rows, cols)).tolist()), dtype=float)
        im = im.reshape(rows, cols)
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad matrix document: {exc}") from exc
    if rows < 0 or cols < 0:
        raise InstanceFormatError("negative dimensions")
    # Assign parts directly: re + 1j * im would not preserve signed zeros.
    M = np.empty((rows, cols), dtype=np.complex128)
    M.real = re
    M.imag = im
    if not np.all(np.isfinite(M)):
        raise InstanceFormatError("matrix has non-finite entries")
    return M


def pair_to_instance(pair, meta=None):
    return {
        "S": matrix_to_json(pair.S),
        "P": matrix_to_json(pair.P),
        "meta": dict(meta or {}),
    }


def instance_to_pair(doc, cfg=None):
    from .numerics import DEFAULT_CONFIG

    if not isinstance(doc, dict) or "S" not in doc or "P" not in doc:
        raise InstanceFormatError("instance must contain 'S' and 'P'")
    S = matrix_from_json(doc["S"])
    P = matrix_from_json(doc["P"])
    pair = OperatorPair.from_matrices(S, P, cfg or DEFAULT_CONFIG)
    return pair, doc.get("meta", {})


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj, fh=None, path=None):
    text = json.dumps(obj, indent=None, allow_nan=False)
    if path is not None:
        with open(path, "w", encoding="utf-8") as out:
            out.write(text + "\n")
    elif fh is not None:
        fh.write(text + "\n")
    return text
