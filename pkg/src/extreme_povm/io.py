"""JSON documents: the ``povm-json`` format and a float-exact writer.

Complex entries are ``[re, im]`` pairs; matrices are row-major lists of rows.
Floats are written with 17 significant digits so every double round-trips.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .operator_core import DEFAULT, Povm, Tolerances, validate_povm

__all__ = [
    "dumps",
    "matrix_to_json",
    "matrix_from_json",
    "povm_to_dict",
    "povm_from_dict",
    "read_povm",
    "write_povm",
    "read_json",
    "write_json",
]


def _encode(obj, indent: int, level: int) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        if s.lstrip("-").isdigit():
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = "\n" + " " * (indent * (level + 1)) if indent else ""
        end = "\n" + " " * (indent * level) if indent else ""
        items = [
            f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
            for k, v in obj.items()
        ]
        return "{" + ",".join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        # numeric leaves (complex pairs, rows of pairs) stay on one line
        flat = all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq) or all(
            isinstance(x, (list, tuple))
            and all(not isinstance(y, (dict, list, tuple)) for y in x)
            for x in seq
        )
        if flat or not indent:
            return "[" + ", ".join(_encode(x, 0, 0) for x in seq) + "]"
        pad = "\n" + " " * (indent * (level + 1))
        end = "\n" + " " * (indent * level)
        return "[" + ",".join(pad + _encode(x, indent, level + 1) for x in seq) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialise plain JSON data, writing floats with 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def povm_to_dict(povm: Povm) -> dict:
    return {"dim": povm.dim, "effects": [matrix_to_json(e) for e in povm.effects]}


def povm_from_dict(doc: dict, tol: Tolerances = DEFAULT) -> Povm:
    if not isinstance(doc, dict) or "dim" not in doc or "effects" not in doc:
        raise ValueError('povm-json needs "dim" and "effects" keys')
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError(f'"dim" must be a positive integer, got {dim!r}')
    return validate_povm([matrix_from_json(e) for e in doc["effects"]], dim, tol=tol)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(doc, path) -> None:
    Path(path).write_text(dumps(doc))


def read_povm(path, tol: Tolerances = DEFAULT) -> Povm:
    return povm_from_dict(read_json(path), tol=tol)


def write_povm(povm: Povm, path) -> None:
    write_json(povm_to_dict(povm), path)
