"""JSON state files.

Schema (``format`` 1)::

    {"format": 1, "dim_a": 2, "dim_b": 2,
     "matrix": [[[re, im], ...], ...]}

Rows use the A-major composite index b + dim_b * a. Floats are written with
``repr``, which round-trips doubles exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import PtMomentError, StateFileError
from .linalg import BipartiteState

FORMAT = 1


def state_to_dict(state: BipartiteState) -> dict:
    m = np.asarray(state.matrix)
    return {
        "format": FORMAT,
        "dim_a": state.dim_a,
        "dim_b": state.dim_b,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def state_from_dict(obj) -> BipartiteState:
    if not isinstance(obj, dict):
        raise StateFileError("top level must be a JSON object")
    fmt = obj.get("format", FORMAT)
    if fmt != FORMAT:
        raise StateFileError(f"unsupported format {fmt!r}, expected {FORMAT}")
    try:
        dim_a, dim_b = int(obj["dim_a"]), int(obj["dim_b"])
        raw = obj["matrix"]
    except KeyError as exc:
        raise StateFileError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise StateFileError("dim_a and dim_b must be integers") from None
    if dim_a < 1 or dim_b < 1:
        raise StateFileError("dim_a and dim_b must be positive")
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise StateFileError("matrix must be a nested array of [re, im] number pairs") from None
    d = dim_a * dim_b
    if arr.shape != (d, d, 2):
        raise StateFileError(f"matrix must have shape ({d}, {d}, 2) for a {dim_a}x{dim_b} system, got {arr.shape}")
    try:
        return BipartiteState(dim_a, dim_b, arr[..., 0] + 1j * arr[..., 1])
    except PtMomentError as exc:
        raise StateFileError(f"invalid state: {exc}") from None


def write_state(path, state: BipartiteState) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n")


def read_state(path) -> BipartiteState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno}") from None
    return state_from_dict(obj)
