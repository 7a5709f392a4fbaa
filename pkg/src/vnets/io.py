"""JSON file formats for algebras, vector-valued matrices and models.

Algebra file::

    {"name": "quaternion", "dim": 4, "basis": ["1", "i", "j", "k"],
     "table": [[[1, 0, 0, 0], [0, 1, 0, 0], ...], ...]}

``table[i][j]`` is the coefficient vector of ``e_i e_j``; ``basis`` is optional.

Matrix file (component matrices per basis element, each row-major)::

    {"rows": 2, "cols": 3, "components": [A_1, ..., A_n], "algebra": {...}}

``algebra`` is optional; when present it uses the algebra file schema.

Model file::

    {"format": "vnets-model", "version": 1, "algebra": {...},
     "output_mode": "vector" | "real_output_weights" | "component",
     "output_weights": [[...]] | null, "component": k | null,
     "layers": [{"in_features": N, "out_features": M, "activation": "sigmoid",
                 "components": [W_1, ..., W_n], "bias": [[b_11, ..., b_1n], ...]}]}

Floats are written with ``repr`` precision, so a saved model reloads bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import Algebra, AlgebraError
from .layers import VMLP, DenseLayer
from .linalg import VMatrix

MODEL_FORMAT = "vnets-model"
MODEL_VERSION = 1


class FileFormatError(ValueError):
    """A file parsed but one of its fields is missing or malformed."""

    def __init__(self, field: str, problem: str):
        super().__init__(f"field '{field}': {problem}")
        self.field = field


def _require(d: dict, key: str, where: str = ""):
    name = f"{where}{key}"
    if not isinstance(d, dict) or key not in d:
        raise FileFormatError(name, "missing")
    return d[key]


def _array(value, field: str, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise FileFormatError(field, "not a rectangular numeric array") from None
    if shape is not None and arr.shape != tuple(shape):
        raise FileFormatError(field, f"expected shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(field, "contains non-finite values")
    return arr


def algebra_to_dict(A: Algebra) -> dict:
    return {
        "name": A.name,
        "dim": A.n,
        "basis": list(A.basis_labels),
        "table": A.p.tolist(),
    }


def algebra_from_dict(d: dict, where: str = "") -> Algebra:
    name = _require(d, "name", where)
    if not isinstance(name, str):
        raise FileFormatError(f"{where}name", "must be a string")
    dim = _require(d, "dim", where)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FileFormatError(f"{where}dim", "must be a positive integer")
    table = _array(_require(d, "table", where), f"{where}table", (dim, dim, dim))
    basis = d.get("basis") or ()
    if basis and (not isinstance(basis, list) or len(basis) != dim
                  or not all(isinstance(b, str) for b in basis)):
        raise FileFormatError(f"{where}basis", f"must be a list of {dim} strings")
    return Algebra(table, name=name, basis_labels=tuple(basis))


def matrix_to_dict(V: VMatrix, include_algebra: bool = False) -> dict:
    d = {
        "rows": V.rows,
        "cols": V.cols,
        "components": V.data.transpose(2, 0, 1).tolist(),
    }
    if include_algebra:
        d["algebra"] = algebra_to_dict(V.algebra)
    return d


def matrix_from_dict(d: dict, algebra: Algebra | None = None) -> VMatrix:
    if algebra is None:
        if "algebra" not in d:
            raise FileFormatError("algebra", "missing and no algebra given")
        algebra = algebra_from_dict(d["algebra"], "algebra.")
    rows = _require(d, "rows")
    cols = _require(d, "cols")
    for key, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise FileFormatError(key, "must be a positive integer")
    comps = _array(_require(d, "components"), "components", (algebra.n, rows, cols))
    return VMatrix.from_components(algebra, comps)


def model_to_dict(model: VMLP) -> dict:
    layers = []
    for layer in model.layers:
        layers.append({
            "in_features": layer.in_features,
            "out_features": layer.out_features,
            "activation": layer.act.kind,
            "components": layer.weight.data.transpose(2, 0, 1).tolist(),
            "bias": layer.bias.tolist(),
        })
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algebra": algebra_to_dict(model.algebra),
        "output_mode": model.output_mode,
        "output_weights": None if model.output_weights is None else np.asarray(model.output_weights).tolist(),
        "component": model.component,
        "layers": layers,
    }


def model_from_dict(d: dict) -> VMLP:
    if d.get("format") != MODEL_FORMAT:
        raise FileFormatError("format", f"expected {MODEL_FORMAT!r}")
    if d.get("version") != MODEL_VERSION:
        raise FileFormatError("version", f"unsupported version {d.get('version')!r}")
    algebra = algebra_from_dict(_require(d, "algebra"), "algebra.")
    n = algebra.n
    raw_layers = _require(d, "layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise FileFormatError("layers", "must be a non-empty list")
    layers = []
    for idx, spec in enumerate(raw_layers):
        where = f"layers[{idx}]."
        N = _require(spec, "in_features", where)
        M = _require(spec, "out_features", where)
        comps = _array(_require(spec, "components", where), f"{where}components", (n, M, N))
        bias = _array(_require(spec, "bias", where), f"{where}bias", (M, n))
        try:
            layer = DenseLayer(VMatrix.from_components(algebra, comps), bias, _require(spec, "activation", where))
        except ValueError as exc:
            raise FileFormatError(f"{where}activation", str(exc)) from None
        layers.append(layer)
    mode = _require(d, "output_mode")
    weights = d.get("output_weights")
    if weights is not None:
        weights = _array(weights, "output_weights")
    try:
        return VMLP(layers, mode, weights, d.get("component"))
    except (ValueError, AlgebraError) as exc:
        raise FileFormatError("output_mode", str(exc)) from None


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError("<document>", f"invalid JSON ({exc})") from None


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load_algebra(path) -> Algebra:
    return algebra_from_dict(_read_json(path))


def save_algebra(A: Algebra, path) -> None:
    _write_json(algebra_to_dict(A), path)


def load_matrix(path, algebra: Algebra | None = None) -> VMatrix:
    return matrix_from_dict(_read_json(path), algebra)


def save_matrix(V: VMatrix, path, include_algebra: bool = False) -> None:
    _write_json(matrix_to_dict(V, include_algebra), path)


def load_model(path) -> VMLP:
    return model_from_dict(_read_json(path))


def save_model(model: VMLP, path) -> None:
    _write_json(model_to_dict(model), path)
