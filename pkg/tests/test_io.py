import json

import numpy as np
import pytest

from vnets.algebra import builtin_algebra, random_algebra
from vnets.io import (
    FileFormatError,
    algebra_from_dict,
    algebra_to_dict,
    load_algebra,
    load_matrix,
    load_model,
    matrix_from_dict,
    model_to_dict,
    save_algebra,
    save_matrix,
    save_model,
)
from vnets.layers import VMLP, DenseLayer
from vnets.linalg import VMatrix
from vnets.training import vmlp_forward, vmlp_forward_emulated

from conftest import WORKED_A


def make_model(rng, mode="real_output_weights"):
    A = random_algebra(3, rng)
    layers = [
        DenseLayer(VMatrix(A, rng.standard_normal((4, 2, 3))), rng.standard_normal((4, 3)), "sigmoid"),
        DenseLayer(VMatrix(A, rng.standard_normal((2, 4, 3))), rng.standard_normal((2, 3)), "tanh"),
    ]
    alpha = rng.standard_normal((3, 2)) if mode == "real_output_weights" else None
    return VMLP(layers, mode, alpha, 2 if mode == "component" else None)


def test_algebra_round_trip(tmp_path):
    Q = builtin_algebra("quaternion")
    save_algebra(Q, tmp_path / "q.alg")
    back = load_algebra(tmp_path / "q.alg")
    assert np.array_equal(back.p, Q.p)
    assert back.name == "quaternion" and back.basis_labels == ("1", "i", "j", "k")


def test_algebra_schema_fields():
    d = algebra_to_dict(builtin_algebra("complex"))
    assert set(d) == {"name", "dim", "basis", "table"}
    # table[i][j] is the coefficient vector of e_i e_j
    assert d["table"][1][1] == [-1.0, 0.0]


def test_algebra_basis_optional():
    A = algebra_from_dict({"name": "x", "dim": 1, "table": [[[2.0]]]})
    assert A.basis_labels == ("e1",)


@pytest.mark.parametrize("doc,field", [
    ({"dim": 2, "table": []}, "name"),
    ({"name": "x", "table": []}, "dim"),
    ({"name": "x", "dim": 0, "table": []}, "dim"),
    ({"name": "x", "dim": 2}, "table"),
    ({"name": "x", "dim": 2, "table": [[[1, 0]]]}, "table"),
    ({"name": "x", "dim": 1, "table": [[["a"]]]}, "table"),
    ({"name": "x", "dim": 1, "table": [[[1]]], "basis": ["a", "b"]}, "basis"),
    ({"name": 3, "dim": 1, "table": [[[1]]]}, "name"),
])
def test_algebra_diagnostics_name_field(doc, field):
    with pytest.raises(FileFormatError) as info:
        algebra_from_dict(doc)
    assert info.value.field == field
    assert f"field '{field}'" in str(info.value)


def test_invalid_json(tmp_path):
    (tmp_path / "bad.alg").write_text("{not json")
    with pytest.raises(FileFormatError, match="invalid JSON"):
        load_algebra(tmp_path / "bad.alg")


def test_matrix_round_trip(tmp_path, quaternion):
    V = VMatrix(quaternion, WORKED_A)
    save_matrix(V, tmp_path / "a.json", include_algebra=True)
    back = load_matrix(tmp_path / "a.json")
    assert np.array_equal(back.data, V.data)
    save_matrix(V, tmp_path / "b.json")
    assert np.array_equal(load_matrix(tmp_path / "b.json", quaternion).data, V.data)


def test_matrix_components_layout(quaternion):
    d = json.loads(json.dumps(
        {"rows": 2, "cols": 3, "components": VMatrix(quaternion, WORKED_A).data.transpose(2, 0, 1).tolist()}
    ))
    assert d["components"][0] == [[1, 0, 0], [7, 9, 0]]
    assert np.array_equal(matrix_from_dict(d, quaternion).data, WORKED_A)


@pytest.mark.parametrize("doc,field", [
    ({"rows": 1, "cols": 1, "components": [[[1]]] * 4}, "algebra"),
    ({"cols": 1, "components": [[[1]]] * 4, "algebra": None}, "algebra.name"),
])
def test_matrix_missing_algebra(doc, field):
    with pytest.raises(FileFormatError) as info:
        matrix_from_dict(doc)
    assert info.value.field == field


@pytest.mark.parametrize("doc,field", [
    ({"cols": 1, "components": [[[1]]] * 4}, "rows"),
    ({"rows": 1, "cols": 0, "components": [[[1]]] * 4}, "cols"),
    ({"rows": 1, "cols": 1, "components": [[[1]]] * 3}, "components"),
])
def test_matrix_diagnostics(doc, field, quaternion):
    with pytest.raises(FileFormatError) as info:
        matrix_from_dict(doc, quaternion)
    assert info.value.field == field


@pytest.mark.parametrize("mode", ["vector", "real_output_weights", "component"])
def test_model_reload_bit_exact(mode, tmp_path, rng):
    model = make_model(rng, mode)
    save_model(model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    X = rng.standard_normal((7, 2, 3))
    assert np.array_equal(vmlp_forward_emulated(back, X), vmlp_forward_emulated(model, X))
    assert np.array_equal(vmlp_forward(back, X[0]), vmlp_forward(model, X[0]))
    assert model_to_dict(back) == model_to_dict(model)


def test_model_diagnostics(tmp_path, rng):
    d = model_to_dict(make_model(rng))
    for mutate, field in [
        (lambda m: m.update(format="other"), "format"),
        (lambda m: m.update(version=9), "version"),
        (lambda m: m["layers"][1].pop("bias"), "layers[1].bias"),
        (lambda m: m["layers"][0].update(activation="softmax"), "layers[0].activation"),
        (lambda m: m["layers"][0].update(components=[[[0.0]]]), "layers[0].components"),
        (lambda m: m.update(layers=[]), "layers"),
        (lambda m: m["algebra"].pop("table"), "algebra.table"),
        (lambda m: m.update(output_weights=[[1.0]]), "output_mode"),
    ]:
        doc = json.loads(json.dumps(d))
        mutate(doc)
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FileFormatError) as info:
            load_model(path)
        assert info.value.field == field
