import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vnets.algebra import builtin_algebra
from vnets.cli import main
from vnets.io import load_model, save_matrix
from vnets.linalg import VMatrix, big_left_matrix, phi_matrix, vmat_mul_direct

from conftest import WORKED_ML, WORKED_PHI_Y

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def machine_blocks(text):
    """Parse 'label rows cols' headers followed by numeric rows."""
    lines = text.strip().splitlines()
    blocks, i = {}, 0
    while i < len(lines):
        *label, r, c = lines[i].split()
        r, c = int(r), int(c)
        blocks[" ".join(label)] = np.array([[float(v) for v in lines[i + 1 + k].split()] for k in range(r)])
        i += r + 1
    return blocks


# --- inspect --------------------------------------------------------------


def test_inspect_quaternion(capsys):
    code, out, err = run(capsys, "inspect", "--builtin", "quaternion")
    assert code == 0 and not err
    assert "commutative: no" in out and "associative: yes" in out
    assert "identity: 1\n" in out and "non-degenerate: yes" in out
    assert "i -1  k -j" in out


def test_inspect_real_all_true(capsys):
    _, out, _ = run(capsys, "inspect", "--builtin", "real", "--format", "machine")
    fields = dict(line.split(" ", 1) for line in out.splitlines() if not line[0].isdigit() and " " in line)
    for key in ("commutative", "associative", "hypercomplex", "nondegenerate"):
        assert fields[key] == "1"


def test_inspect_dual_file(capsys):
    code, out, _ = run(capsys, "inspect", "--file", DATA / "dual.alg", "--format", "machine")
    assert code == 0
    assert "nondegenerate 0\n" in out and "singular_b 1\n" in out
    _, human, _ = run(capsys, "inspect", "--file", DATA / "dual.alg")
    assert "singular B_k for k = 1" in human


def test_inspect_export_round_trip(capsys, tmp_path):
    run(capsys, "inspect", "--builtin", "quaternion", "--export", tmp_path / "q.alg")
    code, out, _ = run(capsys, "inspect", "--file", tmp_path / "q.alg", "--format", "machine")
    _, ref, _ = run(capsys, "inspect", "--builtin", "quaternion", "--format", "machine")
    assert code == 0 and out == ref


def test_inspect_malformed_names_field(capsys, tmp_path):
    bad = tmp_path / "bad.alg"
    bad.write_text(json.dumps({"name": "x", "dim": 2, "table": [[1, 2]]}))
    code, out, err = run(capsys, "inspect", "--file", bad)
    assert code != 0 and not out
    assert err.startswith("vnets: error:") and "'table'" in err and err.count("\n") == 1


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "inspect", "--file", tmp_path / "nope.alg")
    assert code != 0 and not out and "vnets: error" in err


# --- mul ------------------------------------------------------------------


@pytest.mark.parametrize("x,y,expected", [
    ("0,1,0,0", "0,0,1,0", "0 0 0 1"),
    ("1,0,0,0", "0.5,-2,3,7", "0.5 -2 3 7"),
    ("1,2,3,4", "5,6,7,8", "-60 12 30 24"),
])
def test_mul(capsys, x, y, expected):
    code, out, _ = run(capsys, "mul", "--builtin", "quaternion", x, y, "--format", "machine")
    assert code == 0 and out.strip() == expected


def test_mul_human(capsys):
    _, out, _ = run(capsys, "mul", "--builtin", "quaternion", "0,1,0,0", "0,0,1,0")
    assert out.strip().endswith("= k")


def test_mul_length_mismatch(capsys):
    code, out, err = run(capsys, "mul", "--builtin", "quaternion", "1,2,3", "1,2,3,4")
    assert code != 0 and not out and "vnets: error" in err


def test_mul_needs_algebra(capsys):
    code, out, err = run(capsys, "mul", "1", "2")
    assert code != 0 and not out and err


# --- emulate --------------------------------------------------------------


def test_emulate_worked_example_digit_exact(capsys):
    code, out, _ = run(capsys, "emulate", DATA / "quaternion_A.json", DATA / "quaternion_x.json",
                       "--format", "machine")
    assert code == 0
    blocks = machine_blocks(out)
    assert np.array_equal(blocks["M_L(A)"], WORKED_ML)
    assert np.array_equal(blocks["phi(B)"][:, 0], np.arange(1, 13))
    assert np.array_equal(blocks["phi(C)"][:, 0], WORKED_PHI_Y)
    assert out.splitlines()[1] == "1 -2 0 0 0 -3 -4 0 0 0 -5 -6"


def test_emulate_human(capsys):
    _, out, _ = run(capsys, "emulate", DATA / "quaternion_A.json", DATA / "quaternion_x.json")
    assert "-176 + 45i + 96j + 11k" in out and "-306 - 3i + 140j + 363k" in out


def test_emulate_identity(capsys, tmp_path):
    Q = builtin_algebra("quaternion")
    save_matrix(VMatrix(Q, [[[1, 0, 0, 0]]]), tmp_path / "I.json")
    save_matrix(VMatrix(Q, [[[1, 2, 3, 4]]]), tmp_path / "b.json")
    _, out, _ = run(capsys, "emulate", "--builtin", "quaternion", tmp_path / "I.json", tmp_path / "b.json",
                    "--format", "machine")
    assert np.array_equal(machine_blocks(out)["M_L(A)"], np.eye(4))


def test_emulate_random_regression(capsys, tmp_path, rng):
    Q = builtin_algebra("quaternion")
    A = VMatrix(Q, rng.uniform(-1, 1, (3, 2, 4)))
    B = VMatrix(Q, rng.uniform(-1, 1, (2, 2, 4)))
    save_matrix(A, tmp_path / "a.json", include_algebra=True)
    save_matrix(B, tmp_path / "b.json")
    _, out, _ = run(capsys, "emulate", tmp_path / "a.json", tmp_path / "b.json", "--format", "machine")
    blocks = machine_blocks(out)
    assert np.array_equal(blocks["M_L(A)"], big_left_matrix(A))
    np.testing.assert_allclose(blocks["phi(C)"], phi_matrix(vmat_mul_direct(A, B)), rtol=1e-12, atol=1e-15)


def test_emulate_shape_mismatch(capsys, tmp_path):
    Q = builtin_algebra("quaternion")
    save_matrix(VMatrix.zeros(Q, 2, 3), tmp_path / "a.json", include_algebra=True)
    save_matrix(VMatrix.zeros(Q, 2, 3), tmp_path / "b.json")
    code, out, err = run(capsys, "emulate", tmp_path / "a.json", tmp_path / "b.json")
    assert code != 0 and not out and "vnets: error" in err


def test_emulate_needs_algebra(capsys, tmp_path):
    save_matrix(VMatrix.zeros(builtin_algebra("complex"), 1, 1), tmp_path / "a.json")
    code, out, err = run(capsys, "emulate", tmp_path / "a.json", tmp_path / "a.json")
    assert code != 0 and not out and "algebra" in err


# --- params ---------------------------------------------------------------


@pytest.mark.parametrize("args,vnet,real", [((4, 2, 3), 32, 104), ((1, 5, 7), 40, 40), ((8, 16, 16), 2176, 16512)])
def test_params(capsys, args, vnet, real):
    code, out, _ = run(capsys, "params", *args, "--format", "machine")
    assert code == 0
    fields = dict(line.split() for line in out.splitlines())
    assert int(fields["vnet"]) == vnet and int(fields["real"]) == real
    assert float(fields["ratio"]) == pytest.approx(real / vnet)


@pytest.mark.parametrize("args", [(0, 1, 1), (4, -2, 3)])
def test_params_reject(capsys, args):
    code, out, err = run(capsys, "params", *args)
    assert code != 0 and not out and err


# --- check ----------------------------------------------------------------


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "quaternion")
    assert code == 0 and "[FAIL]" not in out and out.count("[PASS]") >= 4


def test_check_random_machine(capsys):
    code, out, _ = run(capsys, "check", "--dim", 3, "--seed", 5, "--trials", 5, "--format", "machine")
    assert code == 0
    assert all(line.split()[1] == "1" for line in out.splitlines())


# --- train-demo -----------------------------------------------------------


def test_train_demo_flat_history(capsys, tmp_path):
    table = tmp_path / "hist.tsv"
    code, _, _ = run(capsys, "train-demo", "--builtin", "complex", "--hidden", 4, "--iterations", 10,
                     "--lr", 0, "--samples", 16, "--grid", 16, "--table", table)
    assert code == 0
    rows = table.read_text().splitlines()
    assert rows[0] == "iteration\tmse"
    assert len({r.split("\t")[1] for r in rows[1:]}) == 1


def test_train_demo_dual_warns(capsys):
    code, out, err = run(capsys, "train-demo", "--builtin", "dual", "--hidden", 2, "--iterations", 3,
                         "--samples", 8, "--grid", 8)
    assert code == 0
    assert "warning: degenerate algebra" in err and "degenerate" not in out
    assert "final train MSE" in out


def test_train_demo_save_model(capsys, tmp_path):
    code, _, _ = run(capsys, "train-demo", "--builtin", "complex", "--hidden", 3, "--iterations", 5,
                     "--samples", 8, "--grid", 8, "--save-model", tmp_path / "m.json")
    assert code == 0
    model = load_model(tmp_path / "m.json")
    assert model.output_mode == "real_output_weights" and model.layers[0].out_features == 3


def test_train_demo_divergence(capsys):
    code, out, err = run(capsys, "train-demo", "--builtin", "quaternion", "--hidden", 4, "--iterations", 200,
                         "--lr", 1e6, "--samples", 8, "--grid", 8)
    assert code == 2 and not out
    assert err.startswith("vnets: error: training diverged at iteration ")


def test_train_demo_rejects_bad_config(capsys):
    code, out, err = run(capsys, "train-demo", "--builtin", "complex", "--hidden", 0)
    assert code != 0 and not out and err


# --- process-level behaviour ----------------------------------------------


def _proc(*argv):
    return subprocess.run([sys.executable, "-m", "vnets", *map(str, argv)], capture_output=True, text=True)


def test_machine_output_stable():
    argv = ("train-demo", "--builtin", "quaternion", "--hidden", 3, "--iterations", 20, "--samples", 16,
            "--grid", 16, "--format", "machine")
    a, b = _proc(*argv), _proc(*argv)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout


def test_usage_error_goes_to_stderr():
    res = _proc("frobnicate")
    assert res.returncode != 0 and not res.stdout and res.stderr
