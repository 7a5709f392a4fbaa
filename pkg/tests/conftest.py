import numpy as np
import pytest
from hypothesis import strategies as st
import hypothesis.extra.numpy as nph

from vnets.algebra import Algebra, builtin_algebra

# Quaternion worked example: A (2x3), x (3x1), y = A x, and the real matrices.
# Entries are (real, i, j, k) coordinates.
WORKED_A = np.array([
    [[1, 2, 0, 0], [0, 3, 4, 0], [0, 0, 5, 6]],
    [[7, 0, 8, 0], [9, 0, 0, 10], [0, 11, 0, 12]],
], dtype=float)
WORKED_X = np.array([[[1, 2, 3, 4]], [[5, 6, 7, 8]], [[9, 10, 11, 12]]], dtype=float)
WORKED_Y = np.array([[[-176, 45, 96, 11]], [[-306, -3, 140, 363]]], dtype=float)
WORKED_ML = np.array([
    [1, -2, 0, 0, 0, -3, -4, 0, 0, 0, -5, -6],
    [2, 1, 0, 0, 3, 0, 0, 4, 0, 0, -6, 5],
    [0, 0, 1, -2, 4, 0, 0, -3, 5, 6, 0, 0],
    [0, 0, 2, 1, 0, -4, 3, 0, 6, -5, 0, 0],
    [7, 0, -8, 0, 9, 0, 0, -10, 0, -11, 0, -12],
    [0, 7, 0, 8, 0, 9, -10, 0, 11, 0, -12, 0],
    [8, 0, 7, 0, 0, 10, 9, 0, 0, 12, 0, -11],
    [0, -8, 0, 7, 10, 0, 0, 9, 12, 0, 11, 0],
], dtype=float)
WORKED_PHI_Y = np.array([-176, 45, 96, 11, -306, -3, 140, 363], dtype=float)

# P_{1:}^T, P_{2:}^T, P_{3:}^T for i, j, k; the first matrix is the identity.
QUAT_LEFT_P = np.array([
    np.eye(4),
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
], dtype=float)


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.abs(b).max() if b.size else 0.0
    diff = np.abs(a - b).max() if a.size else 0.0
    return float(diff / scale) if scale > 0 else float(diff)


def brute_product(p, x, y):
    """Expand (sum x_i e_i)(sum y_j e_j) term by term from the table."""
    n = len(x)
    z = [0.0] * n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                z[k] += x[i] * y[j] * p[i][j][k]
    return np.array(z)


def hamilton(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


# Magnitudes below 1e-3 become 0 so that products stay clear of the subnormal
# range, where relative error says nothing about the code under test.
unit_floats = st.floats(-1, 1, allow_nan=False, allow_infinity=False).map(lambda v: 0.0 if abs(v) < 1e-3 else v)


@st.composite
def algebras(draw, max_dim=6):
    n = draw(st.integers(1, max_dim))
    p = draw(nph.arrays(np.float64, (n, n, n), elements=unit_floats))
    return Algebra(p)


@st.composite
def algebra_and_elements(draw, count=2, max_dim=6):
    A = draw(algebras(max_dim))
    xs = [draw(nph.arrays(np.float64, (A.n,), elements=unit_floats)) for _ in range(count)]
    return (A, *xs)


@pytest.fixture
def quaternion():
    return builtin_algebra("quaternion")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# One line per acceptance criterion, shown at the end of every run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
