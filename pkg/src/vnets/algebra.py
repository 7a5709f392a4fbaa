"""Finite-dimensional real algebras given by structure constants.

An algebra of dimension ``n`` is stored as a tensor ``p`` of shape ``(n, n, n)``
with ``e_i e_j = sum_k p[i, j, k] e_k``.  Elements are plain length-``n`` float64
arrays holding coordinates relative to the ordered basis; the coordinate map
is therefore the identity on arrays and is not wrapped in a class.

Indices are 0-based in storage.  User-facing component indices (the ones in
:class:`AlgebraReport` and in component extraction) are 1-based so that
``B_1`` names the form attached to the first basis element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

VElement = np.ndarray  # length-n coordinate vector

DEFAULT_TOL = 1e-9


class AlgebraError(ValueError):
    """Raised for malformed structure constants or mismatched elements."""


@dataclass(frozen=True, eq=False)
class Algebra:
    """A real algebra defined by its multiplication table.

    Attributes:
        p: structure tensor, ``p[i, j, k]`` is the coefficient of ``e_k`` in
            ``e_i e_j``.  Stored read-only.
        name: display name.
        basis_labels: one label per basis element, display only.
    """

    p: np.ndarray
    name: str = "algebra"
    basis_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 3 or not (p.shape[0] == p.shape[1] == p.shape[2]) or p.shape[0] < 1:
            raise AlgebraError(f"structure tensor must have shape (n, n, n), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise AlgebraError("structure tensor has non-finite entries")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        n = p.shape[0]
        labels = tuple(self.basis_labels) if self.basis_labels else tuple(f"e{i + 1}" for i in range(n))
        if len(labels) != n:
            raise AlgebraError(f"expected {n} basis labels, got {len(labels)}")
        object.__setattr__(self, "basis_labels", labels)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def left_matrices(self) -> np.ndarray:
        """The matrices ``P_{i:}^T`` as an ``(n, n, n)`` array.

        ``left_matrices[i][k, j] = p[i, j, k]``, so left multiplication by ``a``
        is ``sum_i a_i left_matrices[i]``.
        """
        return self.p.transpose(0, 2, 1)

    def element(self, coords: Sequence[float]) -> VElement:
        return check_element(self, coords)

    def zero(self) -> VElement:
        return np.zeros(self.n)

    def __repr__(self):
        return f"Algebra(name={self.name!r}, n={self.n})"


@dataclass(frozen=True)
class AlgebraReport:
    commutative: bool
    associative: bool
    identity: Optional[np.ndarray]
    nondegenerate: bool
    singular_bk_indices: list[int]

    @property
    def is_hypercomplex(self) -> bool:
        return self.identity is not None


def check_element(A: Algebra, x) -> VElement:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise AlgebraError(f"element of {A.name} needs {A.n} coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise AlgebraError("element has non-finite coordinates")
    return x


def algebra_from_table(n: int, p, name: str = "algebra", basis_labels: Sequence[str] = ()) -> Algebra:
    """Build an algebra from ``n`` and its ``n x n x n`` structure constants."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise AlgebraError(f"dimension must be a positive integer, got {n!r}")
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n, n, n):
        raise AlgebraError(f"structure tensor shape {p.shape} does not match dimension {n}")
    return Algebra(p, name=name, basis_labels=tuple(basis_labels))


def parametrized_algebra(P, name: str = "parametrized", basis_labels: Sequence[str] = ()) -> Algebra:
    """Algebra whose product is ``xy = sum_i x_i P_i y`` in coordinates.

    Args:
        P: ``n`` real ``n x n`` matrices.  ``P[i][k, j]`` becomes ``p[i, j, k]``.
    """
    try:
        P = np.asarray(P, dtype=np.float64)
    except ValueError as exc:
        raise AlgebraError(f"ragged matrix list: {exc}") from None
    if P.ndim != 3 or not (P.shape[0] == P.shape[1] == P.shape[2]):
        raise AlgebraError(f"expected n matrices of shape n x n, got array of shape {P.shape}")
    return algebra_from_table(P.shape[0], P.transpose(0, 2, 1), name=name, basis_labels=basis_labels)


def _table(n, products):
    p = np.zeros((n, n, n))
    for (i, j), coeffs in products.items():
        for k, c in coeffs.items():
            p[i, j, k] = c
    return p


def _quaternion_table():
    # 0=1, 1=i, 2=j, 3=k
    p = np.zeros((4, 4, 4))
    for a in range(4):
        p[0, a, a] = 1.0
        p[a, 0, a] = 1.0
    for a in (1, 2, 3):
        p[a, a, 0] = -1.0
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        p[a, b, c] = 1.0
        p[b, a, c] = -1.0
    return p


BUILTINS = {
    "real": (("1",), lambda: _table(1, {(0, 0): {0: 1.0}})),
    "complex": (
        ("1", "i"),
        lambda: _table(2, {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {0: -1}}),
    ),
    "hyperbolic": (
        ("1", "j"),
        lambda: _table(2, {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {0: 1}}),
    ),
    "dual": (
        ("1", "eps"),
        lambda: _table(2, {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}),
    ),
    "quaternion": (("1", "i", "j", "k"), _quaternion_table),
}


def builtin_algebra(name: str) -> Algebra:
    try:
        labels, make = BUILTINS[name]
    except KeyError:
        raise AlgebraError(f"unknown algebra {name!r}; choose from {', '.join(BUILTINS)}") from None
    return Algebra(make(), name=name, basis_labels=labels)


def random_algebra(n: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> Algebra:
    """Algebra with structure constants drawn uniformly from ``[low, high]``."""
    return Algebra(rng.uniform(low, high, size=(n, n, n)), name=f"random{n}")


def multiply(A: Algebra, x, y) -> VElement:
    """Product of two elements, ``z_k = x^T B_k y``."""
    x = check_element(A, x)
    y = check_element(A, y)
    return np.einsum("i,j,ijk->k", x, y, A.p)


def bilinear_matrices(A: Algebra) -> np.ndarray:
    """The forms ``B_1..B_n`` stacked as ``(n, n, n)``; ``B[k][i, j] = p[i, j, k]``."""
    return A.p.transpose(2, 0, 1).copy()


def left_mult_matrix(A: Algebra, a) -> np.ndarray:
    """Matrix of ``x -> a x`` acting on coordinate vectors."""
    a = check_element(A, a)
    return np.einsum("i,ikj->kj", a, A.left_matrices)


def abs_value(A: Algebra, x) -> float:
    # basis-dependent Euclidean norm of the coordinates
    return float(np.linalg.norm(check_element(A, x)))


def find_identity(A: Algebra, tol: float = DEFAULT_TOL) -> Optional[np.ndarray]:
    """Return the two-sided identity if one exists, else ``None``.

    Solves ``e x = x`` and ``x e = x`` on basis elements jointly in the least
    squares sense and accepts the solution only if both residuals are within
    ``tol``.
    """
    n = A.n
    eye = np.eye(n).ravel()
    # left:  sum_i e_i p[i, j, k] = delta_jk ; right: sum_j e_j p[i, j, k] = delta_ik
    left = A.p.reshape(n, n * n).T
    right = A.p.transpose(1, 0, 2).reshape(n, n * n).T
    system = np.vstack([left, right])
    rhs = np.concatenate([eye, eye])
    with np.errstate(all="ignore"):
        e, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if not np.all(np.isfinite(e)):
        return None
    scale = max(1.0, float(np.abs(A.p).max()))

    def ok(v):
        with np.errstate(all="ignore"):
            return bool(np.abs(system @ v - rhs).max() <= tol * scale)

    if not ok(e):
        return None
    # snap float noise so that integer identities come out exact
    rounded = np.round(e)
    snapped = np.where(np.abs(e - rounded) <= tol, rounded, e) + 0.0
    return snapped if ok(snapped) else e


def singular_forms(A: Algebra, tol: float = DEFAULT_TOL) -> list[int]:
    """1-based indices ``k`` for which ``B_k`` is numerically singular."""
    out = []
    for k, B in enumerate(bilinear_matrices(A), start=1):
        s = np.linalg.svd(B, compute_uv=False)
        ref = s[0] if s[0] > 0 else 1.0
        if s[-1] <= tol * ref:
            out.append(k)
    return out


def is_commutative(A: Algebra, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.all(np.abs(A.p - A.p.transpose(1, 0, 2)) <= tol))


def is_associative(A: Algebra, tol: float = DEFAULT_TOL) -> bool:
    p = A.p
    # (e_i e_j) e_k = sum_m p[i,j,m] p[m,k,l] e_l ; e_i (e_j e_k) = sum_m p[j,k,m] p[i,m,l] e_l
    lhs = np.einsum("ijm,mkl->ijkl", p, p)
    rhs = np.einsum("jkm,iml->ijkl", p, p)
    return bool(np.all(np.abs(lhs - rhs) <= tol))


def analyze_algebra(A: Algebra, tol: float = DEFAULT_TOL) -> AlgebraReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    singular = singular_forms(A, tol)
    return AlgebraReport(
        commutative=is_commutative(A, tol),
        associative=is_associative(A, tol),
        identity=find_identity(A, tol),
        nondegenerate=not singular,
        singular_bk_indices=singular,
    )


def format_element(A: Algebra, x, precision: int = 6) -> str:
    """Render coordinates as ``-176 + 45i + 96j + 11k``."""
    x = check_element(A, x)
    terms = []
    for c, label in zip(x, A.basis_labels):
        if c == 0:
            continue
        mag = f"{abs(c):.{precision}g}"
        body = mag if label == "1" else (label if mag == "1" else f"{mag}{label}")
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out
