"""Matrices over an algebra and their real-valued emulation.

A :class:`VMatrix` stores its entries as a contiguous ``(M, N, n)`` float64
array with coordinates innermost.  The coordinate map of a matrix stacks the
coordinates of each entry vertically inside its column::

    phi(B)[l * n + a, j] == B.data[l, j, a]

so a column vector maps to the row scan ``(b_1 coords, b_2 coords, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Algebra, AlgebraError, left_mult_matrix, multiply


@dataclass(frozen=True, eq=False)
class VMatrix:
    algebra: Algebra
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != self.algebra.n:
            raise AlgebraError(
                f"VMatrix data must have shape (M, N, {self.algebra.n}), got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise AlgebraError("VMatrix has non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def __getitem__(self, idx):
        i, j = idx
        return self.data[i, j]

    @classmethod
    def from_components(cls, algebra: Algebra, components) -> "VMatrix":
        """Build from ``n`` real ``M x N`` matrices ``A_1..A_n``."""
        comps = np.asarray(components, dtype=np.float64)
        if comps.ndim != 3 or comps.shape[0] != algebra.n:
            raise AlgebraError(
                f"expected {algebra.n} component matrices, got array of shape {comps.shape}"
            )
        return cls(algebra, comps.transpose(1, 2, 0))

    @classmethod
    def zeros(cls, algebra: Algebra, rows: int, cols: int) -> "VMatrix":
        return cls(algebra, np.zeros((rows, cols, algebra.n)))

    @classmethod
    def identity(cls, algebra: Algebra, size: int, unit) -> "VMatrix":
        """Diagonal matrix with ``unit`` (typically the algebra identity) on the diagonal."""
        data = np.zeros((size, size, algebra.n))
        for i in range(size):
            data[i, i] = unit
        return cls(algebra, data)

    @classmethod
    def column(cls, algebra: Algebra, elements) -> "VMatrix":
        elements = np.asarray(elements, dtype=np.float64)
        return cls(algebra, elements.reshape(-1, 1, algebra.n))


@dataclass(frozen=True)
class ComponentStack:
    """Real matrices ``A_1..A_n`` with ``A = sum_k A_k e_k``; shape ``(n, M, N)``."""

    components: np.ndarray

    def reassemble(self, algebra: Algebra) -> VMatrix:
        return VMatrix.from_components(algebra, self.components)


def _same_algebra(A: VMatrix, B: VMatrix):
    if A.algebra is not B.algebra and not np.array_equal(A.algebra.p, B.algebra.p):
        raise AlgebraError("operands live in different algebras")


def _check_inner(A: VMatrix, B: VMatrix):
    _same_algebra(A, B)
    if A.cols != B.rows:
        raise AlgebraError(f"inner dimensions differ: {A.shape} x {B.shape}")


def vmat_mul_direct(A: VMatrix, B: VMatrix) -> VMatrix:
    """Entrywise ``c_ij = sum_l a_il b_lj`` using the algebra product."""
    _check_inner(A, B)
    alg = A.algebra
    M, L = A.shape
    N = B.cols
    out = np.zeros((M, N, alg.n))
    for i in range(M):
        for j in range(N):
            acc = np.zeros(alg.n)
            for l in range(L):
                acc = acc + multiply(alg, A.data[i, l], B.data[l, j])
            out[i, j] = acc
    return VMatrix(alg, out)


def phi_matrix(B: VMatrix) -> np.ndarray:
    L, N, n = B.data.shape
    return B.data.transpose(0, 2, 1).reshape(L * n, N)


def unphi_matrix(algebra: Algebra, Y) -> VMatrix:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = algebra.n
    if Y.ndim != 2 or Y.shape[0] % n:
        raise AlgebraError(f"row count {Y.shape[0]} is not divisible by n={n}")
    M, N = Y.shape[0] // n, Y.shape[1]
    return VMatrix(algebra, Y.reshape(M, n, N).transpose(0, 2, 1))


def kron(A, B) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``A[i, j] * B``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("kron expects two matrices")
    (r, c), (p, q) = A.shape, B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(r * p, c * q)


def component_stack(A: VMatrix) -> ComponentStack:
    return ComponentStack(A.data.transpose(2, 0, 1).copy())


def big_left_matrix(A: VMatrix) -> np.ndarray:
    """Real ``(nM, nL)`` matrix emulating left multiplication by ``A``.

    Computed as ``sum_k A_k (x) P_{k:}^T``.
    """
    comps = component_stack(A).components
    P = A.algebra.left_matrices
    out = kron(comps[0], P[0])
    for k in range(1, A.algebra.n):
        out = out + kron(comps[k], P[k])
    return out


def big_left_matrix_blockwise(A: VMatrix) -> np.ndarray:
    """Same matrix as :func:`big_left_matrix`, assembled block by block."""
    n = A.algebra.n
    M, L = A.shape
    out = np.zeros((n * M, n * L))
    for i in range(M):
        for l in range(L):
            out[i * n:(i + 1) * n, l * n:(l + 1) * n] = left_mult_matrix(A.algebra, A.data[i, l])
    return out


def vmat_mul_emulated(A: VMatrix, B: VMatrix) -> VMatrix:
    _check_inner(A, B)
    return unphi_matrix(A.algebra, big_left_matrix(A) @ phi_matrix(B))
