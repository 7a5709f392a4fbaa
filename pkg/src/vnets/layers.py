"""Vector-valued dense layers, split activations and their real emulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import Algebra, AlgebraError, bilinear_matrices
from .linalg import VMatrix, big_left_matrix, vmat_mul_direct


def _sigmoid(t):
    # tanh form avoids overflow warnings for large |t|
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def _sigmoid_grad(t):
    s = _sigmoid(t)
    return s * (1.0 - s)


def _relu(t):
    return np.maximum(t, 0.0)


def _relu_grad(t):
    return (t > 0).astype(np.float64)


def _tanh_grad(t):
    return 1.0 - np.tanh(t) ** 2


def _identity(t):
    return np.asarray(t, dtype=np.float64) + 0.0


def _ones(t):
    return np.ones_like(np.asarray(t, dtype=np.float64))


_ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    "identity": (_identity, _ones),
    "relu": (_relu, _relu_grad),
    "sigmoid": (_sigmoid, _sigmoid_grad),
    "tanh": (np.tanh, _tanh_grad),
}


@dataclass(frozen=True)
class SplitActivation:
    """A real function applied independently to every coordinate.

    Because the function acts coordinatewise, applying it to an element and
    applying it to the element's coordinate vector are the same computation.
    """

    kind: str = "identity"

    def __post_init__(self):
        if self.kind not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.kind!r}; choose from {', '.join(_ACTIVATIONS)}")

    def real(self, t):
        return _ACTIVATIONS[self.kind][0](np.asarray(t, dtype=np.float64))

    def derivative(self, t):
        return _ACTIVATIONS[self.kind][1](np.asarray(t, dtype=np.float64))

    def __call__(self, x):
        return self.real(x)


def activation(kind) -> SplitActivation:
    return kind if isinstance(kind, SplitActivation) else SplitActivation(kind)


@dataclass(eq=False)
class DenseLayer:
    """``y = psi(W x + b)`` with ``W`` in ``V^{M x N}`` and ``b`` in ``V^M``.

    ``bias`` has shape ``(M, n)``.
    """

    weight: VMatrix
    bias: np.ndarray
    act: SplitActivation = field(default_factory=SplitActivation)

    def __post_init__(self):
        self.act = activation(self.act)
        bias = np.array(self.bias, dtype=np.float64)
        if bias.shape != (self.weight.rows, self.algebra.n):
            raise AlgebraError(
                f"bias must have shape {(self.weight.rows, self.algebra.n)}, got {bias.shape}"
            )
        bias.setflags(write=False)
        self.bias = bias

    @property
    def algebra(self) -> Algebra:
        return self.weight.algebra

    @property
    def in_features(self) -> int:
        return self.weight.cols

    @property
    def out_features(self) -> int:
        return self.weight.rows

    @property
    def num_parameters(self) -> int:
        return self.weight.data.size + self.bias.size

    @classmethod
    def init(cls, algebra: Algebra, in_features: int, out_features: int, act="identity",
             rng: Optional[np.random.Generator] = None) -> "DenseLayer":
        """Uniform weights in ``[-s, s]`` with ``s = 1/sqrt(n * in_features)``; zero bias."""
        if in_features < 1 or out_features < 1:
            raise ValueError("layer sizes must be positive")
        rng = np.random.default_rng() if rng is None else rng
        n = algebra.n
        s = 1.0 / np.sqrt(n * in_features)
        w = rng.uniform(-s, s, size=(out_features, in_features, n))
        return cls(VMatrix(algebra, w), np.zeros((out_features, n)), activation(act))


def _as_inputs(layer: DenseLayer, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    expected = (layer.in_features, layer.algebra.n)
    if x.shape != expected:
        raise AlgebraError(f"input must have shape {expected}, got {x.shape}")
    return x


def dense_forward(layer: DenseLayer, x) -> np.ndarray:
    """Forward pass on ``N`` elements, shape ``(N, n)``; returns ``(M, n)``."""
    x = _as_inputs(layer, x)
    s = vmat_mul_direct(layer.weight, VMatrix(layer.algebra, x[:, None, :]))
    return layer.act(s.data[:, 0, :] + layer.bias)


def dense_forward_emulated(layer: DenseLayer, xr) -> np.ndarray:
    """The same layer run as a real dense layer on stacked coordinates.

    ``xr`` has length ``n * N``, or shape ``(batch, n * N)``.
    """
    xr = np.asarray(xr, dtype=np.float64)
    n, N = layer.algebra.n, layer.in_features
    if xr.shape[-1] != n * N or xr.ndim > 2:
        raise AlgebraError(f"expected real input of length {n * N}, got shape {xr.shape}")
    ML = big_left_matrix(layer.weight)
    return layer.act(xr @ ML.T + layer.bias.ravel())


def dense_param_counts(n: int, M: int, N: int) -> tuple[int, int]:
    """Stored reals of a vector-valued dense layer and of an unconstrained real one."""
    for v in (n, M, N):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"sizes must be positive integers, got {v!r}")
    return n * M * (N + 1), n * M * (n * N + 1)


def component_output_layer(layer: DenseLayer, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Real dense layer producing only coordinate ``k`` (1-based) of the output.

    Returns ``(W_hat, b_k)`` with ``W_hat`` of shape ``(M, n * N)`` such that
    ``act(W_hat @ phi(x) + b_k)`` equals ``dense_forward(layer, x)[:, k - 1]``.
    """
    n = layer.algebra.n
    if not 1 <= k <= n:
        raise ValueError(f"component index must lie in 1..{n}, got {k}")
    Bk = bilinear_matrices(layer.algebra)[k - 1]
    W = layer.weight.data
    W_hat = np.einsum("ija,ab->ijb", W, Bk).reshape(W.shape[0], -1)
    return W_hat, layer.bias[:, k - 1].copy()


OUTPUT_MODES = ("vector", "real_output_weights", "component")


@dataclass(eq=False)
class VMLP:
    """A stack of dense layers plus an output rule.

    ``vector``: the last layer's output as is.
    ``real_output_weights``: ``y_p = sum_i alpha[p, i] h_i`` with real ``alpha``
    of shape ``(P, M)`` and ``h`` the last layer's output.
    ``component``: the real vector holding coordinate ``component`` (1-based)
    of the last layer's output.
    """

    layers: list[DenseLayer]
    output_mode: str = "vector"
    output_weights: Optional[np.ndarray] = None
    component: Optional[int] = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a VMLP needs at least one layer")
        if self.output_mode not in OUTPUT_MODES:
            raise ValueError(f"unknown output mode {self.output_mode!r}")
        alg = self.layers[0].algebra
        for a, b in zip(self.layers, self.layers[1:]):
            if b.algebra is not alg and not np.array_equal(b.algebra.p, alg.p):
                raise AlgebraError("all layers must share one algebra")
            if a.out_features != b.in_features:
                raise AlgebraError(
                    f"layer shapes do not conform: {a.out_features} outputs feed {b.in_features} inputs"
                )
        if self.output_mode == "real_output_weights":
            if self.output_weights is None:
                raise ValueError("real_output_weights mode needs output_weights")
            w = np.array(self.output_weights, dtype=np.float64)
            if w.ndim == 1:
                w = w[None, :]
            if w.ndim != 2 or w.shape[1] != self.layers[-1].out_features:
                raise AlgebraError(f"output weights shape {w.shape} does not match hidden width")
            self.output_weights = w
        if self.output_mode == "component":
            if self.component is None or not 1 <= self.component <= alg.n:
                raise ValueError(f"component index must lie in 1..{alg.n}")

    @property
    def algebra(self) -> Algebra:
        return self.layers[0].algebra

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def num_parameters(self) -> int:
        extra = self.output_weights.size if self.output_mode == "real_output_weights" else 0
        return sum(layer.num_parameters for layer in self.layers) + extra
