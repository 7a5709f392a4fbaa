"""Training V-MLPs by gradient descent through the real emulation.

Gradients are taken on the emulated real network and then folded back onto
the vector-valued weights: entry ``(i, j)`` of component ``k`` receives
``sum_ab G[(i, a), (j, b)] * P_k[a, b]`` where ``G`` is the gradient with
respect to the emulated weight matrix.  Updates therefore never leave the
set of matrices of the form ``sum_k W_k (x) P_{k:}^T``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Algebra, analyze_algebra, multiply
from .layers import VMLP, DenseLayer, component_output_layer, dense_forward
from .linalg import VMatrix, big_left_matrix

_log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    def __init__(self, iteration: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at iteration {iteration}")
        self.iteration = iteration
        self.loss = loss


class DegenerateAlgebraWarning(UserWarning):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 1000
    momentum: float = 0.0  # heavy-ball coefficient; 0 is plain gradient descent
    batch_size: Optional[int] = None  # None means full batch
    seed: int = 0
    loss: str = "mse"
    record_every: int = 1

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.loss != "mse":
            raise ValueError(f"unsupported loss {self.loss!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")


@dataclass
class FitReport:
    final_train_mse: float
    mse_history: list[float]
    checkpoints: list[int]
    sup_error_on_grid: float
    model: Optional[VMLP] = field(default=None, repr=False, compare=False)

    def to_table(self) -> str:
        lines = ["iteration\tmse"]
        lines += [f"{t}\t{m:.17g}" for t, m in zip(self.checkpoints, self.mse_history)]
        return "\n".join(lines) + "\n"


# --- forward passes -------------------------------------------------------


def vmlp_forward(model: VMLP, x) -> np.ndarray:
    """Evaluate one input of shape ``(N, n)`` with the direct (algebra) product.

    Returns ``(M, n)`` in vector mode, ``(P, n)`` with real output weights and
    a real ``(M,)`` vector in component mode.
    """
    h = np.asarray(x, dtype=np.float64)
    hidden = model.layers if model.output_mode != "component" else model.layers[:-1]
    for layer in hidden:
        h = dense_forward(layer, h)
    if model.output_mode == "vector":
        return h
    if model.output_mode == "real_output_weights":
        return model.output_weights @ h
    last = model.layers[-1]
    W_hat, b_k = component_output_layer(last, model.component)
    return last.act(W_hat @ h.ravel() + b_k)


def _forward_emulated(model: VMLP, X):
    """Batched forward on ``(B, N, n)`` inputs; keeps what backprop needs."""
    B = X.shape[0]
    h = X.reshape(B, -1)
    cache = []
    for layer in model.layers:
        ML = big_left_matrix(layer.weight)
        z = h @ ML.T + layer.bias.ravel()
        cache.append((h, ML, z))
        h = layer.act(z)
    M, n = model.layers[-1].out_features, model.algebra.n
    H = h.reshape(B, M, n)
    if model.output_mode == "vector":
        pred = H
    elif model.output_mode == "real_output_weights":
        pred = np.einsum("pi,bia->bpa", model.output_weights, H)
    else:
        pred = H[:, :, model.component - 1]
    return pred, H, cache


def vmlp_forward_emulated(model: VMLP, X) -> np.ndarray:
    X = _as_batch(model, X)
    return _forward_emulated(model, X)[0]


def _as_batch(model: VMLP, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    expected = (model.in_features, model.algebra.n)
    if X.ndim != 3 or X.shape[1:] != expected:
        raise ValueError(f"inputs must have shape (batch, {expected[0]}, {expected[1]}), got {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    return X


# --- parameters -----------------------------------------------------------


def parameters(model: VMLP) -> list[np.ndarray]:
    """Trainable arrays: per layer the weight components ``(n, M, N)`` and bias
    ``(M, n)``, then the real output weights if present.  Copies."""
    out = []
    for layer in model.layers:
        out.append(layer.weight.data.transpose(2, 0, 1).copy())
        out.append(layer.bias.copy())
    if model.output_mode == "real_output_weights":
        out.append(model.output_weights.copy())
    return out


def set_parameters(model: VMLP, params: list[np.ndarray]) -> None:
    """Write ``params`` (as returned by :func:`parameters`) back into ``model``."""
    expected = 2 * len(model.layers) + (model.output_mode == "real_output_weights")
    if len(params) != expected:
        raise ValueError(f"expected {expected} parameter arrays, got {len(params)}")
    for idx, layer in enumerate(model.layers):
        comps, bias = params[2 * idx], params[2 * idx + 1]
        model.layers[idx] = DenseLayer(VMatrix.from_components(layer.algebra, comps), bias, layer.act)
    if model.output_mode == "real_output_weights":
        model.output_weights = np.array(params[-1], dtype=np.float64)


def with_parameters(model: VMLP, params: list[np.ndarray]) -> VMLP:
    clone = VMLP(list(model.layers), model.output_mode, model.output_weights, model.component)
    set_parameters(clone, params)
    return clone


def _fold_gradient(dML: np.ndarray, algebra: Algebra, M: int, N: int) -> np.ndarray:
    n = algebra.n
    return np.einsum("iajb,kab->kij", dML.reshape(M, n, N, n), algebra.left_matrices)


def mse(pred, target) -> float:
    d = np.asarray(pred) - np.asarray(target)
    return float(np.mean(d * d))


def loss_and_grad(model: VMLP, X, Y) -> tuple[float, list[np.ndarray]]:
    """Mean squared error over all real coordinates and its gradient.

    Gradients line up with :func:`parameters`.
    """
    X = _as_batch(model, X)
    pred, H, cache = _forward_emulated(model, X)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape != pred.shape:
        raise ValueError(f"targets must have shape {pred.shape}, got {Y.shape}")
    diff = pred - Y
    loss = float(np.mean(diff * diff))
    dpred = (2.0 / diff.size) * diff

    B = X.shape[0]
    extra = []
    if model.output_mode == "vector":
        dH = dpred
    elif model.output_mode == "real_output_weights":
        extra.append(np.einsum("bpa,bia->pi", dpred, H))
        dH = np.einsum("pi,bpa->bia", model.output_weights, dpred)
    else:
        dH = np.zeros_like(H)
        dH[:, :, model.component - 1] = dpred
    dh = dH.reshape(B, -1)

    grads: list[np.ndarray] = []
    for layer, (h_in, ML, z) in zip(reversed(model.layers), reversed(cache)):
        dz = dh * layer.act.derivative(z)
        dML = dz.T @ h_in
        db = dz.sum(axis=0).reshape(layer.out_features, layer.algebra.n)
        dW = _fold_gradient(dML, layer.algebra, layer.out_features, layer.in_features)
        grads[:0] = [dW, db]
        dh = dz @ ML
    return loss, grads + extra


# --- training -------------------------------------------------------------


def sup_error(model: VMLP, X, Y) -> float:
    """Largest coordinate-norm distance between prediction and target."""
    pred = vmlp_forward_emulated(model, X)
    d = (pred - np.asarray(Y, dtype=np.float64)).reshape(pred.shape[0], -1)
    if model.output_mode == "component":
        return float(np.abs(d).max())
    n = model.algebra.n
    per_element = np.linalg.norm(d.reshape(d.shape[0], -1, n), axis=-1)
    return float(per_element.max())


def train(model: VMLP, dataset, cfg: TrainConfig, eval_set=None) -> FitReport:
    """Full-batch (or seeded minibatch) gradient descent; updates ``model`` in place.

    With ``cfg.momentum == 0`` each step is ``p -= lr * grad``.  Otherwise a
    heavy-ball velocity ``v = momentum * v + grad`` replaces the gradient.

    Args:
        model: network to fit.
        dataset: pair ``(X, Y)`` of inputs ``(B, N, n)`` and matching targets.
        cfg: optimizer settings.
        eval_set: optional ``(X, Y)`` for the sup error; defaults to ``dataset``.

    Raises:
        TrainingDiverged: when the loss stops being finite.
    """
    X, Y = dataset
    X = _as_batch(model, X)
    Y = np.asarray(Y, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    num = X.shape[0]
    batch = num if cfg.batch_size is None else min(cfg.batch_size, num)
    order, cursor = np.arange(num), num

    history, checkpoints = [], []
    params = parameters(model)
    velocity = [np.zeros_like(p) for p in params]
    for t in range(cfg.iterations):
        if batch == num:
            Xb, Yb = X, Y
        else:
            if cursor + batch > num:
                order, cursor = rng.permutation(num), 0
            idx = order[cursor:cursor + batch]
            cursor += batch
            Xb, Yb = X[idx], Y[idx]
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grads = loss_and_grad(model, Xb, Yb)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
            raise TrainingDiverged(t, loss)
        if t % cfg.record_every == 0:
            history.append(loss)
            checkpoints.append(t)
        if cfg.momentum:
            velocity = [cfg.momentum * v + g for v, g in zip(velocity, grads)]
            grads = velocity
        params = [p - cfg.learning_rate * g for p, g in zip(params, grads)]
        set_parameters(model, params)
        if t % 500 == 0:
            _log.debug("iteration %d: mse %.6g", t, loss)

    with np.errstate(over="ignore", invalid="ignore"):
        final = mse(vmlp_forward_emulated(model, X), Y)
    if not np.isfinite(final):
        raise TrainingDiverged(cfg.iterations, final)
    history.append(final)
    checkpoints.append(cfg.iterations)
    Xe, Ye = (X, Y) if eval_set is None else eval_set
    return FitReport(final, history, checkpoints, sup_error(model, Xe, Ye), model)


# --- approximation demo ---------------------------------------------------

TARGETS = ("square", "left_mult_by_const", "coordinatewise_poly")


def demo_constant(algebra: Algebra) -> np.ndarray:
    a = np.arange(1.0, algebra.n + 1)
    return a / np.linalg.norm(a)


def target_function(algebra: Algebra, name: str):
    """Map ``(B, 1, n)`` inputs to ``(B, 1, n)`` targets."""
    if name == "square":
        def f(X):
            return np.stack([multiply(algebra, x[0], x[0]) for x in X])[:, None, :]
    elif name == "left_mult_by_const":
        a = demo_constant(algebra)

        def f(X):
            return np.stack([multiply(algebra, a, x[0]) for x in X])[:, None, :]
    elif name == "coordinatewise_poly":
        def f(X):
            return X ** 3 - 0.5 * X
    else:
        raise ValueError(f"unknown target {name!r}; choose from {', '.join(TARGETS)}")
    return f


def sample_unit_ball(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform samples from the closed Euclidean unit ball in ``R^dim``."""
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / dim)
    return g * r


# Defaults for the demo.  The generic layer init (small weights, zero bias)
# leaves sigmoid units near their odd, almost linear regime, which plain
# descent escapes far too slowly for even targets such as x*x.
DEMO_CONFIG = TrainConfig(learning_rate=0.12, iterations=5000, momentum=0.95, seed=0)
DEMO_WEIGHT_SCALE = 2.0
DEMO_BIAS_SCALE = 1.0
DEMO_OUTPUT_SCALE = 1.0


def build_demo_model(algebra: Algebra, hidden: int, act: str, rng: np.random.Generator,
                     weight_scale: float = DEMO_WEIGHT_SCALE, bias_scale: float = DEMO_BIAS_SCALE,
                     output_scale: float = DEMO_OUTPUT_SCALE) -> VMLP:
    """One hidden layer of ``hidden`` neurons on a single input, real output weights."""
    if hidden < 1:
        raise ValueError("hidden width must be at least 1")
    n = algebra.n
    W = rng.uniform(-weight_scale, weight_scale, size=(hidden, 1, n))
    b = rng.uniform(-bias_scale, bias_scale, size=(hidden, n))
    alpha = rng.uniform(-output_scale, output_scale, size=(1, hidden))
    layer = DenseLayer(VMatrix(algebra, W), b, act)
    return VMLP([layer], "real_output_weights", alpha)


def approximation_demo(algebra: Algebra, target: str, hidden: int = 32, cfg: TrainConfig = DEMO_CONFIG,
                       n_train: int = 256, n_grid: int = 512, act: str = "sigmoid",
                       **init_scales) -> FitReport:
    """Fit a one-hidden-layer V-MLP with real output weights on the unit ball.

    The sup error is measured on a separate seeded sample of ``n_grid`` points.
    """
    f = target_function(algebra, target)
    if hidden < 1:
        raise ValueError("hidden width must be at least 1")
    report = analyze_algebra(algebra)
    if not report.nondegenerate:
        warnings.warn(
            "degenerate algebra: universal approximation hypothesis not met",
            DegenerateAlgebraWarning,
            stacklevel=2,
        )
    rng = np.random.default_rng(cfg.seed)
    X = sample_unit_ball(rng, n_train, algebra.n)[:, None, :]
    Xg = sample_unit_ball(rng, n_grid, algebra.n)[:, None, :]
    model = build_demo_model(algebra, hidden, act, rng, **init_scales)
    return train(model, (X, f(X)), cfg, eval_set=(Xg, f(Xg)))
