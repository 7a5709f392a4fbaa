"""Vector-valued convolution (valid cross-correlation) and split max-pooling.

Layouts:

* vector-valued image: ``(C, *spatial, n)``
* real image:          ``(n * C, *spatial)``, channel ``c * n + a`` holds
  coordinate ``a`` of channel ``c``
* filters:             ``(K, C, *filter_shape, n)``

One and two spatial dimensions are supported; nothing here is specific to
either, so higher dimensions work too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .algebra import Algebra, AlgebraError, multiply
from .layers import SplitActivation, activation

IntOrTuple = Union[int, Sequence[int]]


def _tuplify(v: IntOrTuple, d: int, what: str) -> tuple[int, ...]:
    t = (int(v),) * d if np.isscalar(v) else tuple(int(s) for s in v)
    if len(t) != d:
        raise ValueError(f"{what} needs {d} entries, got {len(t)}")
    if any(s < 1 for s in t):
        raise ValueError(f"{what} must be positive, got {t}")
    return t


def output_shape(spatial: Sequence[int], window: Sequence[int], stride: Sequence[int]) -> tuple[int, ...]:
    out = []
    for s, w, st in zip(spatial, window, stride):
        if s < w:
            raise AlgebraError(f"input size {s} is smaller than window {w}")
        out.append((s - w) // st + 1)
    return tuple(out)


@dataclass(eq=False)
class ConvLayer:
    algebra: Algebra
    filters: np.ndarray
    bias: np.ndarray
    stride: IntOrTuple = 1
    act: SplitActivation = field(default_factory=SplitActivation)

    def __post_init__(self):
        f = np.array(self.filters, dtype=np.float64)
        if f.ndim < 4 or f.shape[-1] != self.algebra.n:
            raise AlgebraError(f"filters must have shape (K, C, *D, {self.algebra.n}), got {f.shape}")
        b = np.array(self.bias, dtype=np.float64)
        if b.shape != (f.shape[0], self.algebra.n):
            raise AlgebraError(f"bias must have shape {(f.shape[0], self.algebra.n)}, got {b.shape}")
        f.setflags(write=False)
        b.setflags(write=False)
        self.filters, self.bias = f, b
        self.stride = _tuplify(self.stride, self.ndim, "stride")
        self.act = activation(self.act)

    @property
    def ndim(self) -> int:
        return self.filters.ndim - 3

    @property
    def in_channels(self) -> int:
        return self.filters.shape[1]

    @property
    def out_channels(self) -> int:
        return self.filters.shape[0]

    @property
    def filter_shape(self) -> tuple[int, ...]:
        return self.filters.shape[2:-1]

    @classmethod
    def init(cls, algebra, in_channels, out_channels, filter_shape, stride=1, act="identity", rng=None):
        rng = np.random.default_rng() if rng is None else rng
        filter_shape = tuple(filter_shape)
        fan_in = algebra.n * in_channels * int(np.prod(filter_shape))
        s = 1.0 / np.sqrt(fan_in)
        f = rng.uniform(-s, s, size=(out_channels, in_channels, *filter_shape, algebra.n))
        return cls(algebra, f, np.zeros((out_channels, algebra.n)), stride, activation(act))


def _check_image(layer: ConvLayer, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != layer.ndim + 2 or x.shape[0] != layer.in_channels or x.shape[-1] != layer.algebra.n:
        raise AlgebraError(
            f"input must have shape ({layer.in_channels}, <{layer.ndim} spatial>, {layer.algebra.n}),"
            f" got {x.shape}"
        )
    return x


def phi_image(x) -> np.ndarray:
    """``(C, *S, n)`` -> ``(n * C, *S)`` with coordinates inner to channels."""
    x = np.asarray(x, dtype=np.float64)
    C, n = x.shape[0], x.shape[-1]
    return np.moveaxis(x, -1, 1).reshape(C * n, *x.shape[1:-1])


def unphi_image(algebra: Algebra, xr) -> np.ndarray:
    xr = np.asarray(xr, dtype=np.float64)
    n = algebra.n
    if xr.shape[0] % n:
        raise AlgebraError(f"channel count {xr.shape[0]} is not divisible by n={n}")
    return np.moveaxis(xr.reshape(xr.shape[0] // n, n, *xr.shape[1:]), 1, -1)


def conv_forward_direct(layer: ConvLayer, x) -> np.ndarray:
    """Nested-loop evaluation using the algebra product for every term."""
    x = _check_image(layer, x)
    alg = layer.algebra
    D = layer.filter_shape
    out_sp = output_shape(x.shape[1:-1], D, layer.stride)
    stride = np.array(layer.stride)
    y = np.zeros((layer.out_channels, *out_sp, alg.n))
    for k in range(layer.out_channels):
        for p in np.ndindex(*out_sp):
            origin = np.array(p) * stride
            acc = np.zeros(alg.n)
            for c in range(layer.in_channels):
                for q in np.ndindex(*D):
                    src = tuple(origin + np.array(q))
                    acc = acc + multiply(alg, layer.filters[(k, c) + q], x[(c,) + src])
            y[(k,) + p] = acc + layer.bias[k]
    return layer.act(y)


def real_cross_correlation(x, w, stride: IntOrTuple = 1) -> np.ndarray:
    """Multichannel valid cross-correlation.

    Args:
        x: ``(C, *S)`` real image.
        w: ``(K, C, *D)`` real filters.
        stride: per-axis step.

    Returns:
        ``(K, *O)`` with ``O = (S - D) // stride + 1``.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    d = x.ndim - 1
    if w.ndim != d + 2 or w.shape[1] != x.shape[0]:
        raise AlgebraError(f"filters {w.shape} do not match image {x.shape}")
    D = w.shape[2:]
    stride = _tuplify(stride, d, "stride")
    output_shape(x.shape[1:], D, stride)
    win = sliding_window_view(x, D, axis=tuple(range(1, d + 1)))
    win = win[(slice(None),) + tuple(slice(None, None, s) for s in stride)]
    # win: (C, *O, *D)
    axes_w = [1] + list(range(2, 2 + d))
    axes_x = [0] + list(range(1 + d, 1 + 2 * d))
    return np.tensordot(w, win, axes=(axes_w, axes_x))


def conv_real_filters(layer: ConvLayer) -> np.ndarray:
    """Real filters ``sum_l W_l (x) P_{l:}^T`` on the (output, input) channel axes.

    Shape ``(n * K, n * C, *D)``; spatial axes are untouched.
    """
    n = layer.algebra.n
    K, C = layer.out_channels, layer.in_channels
    P = layer.algebra.left_matrices
    # R[k, a, c, b, q] = sum_l W[k, c, q, l] * P[l, a, b]
    R = np.einsum("kc...l,lab->kacb...", layer.filters, P)
    return R.reshape(n * K, n * C, *layer.filter_shape)


def conv_forward_emulated(layer: ConvLayer, xr) -> np.ndarray:
    """Same layer as one real convolution on the stacked image ``(n * C, *S)``."""
    xr = np.asarray(xr, dtype=np.float64)
    n = layer.algebra.n
    if xr.ndim != layer.ndim + 1 or xr.shape[0] != n * layer.in_channels:
        raise AlgebraError(f"real input must have {n * layer.in_channels} channels, got shape {xr.shape}")
    s = real_cross_correlation(xr, conv_real_filters(layer), layer.stride)
    b = layer.bias.ravel().reshape((-1,) + (1,) * layer.ndim)
    return layer.act(s + b)


def split_maxpool(x, window: IntOrTuple, stride: IntOrTuple = None) -> np.ndarray:
    """Coordinatewise max over each window of a ``(C, *S, n)`` image.

    ``stride`` defaults to the window size.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.ndim - 2
    if d < 1:
        raise AlgebraError(f"expected image of shape (C, *S, n), got {x.shape}")
    window = _tuplify(window, d, "window")
    stride = window if stride is None else _tuplify(stride, d, "stride")
    output_shape(x.shape[1:-1], window, stride)
    win = sliding_window_view(x, window, axis=tuple(range(1, d + 1)))
    win = win[(slice(None),) + tuple(slice(None, None, s) for s in stride)]
    # win: (C, *O, n, *window)
    return win.max(axis=tuple(range(-d, 0)))
