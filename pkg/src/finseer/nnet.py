"""Sigmoid feedforward MLP and tapped-delay Elman recurrent network.

Weights live in one flat float64 buffer per network (see ``_kernels`` for the
layout); ``weights[l]`` and ``biases[l]`` are writable views into it, where
``weights[l][j, i]`` connects unit ``i`` of the previous layer to unit ``j``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ParameterError, ShapeError

__all__ = [
    "N_FEATURES",
    "DEFAULT_HIDDEN",
    "DEFAULT_DELAYS",
    "NEUTRAL_CONTEXT",
    "sigmoid",
    "sigmoid_prime",
    "MlpNetwork",
    "TdrnnNetwork",
    "init_weights",
    "forward_mlp",
    "forward_tdrnn",
    "reset_context",
    "tapped_window",
]

N_FEATURES = 5
DEFAULT_HIDDEN = (10,)
DEFAULT_DELAYS = 5
NEUTRAL_CONTEXT = 0.5


def sigmoid(x):
    """Logistic function, evaluated without overflow for any finite input."""
    xa = np.asarray(x, dtype=np.float64)
    out = np.empty_like(xa)
    pos = xa >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-xa[pos]))
    e = np.exp(xa[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def sigmoid_prime(o):
    """Derivative of the sigmoid expressed through its output ``o``."""
    return o * (1.0 - o)


class MlpNetwork:
    def __init__(self, layer_sizes: Sequence[int], params: np.ndarray | None = None, bias: bool = True) -> None:
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ParameterError(f"layer sizes must be >= 1 with at least input and output, got {sizes}")
        self.layer_sizes = tuple(sizes)
        self.bias = bool(bias)

        woff = [0]
        boff = [0]
        p = 0
        for nin, nout in zip(sizes, sizes[1:]):
            woff.append(p)
            p += nin * nout
            boff.append(p)
            p += nout
        self.n_params = p
        self._sizes = np.array(sizes, dtype=np.int64)
        self._woff = np.array(woff, dtype=np.int64)
        self._boff = np.array(boff, dtype=np.int64)
        self._aoff = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)

        if params is None:
            params = np.zeros(p)
        params = np.array(params, dtype=np.float64)
        if params.shape != (p,):
            raise ShapeError(f"expected {p} parameters for layers {sizes}, got {params.shape}")
        self.params = params
        self.weights = [
            params[w : w + nout * nin].reshape(nout, nin)
            for w, nin, nout in zip(woff[1:], sizes, sizes[1:])
        ]
        self.biases = [params[b : b + nout] for b, nout in zip(boff[1:], sizes[1:])]

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(self.layer_sizes, self.params.copy(), self.bias)

    def kernel_args(self):
        return self.params, self._sizes, self._woff, self._boff, self._aoff, self.bias

    def buffers(self) -> tuple[np.ndarray, np.ndarray]:
        total = int(sum(self.layer_sizes))
        return np.zeros(total), np.zeros(total)

    def forward(self, x) -> tuple[float, list[np.ndarray]]:
        return forward_mlp(self, x)

    def __repr__(self) -> str:
        return f"MlpNetwork(layer_sizes={list(self.layer_sizes)}, bias={self.bias})"


class TdrnnNetwork:
    """Tapped-delay input line of depth D plus C Elman context units.

    The core MLP sees ``5 * D`` delayed feature values (oldest row first)
    followed by the context, which holds a copy of the first C units of the
    first hidden layer from the previous step.
    """

    def __init__(
        self,
        delay_depth: int = DEFAULT_DELAYS,
        hidden: Sequence[int] = DEFAULT_HIDDEN,
        context_size: int | None = None,
        n_features: int = N_FEATURES,
        n_outputs: int = 1,
        bias: bool = True,
        core: MlpNetwork | None = None,
    ) -> None:
        hidden = tuple(int(h) for h in hidden)
        if delay_depth < 1:
            raise ParameterError(f"delay depth must be >= 1, got {delay_depth}")
        if not hidden:
            raise ParameterError("a recurrent network needs at least one hidden layer")
        if context_size is None:
            context_size = hidden[0]
        if not 1 <= context_size <= hidden[0]:
            raise ParameterError(f"context size must be in [1, {hidden[0]}], got {context_size}")
        self.delay_depth = int(delay_depth)
        self.context_size = int(context_size)
        self.n_features = int(n_features)
        sizes = (self.n_features * self.delay_depth + self.context_size, *hidden, n_outputs)
        if core is None:
            core = MlpNetwork(sizes, bias=bias)
        elif core.layer_sizes != sizes:
            raise ShapeError(f"core layers {list(core.layer_sizes)} do not match expected {list(sizes)}")
        self.core = core
        self.context_state = np.full(self.context_size, NEUTRAL_CONTEXT)

    @property
    def hidden(self) -> tuple[int, ...]:
        return self.core.layer_sizes[1:-1]

    @property
    def bias(self) -> bool:
        return self.core.bias

    def copy(self) -> "TdrnnNetwork":
        net = TdrnnNetwork(self.delay_depth, self.hidden, self.context_size, self.n_features,
                           self.core.layer_sizes[-1], self.bias, core=self.core.copy())
        net.context_state = self.context_state.copy()
        return net

    def reset_context(self) -> "TdrnnNetwork":
        self.context_state[:] = NEUTRAL_CONTEXT
        return self

    def core_input(self, window) -> np.ndarray:
        w = np.asarray(window, dtype=np.float64)
        if w.shape != (self.delay_depth, self.n_features):
            raise ShapeError(f"expected a {self.delay_depth}x{self.n_features} window, got shape {w.shape}")
        return np.concatenate([w.ravel(), self.context_state])

    def forward(self, window) -> tuple[float, list[np.ndarray]]:
        return forward_tdrnn(self, window)

    def __repr__(self) -> str:
        return (f"TdrnnNetwork(delay_depth={self.delay_depth}, context_size={self.context_size}, "
                f"hidden={list(self.hidden)}, bias={self.bias})")


def init_weights(network, seed: int | None = None, half_range: float = 0.5):
    """Draw every weight and bias iid uniform on ``[-half_range, half_range]``."""
    if not half_range > 0:
        raise ParameterError(f"half_range must be > 0, got {half_range}")
    core = network.core if isinstance(network, TdrnnNetwork) else network
    rng = np.random.default_rng(seed)
    core.params[:] = rng.uniform(-half_range, half_range, size=core.n_params)
    if not core.bias:
        for b in core.biases:
            b[:] = 0.0
    if isinstance(network, TdrnnNetwork):
        network.reset_context()
    return network


def forward_mlp(network: MlpNetwork, x) -> tuple[float, list[np.ndarray]]:
    a = np.asarray(x, dtype=np.float64).ravel()
    if a.shape[0] != network.n_inputs:
        raise ShapeError(f"expected input of length {network.n_inputs}, got {a.shape[0]}")
    # compiled sequential sums: the same arithmetic as training, and a trailing
    # zero-weighted input changes nothing bit for bit
    flat, _ = network.buffers()
    _kernels.forward(network.params, network._sizes, network._woff, network._boff, network._aoff, a, flat)
    acts = [flat[o : o + n] for o, n in zip(network._aoff, network.layer_sizes)]
    return float(acts[-1][0]), acts


def forward_tdrnn(network: TdrnnNetwork, window) -> tuple[float, list[np.ndarray]]:
    out, acts = forward_mlp(network.core, network.core_input(window))
    network.context_state[:] = acts[1][: network.context_size]
    return out, acts


def reset_context(network: TdrnnNetwork) -> TdrnnNetwork:
    return network.reset_context()


def tapped_window(features: np.ndarray, index: int, depth: int) -> np.ndarray:
    """Rows ``index-depth+1 .. index`` of ``features``; rows before 0 repeat row 0."""
    rows = np.clip(np.arange(index - depth + 1, index + 1), 0, None)
    return np.asarray(features)[rows]
