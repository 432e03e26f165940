"""Online (per-example) gradient-descent backpropagation.

Each example is forwarded, deltas are propagated output-to-input with the
pre-update weights, then every weight moves by ``eta * delta_j * x_i``.  The
heavy loop runs in :mod:`finseer._kernels`; the scalar rules are exposed here
for inspection and testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DivergenceError, ParameterError, ShapeError
from .nnet import MlpNetwork, TdrnnNetwork
from .preprocess import WindowView

__all__ = [
    "TrainConfig",
    "TrainReport",
    "output_delta",
    "hidden_delta",
    "apply_update",
    "example_error",
    "backprop_gradient",
    "train_example",
    "train",
    "gradient_check",
]


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.25
    epochs: int = 1000
    repeats: int = 2
    seed: int = 0
    goal_mse: float | None = None
    shuffle: bool = False

    def __post_init__(self) -> None:
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ParameterError(f"eta must be finite and > 0, got {self.eta}")
        if int(self.epochs) < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if int(self.repeats) < 1:
            raise ParameterError(f"repeats must be >= 1, got {self.repeats}")


@dataclass
class TrainReport:
    mse_curve: list[float] = field(default_factory=list)
    final_epoch: int = 0
    stopped_early: bool = False

    @property
    def final_mse(self) -> float:
        return self.mse_curve[-1] if self.mse_curve else float("nan")

    def to_csv(self) -> str:
        lines = ["epoch,mse"]
        lines += [f"{i},{format(m, '.17g')}" for i, m in enumerate(self.mse_curve, start=1)]
        return "\n".join(lines) + "\n"


def output_delta(o_k: float, t_k: float) -> float:
    return o_k * (1.0 - o_k) * (t_k - o_k)


def hidden_delta(o_h: float, downstream) -> float:
    """``downstream`` is an iterable of ``(w_hk, delta_k)`` pairs."""
    return o_h * (1.0 - o_h) * sum(w * d for w, d in downstream)


def apply_update(w: float, eta: float, delta_j: float, x_i: float) -> float:
    return w + eta * delta_j * x_i


def example_error(target: float, output: float) -> float:
    return 0.5 * (target - output) ** 2


def _core_and_input(network, x) -> tuple[MlpNetwork, np.ndarray]:
    if isinstance(network, TdrnnNetwork):
        return network.core, network.core_input(x)
    xa = np.asarray(x, dtype=np.float64).ravel()
    if xa.shape[0] != network.n_inputs:
        raise ShapeError(f"expected input of length {network.n_inputs}, got {xa.shape[0]}")
    return network, xa


def _target_vector(target, core: MlpNetwork) -> np.ndarray:
    t = np.atleast_1d(np.asarray(target, dtype=np.float64))
    if t.shape != (core.layer_sizes[-1],):
        raise ShapeError(f"expected {core.layer_sizes[-1]} target value(s), got {t.shape}")
    return t


def backprop_gradient(network, x, target) -> tuple[float, np.ndarray]:
    """Error and dErr/dw for every core parameter (flat layout).

    For a recurrent network ``x`` is the D x 5 window and the current context
    is treated as a frozen input; the context is not advanced.
    """
    core, xin = _core_and_input(network, x)
    t = _target_vector(target, core)
    acts, deltas = core.buffers()
    grad = np.zeros(core.n_params)
    err = _kernels.gradient(*core.kernel_args(), xin, t, acts, deltas, grad)
    return float(err), grad


def train_example(network, x, target, eta: float) -> float:
    """Apply one online update in place and return the example's pre-update error."""
    core, xin = _core_and_input(network, x)
    t = _target_vector(target, core)
    acts, deltas = core.buffers()
    err, status = _kernels.step(*core.kernel_args(), xin, t, float(eta), acts, deltas)
    if isinstance(network, TdrnnNetwork):
        network.context_state[:] = acts[core.layer_sizes[0] : core.layer_sizes[0] + network.context_size]
    if status != _kernels.OK:
        raise DivergenceError(f"non-finite weights or activations after update with eta={eta}; try a smaller eta")
    return float(err)


def train(
    network,
    windows: WindowView,
    config: TrainConfig = TrainConfig(),
    on_epoch: Callable[[int, float], None] | None = None,
):
    """Train ``network`` in place on a chronological window view.

    Runs ``config.repeats`` passes of ``config.epochs`` epochs, carrying the
    weights over, and stops early once an epoch MSE reaches ``goal_mse``.
    Recurrent networks get their context reset at the start of every epoch.
    Returns ``(network, TrainReport)``.
    """
    n = len(windows)
    if n == 0:
        raise ParameterError("training view is empty")
    recurrent = isinstance(network, TdrnnNetwork)
    core = network.core if recurrent else network
    if core.layer_sizes[-1] != 1:
        raise ShapeError("training on window sets needs a single output unit")
    features = np.ascontiguousarray(windows.windows.inputs)
    targets = np.ascontiguousarray(windows.windows.targets)
    if recurrent:
        if features.shape[1] != network.n_features:
            raise ShapeError(f"window features have width {features.shape[1]}, network expects {network.n_features}")
    elif features.shape[1] != core.n_inputs:
        raise ShapeError(f"window features have width {features.shape[1]}, network expects {core.n_inputs}")

    base_order = windows.indices.astype(np.int64)
    rng = np.random.default_rng(config.seed) if config.shuffle else None
    acts, deltas = core.buffers()
    eta = float(config.eta)
    args = core.kernel_args()
    report = TrainReport()
    total_epochs = int(config.epochs) * int(config.repeats)

    for epoch in range(1, total_epochs + 1):
        order = rng.permutation(base_order) if rng is not None else base_order
        if recurrent:
            network.reset_context()
            total, status, pos = _kernels.tdrnn_epoch(
                *args, features, targets, order, network.delay_depth, network.context_state, eta, acts, deltas
            )
        else:
            total, status, pos = _kernels.mlp_epoch(*args, features, targets, order, eta, acts, deltas)
        if status != _kernels.OK:
            raise DivergenceError(
                f"training diverged at epoch {epoch}, example {int(order[pos])}: "
                f"non-finite weights with eta={eta}; try a smaller eta"
            )
        mse = total / n
        report.mse_curve.append(mse)
        report.final_epoch = epoch
        if on_epoch is not None:
            on_epoch(epoch, mse)
        if config.goal_mse is not None and mse <= config.goal_mse:
            report.stopped_early = True
            break
    return network, report


def _error_at(weights, biases, x, target) -> np.longdouble:
    a = x
    for w, b in zip(weights, biases):
        z = w @ a + b
        a = np.where(z >= 0, 1 / (1 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1 + np.exp(-np.abs(z))))
    return np.sum((target - a) ** 2) / 2


def gradient_check(network, x, target, epsilon: float = 1e-5) -> float:
    """Maximum relative discrepancy between backprop and central differences.

    Pairs where both gradient magnitudes are below 1e-8 contribute their
    absolute difference instead.  The finite differences run through a
    separate numpy forward pass in extended precision (``np.longdouble``),
    since float64 cancellation at epsilon=1e-5 alone reaches ~1e-5 relative
    on gradients near 1e-7.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ParameterError(f"epsilon must be in [1e-7, 1e-3], got {epsilon}")
    core, xin = _core_and_input(network, x)
    t = _target_vector(target, core).astype(np.longdouble)
    _, grad = backprop_gradient(network, x, target)
    xin = xin.astype(np.longdouble)  # recurrent context frozen at its current value

    weights = [w.astype(np.longdouble) for w in core.weights]
    biases = [b.astype(np.longdouble) for b in core.biases]
    eps = np.longdouble(epsilon)
    worst = 0.0
    for l, (w, b) in enumerate(zip(weights, biases), start=1):
        slots = [(w, idx, int(core._woff[l]) + idx[0] * w.shape[1] + idx[1]) for idx in np.ndindex(w.shape)]
        if core.bias:
            slots += [(b, (j,), int(core._boff[l]) + j) for j in range(b.size)]
        for arr, idx, p in slots:
            saved = arr[idx]
            arr[idx] = saved + eps
            e_plus = _error_at(weights, biases, xin, t)
            arr[idx] = saved - eps
            e_minus = _error_at(weights, biases, xin, t)
            arr[idx] = saved
            fd = float((e_plus - e_minus) / (2 * eps))
            g = float(grad[p])
            diff = abs(g - fd)
            scale = max(abs(g), abs(fd))
            worst = max(worst, diff if scale < 1e-8 else diff / scale)
    return worst
