"""Forecast accuracy: predictions, error metrics, predicted-vs-target regression
and the side-by-side MLP/TDRNN comparison table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ComparisonError, DegenerateRegressorError, ShapeError, SizeError
from .nnet import MlpNetwork, TdrnnNetwork, forward_mlp, forward_tdrnn, tapped_window
from .preprocess import Normalizer, WindowView

__all__ = [
    "PredictionPairs",
    "RegressionFit",
    "EvalReport",
    "Comparison",
    "predict_series",
    "evaluate",
    "linear_regression",
    "compare",
]


@dataclass(frozen=True, eq=False)
class PredictionPairs:
    """Targets and predictions in price units, plus their normalized forms."""

    index: np.ndarray
    target: np.ndarray
    predicted: np.ndarray
    target_norm: np.ndarray
    predicted_norm: np.ndarray

    def __len__(self) -> int:
        return int(self.target.shape[0])

    def to_csv(self) -> str:
        lines = ["index,target,predicted"]
        lines += [
            f"{int(i)},{format(float(t), '.17g')},{format(float(p), '.17g')}"
            for i, t, p in zip(self.index, self.target, self.predicted)
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r: float
    degenerate: bool = False

    def summary(self) -> str:
        return f"slope={self.slope:.6g} intercept={self.intercept:.6g} r={self.r:.6g}"


@dataclass(frozen=True, eq=False)
class EvalReport:
    mse: float
    rmse_pct: float
    mape: float
    fit: RegressionFit
    pairs: np.ndarray
    mape_available: bool = True
    nrmse_pct: float = float("nan")
    n_out_of_range: int = 0

    def __len__(self) -> int:
        return int(self.pairs.shape[0])


def _predict_mlp(network: MlpNetwork, view: WindowView) -> np.ndarray:
    a = np.asarray(view.inputs, dtype=np.float64)
    if a.shape[1] != network.n_inputs:
        raise ShapeError(f"network expects {network.n_inputs} inputs, windows have {a.shape[1]}")
    return np.array([forward_mlp(network, row)[0] for row in a])


def _predict_tdrnn(network: TdrnnNetwork, view: WindowView, warmup: int | None = None) -> np.ndarray:
    features = view.windows.inputs
    depth = network.delay_depth
    if warmup is None:
        warmup = depth + 1
    network.reset_context()
    for i in range(max(0, view.start - warmup), view.start):
        forward_tdrnn(network, tapped_window(features, i, depth))
    out = np.empty(len(view))
    for k, i in enumerate(range(view.start, view.stop)):
        out[k], _ = forward_tdrnn(network, tapped_window(features, i, depth))
    return out


def predict_series(network, view: WindowView, normalizer: Normalizer) -> PredictionPairs:
    """Run ``network`` over every pair of ``view`` and denormalize the outputs.

    A recurrent network is reset and then warmed by replaying the D+1 steps
    preceding the view (the training tail, for a test view).  ``network`` may
    also be a callable mapping the view to normalized predictions.
    """
    if len(view) == 0:
        raise SizeError("cannot predict over an empty view")
    if isinstance(network, TdrnnNetwork):
        out = _predict_tdrnn(network, view)
    elif isinstance(network, MlpNetwork):
        out = _predict_mlp(network, view)
    elif callable(network):
        out = np.asarray(network(view), dtype=np.float64)
    else:
        raise TypeError(f"cannot predict with {type(network).__name__}")
    target_norm = np.asarray(view.targets, dtype=np.float64)
    return PredictionPairs(
        index=view.indices,
        target=np.asarray(view.windows.raw_targets[view.start : view.stop], dtype=np.float64),
        predicted=np.asarray(normalizer.denormalize(out, "open"), dtype=np.float64),
        target_norm=target_norm,
        predicted_norm=out,
    )


def linear_regression(x, y) -> RegressionFit:
    """Ordinary least squares ``y ~ slope * x + intercept`` with Pearson ``r``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise SizeError(f"x and y lengths differ ({x.size} vs {y.size})")
    if x.size < 2:
        raise SizeError("linear regression needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0 or np.ptp(x) == 0:
        raise DegenerateRegressorError("regressor is constant")
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    if syy == 0.0 or np.ptp(y) == 0:
        # the mean of a constant array is not always exactly that constant
        return RegressionFit(0.0, float(y[0]), 0.0, degenerate=True)
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r = sxy / math.sqrt(sxx * syy)
    return RegressionFit(slope, intercept, max(-1.0, min(1.0, r)))


def evaluate(pairs, normalizer: Normalizer | None = None) -> EvalReport:
    """Error metrics for (target, predicted) pairs given in price units.

    ``mse`` is measured in normalized units when the pairs carry normalized
    values (``PredictionPairs``) or a normalizer is supplied; otherwise it is
    taken on the values as given.
    """
    if isinstance(pairs, PredictionPairs):
        t, p = pairs.target, pairs.predicted
        tn, pn = pairs.target_norm, pairs.predicted_norm
    else:
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise SizeError(f"pairs must have shape (n, 2), got {arr.shape}")
        t, p = arr[:, 0], arr[:, 1]
        if normalizer is not None:
            tn = np.atleast_1d(normalizer.normalize(t, "open"))
            pn = np.atleast_1d(normalizer.normalize(p, "open"))
        else:
            tn, pn = t, p
    if t.size < 2:
        raise SizeError(f"evaluation needs at least 2 pairs, got {t.size}")

    mse = float(np.mean((tn - pn) ** 2))
    err = p - t
    rmse_pct = float(100.0 * math.sqrt(np.mean(err**2)) / abs(np.mean(t)))
    nrmse_pct = float(100.0 * math.sqrt(mse) / abs(np.mean(tn))) if np.mean(tn) != 0 else float("nan")
    if np.any(t == 0):
        mape, mape_ok = float("nan"), False
    else:
        mape, mape_ok = float(100.0 * np.mean(np.abs(err) / np.abs(t))), True
    try:
        fit = linear_regression(t, p)
    except DegenerateRegressorError:
        fit = RegressionFit(float("nan"), float("nan"), 0.0, degenerate=True)
    oor = int(np.count_nonzero(normalizer.out_of_range(p, "open"))) if normalizer is not None else 0
    return EvalReport(mse, rmse_pct, mape, fit, np.column_stack([t, p]), mape_ok, nrmse_pct, oor)


@dataclass(frozen=True)
class Comparison:
    rows: tuple[tuple[str, str, float, float], ...]
    winner: str
    test_rmse_pct: Mapping[str, float]

    def to_csv(self) -> str:
        lines = ["set,arch,rmse_pct,mape"]
        lines += [f"{s},{a},{format(r, '.17g')},{format(m, '.17g')}" for s, a, r, m in self.rows]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = [f"{'set':<6} {'arch':<6} {'rmse_pct':>10} {'mape':>10}"]
        out += [f"{s:<6} {a:<6} {r:>10.4f} {m:>10.4f}" for s, a, r, m in self.rows]
        verdict = "tie" if self.winner == "tie" else f"{self.winner} (lower test rmse_pct)"
        out.append(f"winner: {verdict}")
        return "\n".join(out)


def compare(
    report_mlp: Mapping[str, EvalReport],
    report_tdrnn: Mapping[str, EvalReport],
    rel_tol: float = 1e-12,
) -> Comparison:
    """Table of train/test errors per architecture; the winner has the lower test rmse_pct.

    Each argument maps a set name (``"train"``, ``"test"``) to its report;
    a bare :class:`EvalReport` is taken as the test set.
    """
    if isinstance(report_mlp, EvalReport):
        report_mlp = {"test": report_mlp}
    if isinstance(report_tdrnn, EvalReport):
        report_tdrnn = {"test": report_tdrnn}
    if "test" not in report_mlp or "test" not in report_tdrnn:
        raise ComparisonError("both architectures need a test report")
    if set(report_mlp) != set(report_tdrnn):
        raise ComparisonError(f"set names differ: {sorted(report_mlp)} vs {sorted(report_tdrnn)}")

    order = [s for s in ("train", "test") if s in report_mlp] + sorted(set(report_mlp) - {"train", "test"})
    rows = []
    for name in order:
        a, b = report_mlp[name], report_tdrnn[name]
        if len(a) != len(b):
            raise ComparisonError(f"{name} set sizes differ: mlp {len(a)} vs tdrnn {len(b)}")
        rows.append((name, "mlp", a.rmse_pct, a.mape))
        rows.append((name, "tdrnn", b.rmse_pct, b.mape))

    m, t = report_mlp["test"].rmse_pct, report_tdrnn["test"].rmse_pct
    if math.isclose(m, t, rel_tol=rel_tol, abs_tol=0.0) or m == t:
        winner = "tie"
    else:
        winner = "tdrnn" if t < m else "mlp"
    return Comparison(tuple(rows), winner, {"mlp": m, "tdrnn": t})
