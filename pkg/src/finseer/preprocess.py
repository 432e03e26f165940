"""Predictability screening and supervised-window construction.

Pipeline: ``rs_hurst`` + ``screen_predictability`` on the open-price series,
``fit_normalizer`` over the whole dataset, ``build_windows`` pairing day ``t``
features with the open of day ``t + lead``, then a chronological ``split``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateFeatureError,
    DegenerateSeriesError,
    LengthError,
    ParameterError,
    SplitError,
)
from .ingest import FEATURES, SeriesDataset

__all__ = [
    "ANTI_PERSISTENT",
    "RANDOM",
    "PERSISTENT",
    "HurstResult",
    "default_window_sizes",
    "rs_hurst",
    "screen_predictability",
    "Normalizer",
    "fit_normalizer",
    "normalize",
    "denormalize",
    "SupervisedWindowSet",
    "WindowView",
    "build_windows",
    "split",
]

ANTI_PERSISTENT = "anti-persistent"
RANDOM = "random"
PERSISTENT = "persistent"

DEFAULT_BAND = 0.05
DEFAULT_LEAD = 730
DEFAULT_RATIO = 0.8
DEFAULT_RANGE = (0.1, 0.9)


def classify_hurst(h: float, band: float = DEFAULT_BAND) -> str:
    if h < 0.5 - band:
        return ANTI_PERSISTENT
    if h > 0.5 + band:
        return PERSISTENT
    return RANDOM


@dataclass(frozen=True)
class HurstResult:
    """``points`` holds the raw (log n, log mean R/S) pairs; ``h`` may be bias-corrected."""

    h: float
    points: tuple[tuple[float, float], ...]
    classification: str
    band: float = DEFAULT_BAND
    raw_slope: float = float("nan")
    correction: str | None = None

    def to_csv(self) -> str:
        lines = ["log_n,log_rs"]
        lines += [f"{format(x, '.17g')},{format(y, '.17g')}" for x, y in self.points]
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        return f"H={self.h:.6f} class={self.classification}"


def default_window_sizes(length: int) -> list[int]:
    """Powers of two from 16 up to ``length // 4``."""
    sizes = []
    n = 16
    while n <= length // 4:
        sizes.append(n)
        n *= 2
    return sizes


def expected_rs(n: int) -> float:
    """Expected R/S of n iid Gaussian values (Anis-Lloyd with Peters' factor)."""
    total = math.fsum(math.sqrt((n - i) / i) for i in range(1, n))
    if n <= 340:
        front = math.exp(math.lgamma((n - 1) / 2) - math.lgamma(n / 2)) / math.sqrt(math.pi)
    else:
        front = 1.0 / math.sqrt(n * math.pi / 2)
    return (n - 0.5) / n * front * total


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    return float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))


def _mean_rs(x: np.ndarray, n: int) -> float | None:
    chunks = x[: (x.size // n) * n].reshape(-1, n)
    dev = chunks - chunks.mean(axis=1, keepdims=True)
    cum = np.cumsum(dev, axis=1)
    r = cum.max(axis=1) - cum.min(axis=1)
    s = chunks.std(axis=1)  # population form
    ok = s > 0
    if not ok.any():
        return None
    return float(np.mean(r[ok] / s[ok]))


def rs_hurst(
    values: Sequence[float] | np.ndarray,
    window_sizes: Sequence[int] | None = None,
    band: float = DEFAULT_BAND,
    correction: str | None = "anis-lloyd",
) -> HurstResult:
    """Estimate the Hurst exponent by rescaled-range analysis.

    The series is cut into non-overlapping chunks of each window size; the
    mean R/S over non-degenerate chunks is regressed (log-log, OLS) on the
    window size.  With ``correction=None`` the slope itself is ``h``.  The
    default ``"anis-lloyd"`` removes the small-window bias of R/S by
    regressing ``log(R/S) - log(E[R/S])`` instead and adding 0.5, so white
    noise lands near 0.5 rather than near 0.57 for windows of 16..256.
    """
    if correction not in (None, "anis-lloyd"):
        raise ParameterError(f"unknown correction {correction!r}")
    x = np.asarray(values, dtype=np.float64).ravel()
    if window_sizes is None:
        window_sizes = default_window_sizes(x.size)
    sizes = sorted({int(n) for n in window_sizes})
    if len(sizes) < 3:
        raise LengthError(f"need at least 3 distinct window sizes, got {len(sizes)} (series length {x.size})")
    if sizes[0] < 8:
        raise ParameterError(f"window sizes must be >= 8, got {sizes[0]}")
    if x.size < 2 * sizes[-1]:
        raise LengthError(f"series of length {x.size} too short for window size {sizes[-1]}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("series contains non-finite values")

    points = []
    used = []
    for n in sizes:
        rs = _mean_rs(x, n)
        if rs is None or rs <= 0:
            continue
        points.append((math.log(n), math.log(rs)))
        used.append(n)
    if len(points) < 3:
        raise DegenerateSeriesError("series is degenerate: zero variance in (almost) every chunk")

    lx = np.array([p[0] for p in points])
    ly = np.array([p[1] for p in points])
    raw = _slope(lx, ly)
    if correction is None:
        h = raw
    else:
        expected = np.log([expected_rs(n) for n in used])
        h = 0.5 + _slope(lx, ly - expected)
    return HurstResult(h, tuple(points), classify_hurst(h, band), band, raw, correction)


def screen_predictability(result: HurstResult) -> bool:
    """True iff the series is persistent enough to be worth forecasting (H > 0.5)."""
    return result.h > 0.5


@dataclass(frozen=True)
class Normalizer:
    """Per-feature affine min-max map onto ``(lo, hi)``."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    lo: float = DEFAULT_RANGE[0]
    hi: float = DEFAULT_RANGE[1]
    names: tuple[str, ...] = FEATURES

    def __post_init__(self) -> None:
        if not (0.0 < self.lo < self.hi < 1.0):
            raise ParameterError(f"output range must satisfy 0 < lo < hi < 1, got ({self.lo}, {self.hi})")
        if not (len(self.mins) == len(self.maxs) == len(self.names)):
            raise ParameterError("mins, maxs and names must have equal length")
        for name, a, b in zip(self.names, self.mins, self.maxs):
            if not b > a:
                raise DegenerateFeatureError(f"feature {name!r} is constant (min {a!r}, max {b!r})", feature=name)

    def _index(self, feature: int | str) -> int:
        if isinstance(feature, str):
            return self.names.index(feature)
        return int(feature)

    def _affine(self, values: np.ndarray, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
        # exact rational evaluation, one rounding: keeps both directions correctly rounded
        scale = (Fraction(y1) - Fraction(y0)) / (Fraction(x1) - Fraction(x0))
        fx0, fy0 = Fraction(x0), Fraction(y0)
        out = np.empty(values.shape)
        for k, v in enumerate(values):
            out[k] = float(fy0 + (Fraction(float(v)) - fx0) * scale) if math.isfinite(v) else np.nan
        return out

    def normalize(self, x, feature: int | str):
        """Map raw values of one feature to the output range (no clamping).

        Both directions are correctly rounded, so ``denormalize`` recovers the
        raw value bit for bit whenever the output grid is fine enough; if not,
        the result is nudged by a few ulps toward an exact preimage.
        """
        i = self._index(feature)
        xa = np.asarray(x, dtype=np.float64)
        shape = xa.shape
        xs = xa.reshape(-1)
        ys = self._affine(xs, self.mins[i], self.maxs[i], self.lo, self.hi)
        for k in np.flatnonzero(self._denorm(ys, i) != xs):
            if np.isfinite(xs[k]):
                ys[k] = self._exact_preimage(float(ys[k]), float(xs[k]), i)
        return float(ys[0]) if len(shape) == 0 else ys.reshape(shape)

    def _exact_preimage(self, y: float, x: float, i: int, max_steps: int = 8) -> float:
        for direction in (np.inf, -np.inf):
            cand = y
            for _ in range(max_steps):
                cand = float(np.nextafter(cand, direction))
                if float(self._denorm(np.array([cand]), i)[0]) == x:
                    return cand
        return y

    def _denorm(self, ys: np.ndarray, i: int) -> np.ndarray:
        return self._affine(ys, self.lo, self.hi, self.mins[i], self.maxs[i])

    def denormalize(self, y, feature: int | str):
        i = self._index(feature)
        ya = np.asarray(y, dtype=np.float64)
        out = self._denorm(ya.reshape(-1), i)
        return float(out[0]) if ya.ndim == 0 else out.reshape(ya.shape)

    def out_of_range(self, x, feature: int | str) -> np.ndarray:
        """Boolean mask of raw values falling outside the fitted [min, max]."""
        i = self._index(feature)
        xa = np.asarray(x, dtype=np.float64)
        return (xa < self.mins[i]) | (xa > self.maxs[i])

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        return np.column_stack([self.normalize(features[:, j], j) for j in range(features.shape[1])])


def fit_normalizer(dataset: SeriesDataset, range: tuple[float, float] = DEFAULT_RANGE) -> Normalizer:
    if len(dataset) == 0:
        raise DegenerateFeatureError("cannot fit a normalizer on an empty dataset")
    feats = dataset.features()
    mins = feats.min(axis=0)
    maxs = feats.max(axis=0)
    for name, a, b in zip(FEATURES, mins, maxs):
        if not b > a:
            raise DegenerateFeatureError(f"feature {name!r} is constant over the dataset", feature=name)
    lo, hi = range
    return Normalizer(tuple(float(v) for v in mins), tuple(float(v) for v in maxs), float(lo), float(hi))


def normalize(x, normalizer: Normalizer, feature: int | str):
    return normalizer.normalize(x, feature)


def denormalize(y, normalizer: Normalizer, feature: int | str):
    return normalizer.denormalize(y, feature)


@dataclass(frozen=True, eq=False)
class SupervisedWindowSet:
    """Aligned (features of day t, open of day t + lead) pairs, normalized.

    ``split_index`` is the default chronological train/test boundary
    (``floor(0.8 * n)``); it is 0 for sets too small to split.
    """

    inputs: np.ndarray
    targets: np.ndarray
    lead: int
    split_index: int
    raw_targets: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.targets.shape[0])


@dataclass(frozen=True, eq=False)
class WindowView:
    """A contiguous chronological slice ``[start, stop)`` of a window set."""

    windows: SupervisedWindowSet
    start: int
    stop: int

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def inputs(self) -> np.ndarray:
        return self.windows.inputs[self.start : self.stop]

    @property
    def targets(self) -> np.ndarray:
        return self.windows.targets[self.start : self.stop]

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


def _train_count(n: int, ratio: float) -> int:
    # exact decimal arithmetic: floor(0.29 * 100) must be 29, not 28
    return math.floor(Fraction(repr(float(ratio))) * n)


def build_windows(dataset: SeriesDataset, normalizer: Normalizer, lead: int = DEFAULT_LEAD) -> SupervisedWindowSet:
    lead = int(lead)
    if lead < 1:
        raise ParameterError(f"lead must be >= 1, got {lead}")
    n = len(dataset)
    if n < lead + 1:
        raise LengthError(f"dataset has {n} records; lead {lead} needs at least {lead + 1}")
    feats = dataset.features()
    inputs = normalizer.transform(feats[: n - lead])
    raw_targets = feats[lead:, 0].copy()
    targets = np.asarray(normalizer.normalize(raw_targets, "open"), dtype=np.float64)
    inputs.setflags(write=False)
    targets.setflags(write=False)
    raw_targets.setflags(write=False)
    return SupervisedWindowSet(inputs, targets, lead, _train_count(n - lead, DEFAULT_RATIO), raw_targets)


def split(windows: SupervisedWindowSet, ratio: float = DEFAULT_RATIO) -> tuple[WindowView, WindowView]:
    """Chronological split: the first ``floor(ratio * n)`` pairs train, the rest test."""
    if not 0.0 < ratio < 1.0:
        raise SplitError(f"ratio must be in (0, 1), got {ratio}")
    n = len(windows)
    k = _train_count(n, ratio)
    if k == 0 or k == n:
        raise SplitError(f"ratio {ratio} on {n} pairs leaves an empty train or test set")
    return WindowView(windows, 0, k), WindowView(windows, k, n)
