"""Seeded synthetic market series for tests, demos and calibration."""

from __future__ import annotations

import datetime as dt

import numpy as np

from .ingest import OhlcvRecord, SeriesDataset

__all__ = ["ar1_increments", "ar1_cumulative", "synthetic_ohlcv", "business_days"]


def ar1_increments(n: int, phi: float = 0.7, sigma: float = 1.0, seed: int | None = 0) -> np.ndarray:
    """``e[t] = phi * e[t-1] + sigma * z[t]``, started from the stationary law."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    e = np.empty(n)
    e[0] = sigma * z[0] / np.sqrt(1.0 - phi * phi)
    for t in range(1, n):
        e[t] = phi * e[t - 1] + sigma * z[t]
    return e


def ar1_cumulative(n: int, phi: float = 0.7, sigma: float = 1.0, seed: int | None = 0, start: float = 0.0) -> np.ndarray:
    return start + np.cumsum(ar1_increments(n, phi, sigma, seed))


def business_days(n: int, first: dt.date = dt.date(2010, 1, 4)) -> list[dt.date]:
    days = []
    d = first
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def synthetic_ohlcv(
    n: int = 1460,
    phi: float = 0.7,
    sigma: float = 5.0,
    start: float = 2300.0,
    seed: int | None = 0,
    symbol: str = "SYNTH",
) -> SeriesDataset:
    """Daily OHLCV whose open is an AR(1)-increment cumulative series.

    Close is the open plus an independent intraday move, high/low envelope
    both with a positive margin, and volume is log-normal.  Only the open
    carries the persistent structure.
    """
    rng = np.random.default_rng(None if seed is None else seed + 1)
    opens = ar1_cumulative(n, phi, sigma, seed, start)
    if np.any(opens <= 0):
        raise ValueError("synthetic open series went non-positive; raise `start` or lower `sigma`")
    closes = opens + rng.normal(0.0, sigma, n)
    closes = np.where(closes > 0, closes, opens)
    highs = np.maximum(opens, closes) + np.abs(rng.normal(0.0, sigma / 2, n))
    lows = np.minimum(opens, closes) - np.abs(rng.normal(0.0, sigma / 2, n))
    lows = np.where(lows > 0, lows, np.minimum(opens, closes))
    volumes = np.round(rng.lognormal(np.log(2.0e6), 0.3, n))
    records = [
        OhlcvRecord(d, float(o), float(h), float(lo), float(c), float(v))
        for d, o, h, lo, c, v in zip(business_days(n), opens, highs, lows, closes, volumes)
    ]
    return SeriesDataset(symbol, tuple(records))
