"""Daily OHLCV ingestion: CSV parsing, validation, serialization and HTTP fetch.

The interchange format is a headed CSV with the fixed column order
``date,open,high,low,close,volume``.  Rows may arrive in any order; they are
sorted by date and duplicate dates are rejected.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import FetchError, ParseError, ValidationError

__all__ = [
    "COLUMNS",
    "FEATURES",
    "OhlcvRecord",
    "SeriesDataset",
    "parse_csv",
    "serialize_csv",
    "fetch_csv",
]

COLUMNS = ("date", "open", "high", "low", "close", "volume")
FEATURES = COLUMNS[1:]


def _fmt(x: float) -> str:
    # 17 significant digits round-trips every binary64 value
    return format(x, ".17g")


def check_record(open_: float, high: float, low: float, close: float, volume: float) -> tuple[str, str] | None:
    """Return ``(rule, message)`` for the first violated invariant, or None."""
    for name, v in (("open", open_), ("high", high), ("low", low), ("close", close)):
        if not math.isfinite(v) or v <= 0:
            return "positive-price", f"{name} must be finite and > 0 (got {v!r})"
    if not math.isfinite(volume) or volume < 0:
        return "volume", f"volume must be finite and >= 0 (got {volume!r})"
    if high < low:
        return "high>=low", f"high {high!r} < low {low!r}"
    if high < max(open_, close):
        return "high>=open,close", f"high {high!r} below max(open, close) {max(open_, close)!r}"
    if low > min(open_, close):
        return "low<=open,close", f"low {low!r} above min(open, close) {min(open_, close)!r}"
    return None


@dataclass(frozen=True)
class OhlcvRecord:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self) -> None:
        bad = check_record(self.open, self.high, self.low, self.close, self.volume)
        if bad is not None:
            rule, msg = bad
            raise ValidationError(msg, rule=rule)

    def features(self) -> tuple[float, float, float, float, float]:
        return (self.open, self.high, self.low, self.close, self.volume)


@dataclass(frozen=True)
class SeriesDataset:
    """An ordered, validated sequence of daily records for one symbol."""

    symbol: str
    records: tuple[OhlcvRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.date <= prev.date:
                raise ValidationError(
                    f"dates must be strictly increasing ({prev.date} then {cur.date})",
                    rule="increasing-dates",
                )

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        if name not in FEATURES:
            raise KeyError(name)
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    def features(self) -> np.ndarray:
        """Feature matrix of shape (n, 5) in open, high, low, close, volume order."""
        if not self.records:
            return np.empty((0, len(FEATURES)))
        return np.array([r.features() for r in self.records], dtype=np.float64)

    @property
    def dates(self) -> list[dt.date]:
        return [r.date for r in self.records]


def parse_csv(text: str | TextIO, symbol: str = "") -> SeriesDataset:
    """Parse OHLCV CSV text (or a text stream) into a :class:`SeriesDataset`.

    Raises :class:`ParseError` for malformed rows and :class:`ValidationError`
    for rows that break a record invariant or repeat a date.  Both carry the
    1-based line number of the offending row.
    """
    if isinstance(text, str):
        stream: Iterable[str] = io.StringIO(text, newline="")
    else:
        stream = text
    reader = csv.reader(stream)

    header = None
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        header = [c.strip().lower() for c in row]
        break
    if header is None:
        raise ParseError("missing header line", line=1)
    if tuple(header) != COLUMNS:
        raise ParseError(f"expected header {','.join(COLUMNS)}, got {','.join(header)}", line=reader.line_num)

    rows: list[tuple[int, OhlcvRecord]] = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(COLUMNS):
            raise ParseError(f"expected {len(COLUMNS)} fields, got {len(row)}", line=lineno)
        try:
            day = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(f"unparsable date {row[0]!r}", line=lineno) from None
        values = []
        for name, cell in zip(FEATURES, row[1:]):
            try:
                values.append(float(cell.strip()))
            except ValueError:
                raise ParseError(f"unparsable {name} {cell!r}", line=lineno) from None
        bad = check_record(*values)
        if bad is not None:
            rule, msg = bad
            raise ValidationError(msg, line=lineno, rule=rule)
        rows.append((lineno, OhlcvRecord(day, *values)))

    rows.sort(key=lambda item: item[1].date)
    for (_, prev), (lineno, cur) in zip(rows, rows[1:]):
        if cur.date == prev.date:
            raise ValidationError(f"duplicate date {cur.date}", line=lineno, rule="duplicate-date")
    return SeriesDataset(symbol, tuple(rec for _, rec in rows))


def serialize_csv(dataset: SeriesDataset) -> str:
    lines = [",".join(COLUMNS)]
    for r in dataset.records:
        lines.append(",".join([r.date.isoformat(), *(_fmt(v) for v in r.features())]))
    return "\n".join(lines) + "\n"


def fetch_csv(url: str, timeout: float = 30.0) -> str:
    """GET ``url`` and return the body as text.  Nothing is returned on failure."""
    if not url.lower().startswith(("http://", "https://")):
        raise FetchError(f"unsupported URL scheme: {url!r}")
    req = urllib.request.Request(url, headers={"Accept": "text/csv"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
            charset = resp.headers.get_content_charset() or "utf-8"
    except urllib.error.HTTPError as exc:
        raise FetchError(f"HTTP {exc.code} fetching {url}", status=exc.code, cause=exc) from exc
    except (urllib.error.URLError, OSError) as exc:
        raise FetchError(f"failed to fetch {url}: {exc}", cause=exc) from exc
    if status != 200:
        raise FetchError(f"HTTP {status} fetching {url}", status=status)
    try:
        return body.decode(charset)
    except (UnicodeDecodeError, LookupError) as exc:
        raise FetchError(f"undecodable response body from {url}", status=status, cause=exc) from exc
