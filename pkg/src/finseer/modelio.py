"""Plain-text model files.

Layout::

    FINSEER-MODEL v1
    mlp 5 10 1                      | tdrnn D C 5 10 1   [nobias]
    normalizer <lo> <hi>
    min <5 values>
    max <5 values>
    layer <l> <rows> <cols>
    w <cols values>                 (one line per row)
    b <rows values>
    ...

Every float is written with 17 significant digits, so loading reproduces
the saved values bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ._files import atomic_write
from .errors import ModelFormatError
from .ingest import FEATURES
from .nnet import MlpNetwork, TdrnnNetwork
from .preprocess import Normalizer

__all__ = ["MAGIC", "describe", "dumps", "loads", "save_model", "load_model"]

MAGIC = "FINSEER-MODEL v1"


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def describe(network) -> str:
    if isinstance(network, TdrnnNetwork):
        core = network.core
        sizes = (network.n_features, *core.layer_sizes[1:])
        head = f"tdrnn {network.delay_depth} {network.context_size} " + " ".join(map(str, sizes))
    else:
        core = network
        head = "mlp " + " ".join(map(str, core.layer_sizes))
    return head if core.bias else head + " nobias"


def dumps(network, normalizer: Normalizer) -> str:
    core = network.core if isinstance(network, TdrnnNetwork) else network
    lines = [MAGIC, describe(network)]
    lines.append(f"normalizer {_fmt([normalizer.lo, normalizer.hi])}")
    lines.append(f"min {_fmt(normalizer.mins)}")
    lines.append(f"max {_fmt(normalizer.maxs)}")
    for l, (w, b) in enumerate(zip(core.weights, core.biases), start=1):
        lines.append(f"layer {l} {w.shape[0]} {w.shape[1]}")
        lines.extend(f"w {_fmt(row)}" for row in w)
        lines.append(f"b {_fmt(b)}")
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str) -> None:
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what: str) -> tuple[int, list[str]]:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"unexpected end of file, expected {what}", line=self.pos + 1)
        self.pos += 1
        return self.pos, self.lines[self.pos - 1].split()

    def keyed(self, key: str, count: int | None = None) -> tuple[int, list[str]]:
        lineno, tok = self.next(f"'{key}' line")
        if not tok or tok[0] != key:
            raise ModelFormatError(f"expected '{key}' line", line=lineno)
        if count is not None and len(tok) - 1 != count:
            raise ModelFormatError(f"'{key}' line needs {count} values, got {len(tok) - 1}", line=lineno)
        return lineno, tok[1:]


def _floats(tokens: list[str], lineno: int) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ModelFormatError(f"unparsable number in {' '.join(tokens)!r}", line=lineno) from None


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ModelFormatError(f"expected integers, got {' '.join(tokens)!r}", line=lineno) from None


def loads(text: str) -> tuple[MlpNetwork | TdrnnNetwork, Normalizer]:
    src = _Lines(text)
    lineno, tok = src.next("header")
    if " ".join(tok) != MAGIC:
        raise ModelFormatError(f"not a model file (expected {MAGIC!r})", line=lineno)

    lineno, tok = src.next("architecture line")
    bias = True
    if tok and tok[-1] == "nobias":
        bias = False
        tok = tok[:-1]
    if not tok or tok[0] not in ("mlp", "tdrnn"):
        raise ModelFormatError("architecture must be 'mlp' or 'tdrnn'", line=lineno)
    arch, dims = tok[0], _ints(tok[1:], lineno)
    try:
        if arch == "mlp":
            network = MlpNetwork(dims, bias=bias)
            core = network
        else:
            if len(dims) < 5:
                raise ModelFormatError("tdrnn needs D C features hidden... outputs", line=lineno)
            d, c, nf, *rest = dims
            network = TdrnnNetwork(d, rest[:-1], c, nf, rest[-1], bias)
            core = network.core
    except ModelFormatError:
        raise
    except ValueError as exc:
        raise ModelFormatError(str(exc), line=lineno) from None

    lineno, tok = src.keyed("normalizer", 2)
    lo, hi = _floats(tok, lineno)
    n_feat = len(FEATURES)
    lineno, tok = src.keyed("min", n_feat)
    mins = _floats(tok, lineno)
    lineno, tok = src.keyed("max", n_feat)
    maxs = _floats(tok, lineno)
    try:
        normalizer = Normalizer(tuple(mins), tuple(maxs), lo, hi)
    except ValueError as exc:
        raise ModelFormatError(f"bad normalizer: {exc}", line=lineno) from None

    for l, (w, b) in enumerate(zip(core.weights, core.biases), start=1):
        lineno, tok = src.keyed("layer", 3)
        if _ints(tok, lineno) != [l, w.shape[0], w.shape[1]]:
            raise ModelFormatError(f"expected 'layer {l} {w.shape[0]} {w.shape[1]}'", line=lineno)
        for j in range(w.shape[0]):
            lineno, tok = src.keyed("w", w.shape[1])
            w[j] = _floats(tok, lineno)
        lineno, tok = src.keyed("b", b.shape[0])
        b[:] = _floats(tok, lineno)
    if not np.all(np.isfinite(core.params)):
        raise ModelFormatError("model contains non-finite weights")
    if not bias and any(np.any(b != 0) for b in core.biases):
        raise ModelFormatError("nobias model has nonzero biases")
    for k in range(src.pos, len(src.lines)):
        if src.lines[k].strip():
            raise ModelFormatError("trailing content after last layer", line=k + 1)
    return network, normalizer


def save_model(path: str | Path, network, normalizer: Normalizer) -> None:
    atomic_write(Path(path), dumps(network, normalizer))


def load_model(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"model file is not UTF-8 text: {exc}", line=None) from None
    return loads(text)
