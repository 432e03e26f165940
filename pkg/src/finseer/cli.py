"""Command-line entry point: ``finseer <command> [flags]``.

Commands: ``fetch``, ``hurst``, ``train``, ``predict``, ``evaluate`` and
``compare``.  Every command is deterministic for fixed flags, seed and input
bytes, and writes its output files only after all of them are computed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ._files import atomic_write_all
from .errors import FinseerError, ParameterError, ShapeError
from .evaluation import compare, evaluate, predict_series
from .ingest import SeriesDataset, fetch_csv, parse_csv
from .modelio import describe, dumps, load_model
from .nnet import DEFAULT_DELAYS, DEFAULT_HIDDEN, MlpNetwork, TdrnnNetwork, init_weights
from .preprocess import (
    DEFAULT_LEAD,
    DEFAULT_RANGE,
    DEFAULT_RATIO,
    build_windows,
    fit_normalizer,
    rs_hurst,
    screen_predictability,
    split,
)
from .trainer import TrainConfig, train

log = logging.getLogger("finseer")

SEED_ENV = "FINSEER_SEED"


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig
    input: str | None = None
    url: str | None = None
    arch: str | None = None
    hidden: tuple[int, ...] | None = None
    delays: int | None = None
    lead: int = DEFAULT_LEAD
    split: float = DEFAULT_RATIO
    range: tuple[float, float] = DEFAULT_RANGE
    out_dir: Path = Path(".")
    model: Path | None = None
    bias: bool = True
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.arch not in (None, "mlp", "tdrnn"):
            raise ParameterError(f"unknown architecture {self.arch!r}")
        if self.delays is not None:
            if self.arch == "mlp":
                raise ParameterError("--delays only applies to --arch tdrnn")
            if self.delays < 1:
                raise ParameterError(f"--delays must be >= 1, got {self.delays}")
        if self.hidden is not None and (not self.hidden or any(h < 1 for h in self.hidden)):
            raise ParameterError(f"--hidden sizes must be >= 1, got {self.hidden}")
        if self.lead < 1:
            raise ParameterError(f"--lead must be >= 1, got {self.lead}")
        if not 0.0 < self.split < 1.0:
            raise ParameterError(f"--split must be in (0, 1), got {self.split}")
        lo, hi = self.range
        if not 0.0 < lo < hi < 1.0:
            raise ParameterError(f"--range-lo/--range-hi must satisfy 0 < lo < hi < 1, got ({lo}, {hi})")

    @property
    def model_path(self) -> Path:
        return self.model if self.model is not None else self.out_dir / "model.txt"


def _hidden(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return 0
    try:
        return int(env)
    except ValueError:
        raise ParameterError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def run_config(args: argparse.Namespace, default_arch: str | None = None) -> RunConfig:
    tc = TrainConfig(
        eta=args.eta,
        epochs=args.epochs,
        repeats=args.repeats,
        seed=_seed(args.seed),
        goal_mse=args.goal_mse,
        shuffle=args.shuffle,
    )
    return RunConfig(
        train=tc,
        input=args.input,
        url=args.url,
        arch=args.arch or default_arch,
        hidden=args.hidden,
        delays=args.delays,
        lead=args.lead,
        split=args.split,
        range=(args.range_lo, args.range_hi),
        out_dir=Path(args.out_dir),
        model=Path(args.model) if args.model else None,
        bias=not args.no_bias,
        timeout=args.timeout,
    )


def load_dataset(cfg: RunConfig) -> SeriesDataset:
    if cfg.input and cfg.url:
        raise ParameterError("give either --input or --url, not both")
    if cfg.input:
        path = Path(cfg.input)
        with path.open(encoding="utf-8", newline="") as fh:
            return parse_csv(fh, symbol=path.stem)
    if cfg.url:
        return parse_csv(fetch_csv(cfg.url, cfg.timeout), symbol=cfg.url.rsplit("/", 1)[-1])
    raise ParameterError("no data source: pass --input PATH or --url URL")


def build_network(arch: str, cfg: RunConfig):
    hidden = cfg.hidden or DEFAULT_HIDDEN
    if arch == "tdrnn":
        net = TdrnnNetwork(cfg.delays or DEFAULT_DELAYS, hidden, bias=cfg.bias)
    else:
        net = MlpNetwork((5, *hidden, 1), bias=cfg.bias)
    return init_weights(net, cfg.train.seed)


def screen(dataset: SeriesDataset) -> None:
    try:
        result = rs_hurst(dataset.column("open"))
    except FinseerError as exc:
        log.warning("Hurst screening skipped: %s", exc)
        return
    if not screen_predictability(result):
        log.warning("series is not persistent (%s); forecasts may be unreliable", result.summary())
    else:
        log.info("predictability screen passed: %s", result.summary())


def _pipeline(cfg: RunConfig, dataset: SeriesDataset, normalizer=None):
    if normalizer is None:
        normalizer = fit_normalizer(dataset, cfg.range)
    windows = build_windows(dataset, normalizer, cfg.lead)
    train_view, test_view = split(windows, cfg.split)
    return normalizer, train_view, test_view


def cmd_fetch(cfg: RunConfig) -> int:
    if not cfg.url:
        raise ParameterError("fetch needs --url")
    text = fetch_csv(cfg.url, cfg.timeout)
    dataset = parse_csv(text)
    out = cfg.out_dir / "data.csv"
    atomic_write_all({out: text})
    print(f"fetched {len(dataset)} records to {out}")
    return 0


def cmd_hurst(cfg: RunConfig) -> int:
    dataset = load_dataset(cfg)
    result = rs_hurst(dataset.column("open"))
    csv_text = result.to_csv()
    atomic_write_all({cfg.out_dir / "hurst.csv": csv_text})
    sys.stdout.write(csv_text)
    print(result.summary())
    if not screen_predictability(result):
        log.warning("H=%.4f is not above 0.5: series fails the persistence screen", result.h)
    return 0


def _train_one(arch: str, cfg: RunConfig, train_view):
    net = build_network(arch, cfg)
    return train(net, train_view, cfg.train)


def cmd_train(cfg: RunConfig) -> int:
    dataset = load_dataset(cfg)
    screen(dataset)
    normalizer, train_view, _ = _pipeline(cfg, dataset)
    net, report = _train_one(cfg.arch or "mlp", cfg, train_view)
    atomic_write_all({
        cfg.model_path: dumps(net, normalizer),
        cfg.out_dir / "curve.csv": report.to_csv(),
    })
    print(f"{describe(net)}: {report.final_epoch} epochs, final train MSE={report.final_mse:.6g}"
          + (" (goal reached)" if report.stopped_early else ""))
    return 0


def _load_checked(cfg: RunConfig):
    network, normalizer = load_model(cfg.model_path)
    arch = "tdrnn" if isinstance(network, TdrnnNetwork) else "mlp"
    if cfg.arch is not None and cfg.arch != arch:
        raise ShapeError(f"model is {describe(network)!r} but --arch {cfg.arch} was given")
    hidden = network.hidden if arch == "tdrnn" else network.layer_sizes[1:-1]
    if cfg.hidden is not None and tuple(cfg.hidden) != tuple(hidden):
        raise ShapeError(f"model hidden sizes {list(hidden)} do not match --hidden {list(cfg.hidden)}")
    if cfg.delays is not None and (arch != "tdrnn" or cfg.delays != network.delay_depth):
        raise ShapeError(f"model {describe(network)!r} does not match --delays {cfg.delays}")
    return network, normalizer


def _predict(cfg: RunConfig):
    network, normalizer = _load_checked(cfg)
    dataset = load_dataset(cfg)
    _, _, test_view = _pipeline(cfg, dataset, normalizer)
    return normalizer, predict_series(network, test_view, normalizer)


def cmd_predict(cfg: RunConfig) -> int:
    _, pairs = _predict(cfg)
    out = cfg.out_dir / "predictions.csv"
    atomic_write_all({out: pairs.to_csv()})
    print(f"wrote {len(pairs)} predictions to {out}")
    return 0


def format_report(name: str, report) -> str:
    mape = f"{report.mape:.4f}%" if report.mape_available else "unavailable"
    lines = [
        f"{name}: n={len(report)} mse={report.mse:.6g} rmse_pct={report.rmse_pct:.4f}% "
        f"mape={mape} normalized_rmse_pct={report.nrmse_pct:.4f}%",
        f"{name}: {report.fit.summary()}" + (" (degenerate)" if report.fit.degenerate else ""),
    ]
    if report.n_out_of_range:
        lines.append(f"{name}: {report.n_out_of_range} prediction(s) outside the fitted open range")
    return "\n".join(lines)


def cmd_evaluate(cfg: RunConfig) -> int:
    normalizer, pairs = _predict(cfg)
    report = evaluate(pairs, normalizer)
    out = cfg.out_dir / "predictions.csv"
    atomic_write_all({out: pairs.to_csv()})
    print(format_report("test", report))
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    dataset = load_dataset(cfg)
    screen(dataset)
    normalizer, train_view, test_view = _pipeline(cfg, dataset)
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = {arch: pool.submit(_train_one, arch, cfg, train_view) for arch in ("mlp", "tdrnn")}
        trained = {arch: f.result() for arch, f in futures.items()}

    reports = {}
    files = {}
    for arch, (net, curve) in trained.items():
        test_pairs = predict_series(net, test_view, normalizer)
        reports[arch] = {
            "train": evaluate(predict_series(net, train_view, normalizer), normalizer),
            "test": evaluate(test_pairs, normalizer),
        }
        files[cfg.out_dir / f"curve_{arch}.csv"] = curve.to_csv()
        files[cfg.out_dir / f"predictions_{arch}.csv"] = test_pairs.to_csv()
    table = compare(reports["mlp"], reports["tdrnn"])
    files[cfg.out_dir / "comparison.csv"] = table.to_csv()
    atomic_write_all(files)

    print(table.to_text())
    for arch in ("mlp", "tdrnn"):
        for name in ("train", "test"):
            print(format_report(f"{arch}/{name}", reports[arch][name]))
    return 0


COMMANDS = {
    "fetch": (cmd_fetch, None),
    "hurst": (cmd_hurst, None),
    "train": (cmd_train, "mlp"),
    "predict": (cmd_predict, None),
    "evaluate": (cmd_evaluate, None),
    "compare": (cmd_compare, None),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="OHLCV CSV file (date,open,high,low,close,volume)")
    common.add_argument("--url", help="HTTP(S) URL serving the same CSV schema")
    common.add_argument("--timeout", type=float, default=30.0, help="fetch timeout in seconds")
    common.add_argument("--arch", choices=("mlp", "tdrnn"))
    common.add_argument("--hidden", type=_hidden, help="hidden layer sizes, e.g. 10 or 8,4 (default 10)")
    common.add_argument("--delays", type=int, help=f"tapped-delay depth for tdrnn (default {DEFAULT_DELAYS})")
    common.add_argument("--no-bias", action="store_true", help="freeze all biases at zero")
    common.add_argument("--lead", type=int, default=DEFAULT_LEAD, help="days between input and target")
    common.add_argument("--split", type=float, default=DEFAULT_RATIO, help="chronological train fraction")
    common.add_argument("--eta", type=float, default=0.25, help="learning rate")
    common.add_argument("--epochs", type=int, default=1000)
    common.add_argument("--repeats", type=int, default=2, help="passes of the epoch schedule")
    common.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    common.add_argument("--goal-mse", type=float, help="stop once an epoch MSE reaches this value")
    common.add_argument("--shuffle", action="store_true", help="shuffle example order each epoch")
    common.add_argument("--range-lo", type=float, default=DEFAULT_RANGE[0])
    common.add_argument("--range-hi", type=float, default=DEFAULT_RANGE[1])
    common.add_argument("--model", help="model file path (default OUT_DIR/model.txt)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="finseer", description="Neural stock-series forecasting toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fetch": "download a CSV over HTTP and save it as OUT_DIR/data.csv",
        "hurst": "rescaled-range Hurst analysis of the open-price series",
        "train": "train one network and save the model and curve.csv",
        "predict": "write test-set predictions.csv from a saved model",
        "evaluate": "predictions.csv plus error metrics and regression fit",
        "compare": "train MLP and TDRNN on the same split and tabulate errors",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    func, default_arch = COMMANDS[args.command]
    try:
        cfg = run_config(args, default_arch)
        return func(cfg)
    except (FinseerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
