import time
from contextlib import contextmanager

import numpy as np
import pytest

from finseer.ingest import serialize_csv
from finseer.nnet import MlpNetwork, init_weights
from finseer.synthetic import synthetic_ohlcv
from finseer.trainer import train_example


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load cached) numba kernels once so timing tests measure training only
    net = init_weights(MlpNetwork([2, 2, 1]), 0)
    train_example(net, [0.0, 1.0], 1.0, 0.1)


@pytest.fixture(scope="session")
def dataset_1460():
    return synthetic_ohlcv(1460, seed=0)


@pytest.fixture(scope="session")
def csv_1460(tmp_path_factory, dataset_1460):
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    path.write_text(serialize_csv(dataset_1460), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    @contextmanager
    def check(number: int, title: str):
        t0 = time.perf_counter()
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            lines.append((number, f"FAIL  criterion {number}: {title} ({time.perf_counter() - t0:.2f}s) {exc}".splitlines()[0]))
            raise
        detail = f" [{'; '.join(notes)}]" if notes else ""
        lines.append((number, f"PASS  criterion {number}: {title} ({time.perf_counter() - t0:.2f}s){detail}"))

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
