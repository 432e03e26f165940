"""Property suites for every module's invariants (hypothesis, >= 100 cases each)."""

import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from finseer.errors import FinseerError
from finseer.evaluation import evaluate, linear_regression
from finseer.ingest import OhlcvRecord, SeriesDataset, parse_csv, serialize_csv
from finseer.modelio import dumps, loads
from finseer.nnet import MlpNetwork, TdrnnNetwork, forward_mlp, forward_tdrnn, init_weights, sigmoid
from finseer.preprocess import Normalizer, build_windows, classify_hurst, fit_normalizer, rs_hurst, split
from finseer.synthetic import ar1_cumulative, synthetic_ohlcv
from finseer.trainer import TrainConfig, example_error, gradient_check, train, train_example

from oracles import sigmoid as ref_sigmoid

PROPS = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 2**32 - 1)
prices = st.floats(0.01, 1e6, allow_nan=False)


# ingest

@st.composite
def datasets(draw, min_size=0, max_size=30):
    n = draw(st.integers(min_size, max_size))
    gaps = draw(st.lists(st.integers(1, 5), min_size=n, max_size=n))
    day = dt.date(2000, 1, 1)
    records = []
    for g in gaps:
        day += dt.timedelta(days=g)
        o, c = draw(prices), draw(prices)
        high = max(o, c) * draw(st.floats(1.0, 1.5))
        low = min(o, c) * draw(st.floats(0.5, 1.0))
        vol = draw(st.one_of(st.just(0.0), st.floats(0, 1e12)))
        records.append(OhlcvRecord(day, o, high, low, c, vol))
    return SeriesDataset(draw(st.sampled_from(["", "X"])), tuple(records))


@PROPS
@given(datasets())
def test_csv_round_trip(ds):
    back = parse_csv(serialize_csv(ds), symbol=ds.symbol)
    assert back == ds


@PROPS
@given(
    st.sampled_from(["high<low", "neg", "zero", "nan", "vol", "fields", "number", "date", "above"]),
    prices,
)
def test_invalid_rows_always_error(kind, p):
    row = {
        "high<low": f"2020-01-02,{p},{p},{p * 2 + 1},{p},1",
        "neg": f"2020-01-02,{-p},{p},{p / 2},{p},1",
        "zero": f"2020-01-02,0,{p},{p / 2},{p},1",
        "nan": f"2020-01-02,nan,{p},{p / 2},{p},1",
        "vol": f"2020-01-02,{p},{p},{p},{p},-1",
        "fields": f"2020-01-02,{p},{p},{p}",
        "number": f"2020-01-02,{p}x,{p},{p},{p},1",
        "date": f"2020-02-30,{p},{p},{p},{p},1",
        "above": f"2020-01-02,{p * 3},{p * 2},{p},{p},1",
    }[kind]
    text = "date,open,high,low,close,volume\n2020-01-01,1,1,1,1,1\n" + row + "\n"
    with pytest.raises(FinseerError) as info:
        parse_csv(text)
    assert info.value.line == 3


# preprocess

@PROPS
@given(seeds, st.integers(256, 2048), st.floats(1e-3, 1e3), st.floats(-1e3, 1e3))
def test_hurst_scale_shift_invariant(seed, n, a, b):
    x = np.random.default_rng(seed).standard_normal(n)
    h0 = rs_hurst(x)
    h1 = rs_hurst(a * x + b)
    assert abs(h0.h - h1.h) < 1e-9
    assert h0.classification == h1.classification or abs(abs(h0.h - 0.5) - 0.05) < 1e-9


@PROPS
@given(seeds, st.integers(256, 1024), st.floats(-0.9, 0.9))
def test_hurst_result_invariants(seed, n, phi):
    r = rs_hurst(ar1_cumulative(n, phi, 1.0, seed))
    logs = [p[0] for p in r.points]
    assert len(logs) >= 3 and all(b > a for a, b in zip(logs, logs[1:]))
    assert r.classification == classify_hurst(r.h, r.band)
    if r.h < 0.45:
        assert r.classification == "anti-persistent"
    elif r.h > 0.55:
        assert r.classification == "persistent"
    else:
        assert r.classification == "random"


@PROPS
@given(seeds, st.integers(20, 300), st.data())
def test_window_alignment_exact(seed, n, data):
    sigma, start = data.draw(st.floats(0.1, 20)), data.draw(st.floats(100, 5000))
    try:
        ds = synthetic_ohlcv(n, sigma=sigma, start=start, seed=seed)
    except ValueError:
        assume(False)
    lead = data.draw(st.integers(1, n - 1))
    norm = fit_normalizer(ds)
    w = build_windows(ds, norm, lead)
    opens = ds.column("open")[lead:]
    assert len(w) == n - lead
    back = norm.denormalize(w.targets, "open")
    # image of one normalized ulp (ulp is 2**-53 on [0.5, 1)); when it is no
    # wider than the raw value's own ulp, every raw value has an exact preimage
    step = (norm.maxs[0] - norm.mins[0]) / (norm.hi - norm.lo) * 2.0**-53
    exact = step <= np.spacing(opens)
    assert np.array_equal(back[exact], opens[exact])
    assert np.all(np.abs(back - opens) <= step + np.spacing(opens))


@PROPS
@given(st.integers(2, 2000), st.floats(0.01, 0.99))
def test_split_is_partition(n, ratio):
    x = np.arange(n, dtype=float)[:, None].repeat(5, axis=1)
    from finseer.preprocess import SupervisedWindowSet

    ws = SupervisedWindowSet(x, x[:, 0], 1, 0, x[:, 0])
    k = math.floor(ratio * n + 1e-9)
    assume(0 < k < n)
    tr, te = split(ws, ratio)
    idx = np.concatenate([tr.indices, te.indices])
    assert np.array_equal(idx, np.arange(n))
    assert tr.stop == te.start and len(tr) + len(te) == n


@st.composite
def price_like(draw):
    n = draw(st.integers(2, 40))
    level = draw(st.floats(1.0, 1e5))
    vol_level = draw(st.floats(1e3, 1e9))
    rng = np.random.default_rng(draw(seeds))
    feats = np.column_stack([level * rng.uniform(0.5, 2.0, (n, 4)), vol_level * rng.uniform(0.5, 2.0, n)])
    assume(np.all(feats.max(axis=0) > feats.min(axis=0)))
    return feats


@PROPS
@given(price_like(), st.data())
def test_normalize_round_trip(feats, data):
    lo = data.draw(st.floats(0.01, 0.8))
    hi = data.draw(st.floats(lo + 0.1, 0.99))
    norm = Normalizer(tuple(feats.min(axis=0)), tuple(feats.max(axis=0)), lo, hi)
    for j in range(5):
        y = norm.normalize(feats[:, j], j)
        assert np.all((y >= lo) & (y <= hi))
        np.testing.assert_allclose(norm.denormalize(y, j), feats[:, j], rtol=1e-12, atol=0)


@PROPS
@given(datasets(min_size=2, max_size=20), st.floats(0.01, 0.5), st.floats(0.01, 0.49))
def test_normalize_round_trip_wide_ranges(ds, lo, width):
    # arbitrary dynamic range: the error is bounded by the image of one output ulp
    feats = ds.features()
    assume(np.all(feats.max(axis=0) > feats.min(axis=0)))
    norm = fit_normalizer(ds, (lo, lo + width))
    for j in range(5):
        x = feats[:, j]
        back = norm.denormalize(norm.normalize(x, j), j)
        step = (norm.maxs[j] - norm.mins[j]) / width * 2.0**-53
        assert np.all(np.abs(back - x) <= step + np.spacing(x))


# nnet

@PROPS
@given(st.floats(-30, 30))
def test_sigmoid_symmetry(x):
    assert abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-15
    assert abs(sigmoid(x) - ref_sigmoid(x)) <= 1e-15


layer_lists = st.lists(st.integers(1, 8), min_size=1, max_size=3)


@PROPS
@given(layer_lists, seeds, st.floats(0.1, 3.0), st.booleans())
def test_forward_output_strictly_inside(hidden, seed, half, bias):
    net = init_weights(MlpNetwork([5, *hidden, 1], bias=bias), seed, half)
    x = np.random.default_rng(seed).uniform(0, 1, 5)
    out, acts = forward_mlp(net, x)
    assert 0.0 < out < 1.0
    assert all(np.all((a > 0) & (a < 1)) for a in acts[1:])
    out2, _ = forward_mlp(net.copy(), x.copy())
    assert out == out2


@PROPS
@given(seeds)
def test_init_weights_deterministic(seed):
    a = init_weights(MlpNetwork([5, 4, 1]), seed, 0.5)
    b = init_weights(MlpNetwork([5, 4, 1]), seed, 0.5)
    assert a.params.tobytes() == b.params.tobytes()
    assert np.all(np.abs(a.params) <= 0.5)


@PROPS
@given(st.integers(1, 8), seeds, st.floats(0.1, 3.0))
def test_tdrnn_reduces_to_mlp(h, seed, half):
    mlp = init_weights(MlpNetwork([5, h, 1]), seed, half)
    td = TdrnnNetwork(1, (h,), context_size=1)
    td.core.weights[0][:, :5] = mlp.weights[0]
    td.core.weights[0][:, 5] = 0.0
    td.core.biases[0][:] = mlp.biases[0]
    td.core.weights[1][:] = mlp.weights[1]
    td.core.biases[1][:] = mlp.biases[1]
    rng = np.random.default_rng(seed)
    for _ in range(3):
        x = rng.uniform(0, 1, 5)
        assert forward_tdrnn(td, x[None, :])[0] == forward_mlp(mlp, x)[0]
        assert np.all((td.context_state >= 0) & (td.context_state <= 1))


# trainer

@PROPS
@given(layer_lists, seeds)
def test_backprop_matches_finite_differences(hidden, seed):
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(1, 9))
    net = init_weights(MlpNetwork([n_in, *hidden, int(rng.integers(1, 4))]), seed, 2.0)
    x = rng.uniform(-1, 1, n_in)
    t = rng.uniform(0, 1, net.layer_sizes[-1])
    assert gradient_check(net, x, t, 1e-5) < 1e-5


@PROPS
@given(layer_lists, seeds)
def test_small_eta_never_increases_error(hidden, seed):
    rng = np.random.default_rng(seed)
    net = init_weights(MlpNetwork([5, *hidden, 1]), seed, 2.0)
    x, t = rng.uniform(0, 1, 5), float(rng.uniform(0, 1))
    before = train_example(net, x, t, 1e-4)
    assert example_error(t, forward_mlp(net, x)[0]) <= before


_xs = np.random.default_rng(0).uniform(0.1, 0.9, (24, 5))


@PROPS
@given(seeds, st.integers(1, 4), st.integers(1, 2), st.booleans(), st.booleans())
def test_training_deterministic(seed, epochs, repeats, shuffle, recurrent):
    from finseer.preprocess import SupervisedWindowSet, WindowView

    ws = SupervisedWindowSet(_xs, _xs[:, 0], 1, 0, _xs[:, 0])
    view = WindowView(ws, 0, 24)
    cfg = TrainConfig(eta=0.3, epochs=epochs, repeats=repeats, seed=seed, shuffle=shuffle)
    runs = []
    for _ in range(2):
        net = init_weights(TdrnnNetwork(2, (3,)) if recurrent else MlpNetwork([5, 3, 1]), seed)
        _, rep = train(net, view, cfg)
        runs.append((dumps(net, Normalizer((1,) * 5, (2,) * 5)), rep.mse_curve))
        assert len(rep.mse_curve) == rep.final_epoch == epochs * repeats
        assert all(m >= 0 for m in rep.mse_curve)
    assert runs[0] == runs[1]


# evaluation and model files

pair_lists = st.lists(st.tuples(st.floats(1, 1e4), st.floats(1, 1e4)), min_size=2, max_size=50)


@PROPS
@given(pair_lists)
def test_r_squared_is_determination(pairs):
    x, y = np.array(pairs).T
    assume(np.ptp(x) > 0 and np.ptp(y) > 1e-6 * np.abs(y).max())
    fit = linear_regression(x, y)
    resid = y - (fit.slope * x + fit.intercept)
    r2 = 1 - np.sum(resid**2) / np.sum((y - y.mean()) ** 2)
    assert abs(fit.r**2 - r2) <= 1e-12 * max(1.0, abs(r2)) + 1e-12
    assert abs(fit.r) <= 1


@PROPS
@given(pair_lists, st.floats(1e-3, 1e3))
def test_percent_metrics_scale_invariant(pairs, c):
    a = evaluate(pairs)
    b = evaluate(np.array(pairs) * c)
    assert a.rmse_pct >= 0 and a.mape >= 0 and a.mse >= 0
    assert abs(a.rmse_pct - b.rmse_pct) <= 1e-12 * max(1.0, a.rmse_pct)
    assert abs(a.mape - b.mape) <= 1e-12 * max(1.0, a.mape)


@PROPS
@given(pair_lists, st.floats(0.05, 0.45), st.floats(0.55, 0.95))
def test_price_metrics_range_agnostic(pairs, lo, hi):
    t = np.array(pairs)[:, 0]
    mins, maxs = (float(t.min()) - 1,) * 5, (float(t.max()) + 1,) * 5
    a = evaluate(pairs, Normalizer(mins, maxs))
    b = evaluate(pairs, Normalizer(mins, maxs, lo, hi))
    assert (a.rmse_pct, a.mape, a.fit.r, a.fit.degenerate) == (b.rmse_pct, b.mape, b.fit.r, b.fit.degenerate)
    np.testing.assert_array_equal([a.fit.slope, a.fit.intercept], [b.fit.slope, b.fit.intercept])


@PROPS
@given(layer_lists, seeds, st.floats(0.01, 100), st.booleans(), st.booleans())
def test_model_round_trip(hidden, seed, half, bias, recurrent):
    net = TdrnnNetwork(2, hidden, bias=bias) if recurrent else MlpNetwork([5, *hidden, 1], bias=bias)
    init_weights(net, seed, half)
    norm = Normalizer((1.5, 2.0, 1.0, 1.25, 0.0), (3.0, 3.5, 2.75, 3.125, 1e7))
    back, nb = loads(dumps(net, norm))
    core = lambda n: n.core if recurrent else n
    assert core(back).params.tobytes() == core(net).params.tobytes() and nb == norm
