# Train a feed-forward MLP and a time-delay recurrent network on the same
# persistent price series and compare their test errors.
#
# Setup: 1460 trading days, predict tomorrow's open from today's five
# features, the first 80% of pairs train, the rest test.

import numpy as np

from finseer import MlpNetwork, TdrnnNetwork, init_weights
from finseer.evaluation import compare, evaluate, predict_series
from finseer.preprocess import build_windows, fit_normalizer, rs_hurst, split
from finseer.synthetic import synthetic_ohlcv
from finseer.trainer import TrainConfig, train

data = synthetic_ohlcv(1460, phi=0.7, seed=0)
print("H of open:", round(rs_hurst(data.column("open")).h, 3))

norm = fit_normalizer(data)
train_view, test_view = split(build_windows(data, norm, lead=1))
print(f"{len(train_view)} training pairs, {len(test_view)} test pairs")

# A shorter schedule than the default 2 x 1000 epochs keeps this quick.
config = TrainConfig(eta=0.25, epochs=300, repeats=2, seed=3)
reports = {}
for arch, net in [("mlp", MlpNetwork([5, 10, 1])), ("tdrnn", TdrnnNetwork(delay_depth=5, hidden=(10,)))]:
    init_weights(net, seed=3)
    _, curve = train(net, train_view, config)
    reports[arch] = {
        "train": evaluate(predict_series(net, train_view, norm), norm),
        "test": evaluate(predict_series(net, test_view, norm), norm),
    }
    fit = reports[arch]["test"].fit
    print(f"{arch}: final train MSE {curve.final_mse:.2e}, test fit {fit.summary()}")

table = compare(reports["mlp"], reports["tdrnn"])
print()
print(table.to_text())

# First few test days side by side, in price units.
pairs = predict_series(net, test_view, norm)
print("\n  target     tdrnn")
for t, p in zip(pairs.target[:5], pairs.predicted[:5]):
    print(f"{t:9.2f} {p:9.2f}")
print("max abs error:", np.round(np.max(np.abs(pairs.target - pairs.predicted)), 2))
