# Is backprop computing the right gradient?  Compare it against central
# finite differences on random networks.

import numpy as np

from finseer import MlpNetwork, TdrnnNetwork, init_weights
from finseer.trainer import backprop_gradient, gradient_check, train_example

rng = np.random.default_rng(0)

worst = 0.0
for k in range(20):
    sizes = [int(s) for s in rng.integers(1, 9, size=rng.integers(3, 5))]
    net = init_weights(MlpNetwork(sizes), seed=k, half_range=2.0)
    d = gradient_check(net, rng.uniform(-1, 1, sizes[0]), rng.uniform(0, 1, sizes[-1]))
    worst = max(worst, d)
    print(f"{str(sizes):<16} max relative discrepancy {d:.2e}")
print("worst:", f"{worst:.2e}")

# The recurrent network treats its context as a frozen input for one step,
# so the same check applies to its core.
td = init_weights(TdrnnNetwork(delay_depth=3, hidden=(6,)), seed=1, half_range=2.0)
print("tdrnn:", f"{gradient_check(td, rng.uniform(0, 1, (3, 5)), 0.3):.2e}")

# A training step moves each weight by -eta * dErr/dw, so a tiny step
# lowers the error by about eta * |grad|^2.
net = init_weights(MlpNetwork([5, 4, 1]), seed=2, half_range=2.0)
x, t = rng.uniform(0, 1, 5), 0.8
err, grad = backprop_gradient(net, x, t)
eta = 1e-3
train_example(net, x, t, eta)
after, _ = backprop_gradient(net, x, t)
print(f"\nerror {err:.6f} -> {after:.6f}, predicted drop {eta * grad @ grad:.3e}, actual {err - after:.3e}")
