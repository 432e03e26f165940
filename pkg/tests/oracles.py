"""Independent reference computations used to freeze expected values."""

import math


def reference_mean_rs(values, n):
    """Plain-Python mean R/S over non-overlapping chunks (population SD)."""
    ratios = []
    for c in range(len(values) // n):
        chunk = [float(v) for v in values[c * n:(c + 1) * n]]
        m = sum(chunk) / n
        cum, lo, hi = 0.0, math.inf, -math.inf
        for v in chunk:
            cum += v - m
            lo, hi = min(lo, cum), max(hi, cum)
        s = math.sqrt(sum((v - m) ** 2 for v in chunk) / n)
        if s > 0:
            ratios.append((hi - lo) / s)
    return sum(ratios) / len(ratios)


def reference_expected_rs(n):
    # Anis-Lloyd expected R/S, Peters' small-sample factor, direct gamma ratio
    total = sum(math.sqrt((n - i) / i) for i in range(1, n))
    if n <= 340:
        front = math.gamma((n - 1) / 2) / (math.sqrt(math.pi) * math.gamma(n / 2))
    else:
        front = 1 / math.sqrt(n * math.pi / 2)
    return (n - 0.5) / n * front * total


def ols_slope(xs, ys):
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)


def reference_hurst(values, sizes, corrected=True):
    lx = [math.log(n) for n in sizes]
    ly = [math.log(reference_mean_rs(values, n)) for n in sizes]
    if not corrected:
        return ols_slope(lx, ly)
    return 0.5 + ols_slope(lx, [y - math.log(reference_expected_rs(n)) for y, n in zip(ly, sizes)])


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def hand_update_111(w1, b1, w2, b2, x, t, eta):
    """One online step of a 1-1-1 sigmoid network written out by hand."""
    h = sigmoid(w1 * x + b1)
    o = sigmoid(w2 * h + b2)
    d_o = o * (1 - o) * (t - o)
    d_h = h * (1 - h) * w2 * d_o
    err = 0.5 * (t - o) ** 2
    return err, (w1 + eta * d_h * x, b1 + eta * d_h, w2 + eta * d_o * h, b2 + eta * d_o)
