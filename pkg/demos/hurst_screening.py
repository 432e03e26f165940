# Rescaled-range screening: is a series worth forecasting at all?
#
# H near 0.5 means a random walk's increments, H above 0.5 means trends
# tend to continue.  We only bother training networks on persistent series.

import numpy as np

from finseer.preprocess import expected_rs, rs_hurst
from finseer.synthetic import ar1_cumulative

rng = np.random.default_rng(42)
series = {
    "white noise": rng.standard_normal(4096),
    "AR(1) phi=0.7, summed": ar1_cumulative(1460, phi=0.7, seed=0),
    "AR(1) phi=-0.6": ar1_cumulative(4096, phi=-0.6, seed=1)[1:] - ar1_cumulative(4096, phi=-0.6, seed=1)[:-1],
    "linear ramp": 0.5 * np.arange(1, 1461.0),
}

for name, x in series.items():
    r = rs_hurst(x)
    print(f"{name:<24} H={r.h:.3f}  raw slope={r.raw_slope:.3f}  -> {r.classification}")

# Small windows inflate R/S.  The raw log-log slope of pure noise sits well
# above 0.5, which is why the estimate subtracts the expected R/S of
# independent noise before fitting.
r = rs_hurst(series["white noise"], correction=None)
print("\nuncorrected white noise slope:", round(r.h, 3))
for n in (16, 64, 256, 1024):
    print(f"  E[R/S]({n:>4}) = {expected_rs(n):7.3f}   sqrt(n*pi/2) = {np.sqrt(n * np.pi / 2):7.3f}")

# The points behind the fit, ready for a log-log plot.
print("\n" + rs_hurst(series["AR(1) phi=0.7, summed"]).to_csv())
