"""Bayesian quantile regression on heteroskedastic data.

Each level runs its own asymmetric-Laplace chain; the slope fan spreads
with the level exactly as the generating process dictates, and the
crossing rate of adjacent fitted quantiles is reported rather than
corrected.
"""

import numpy as np

from shrinkreg import QuantileSpec, RegressionData, run_quantile_grid
from shrinkreg.quantile import al_constants

rng = np.random.default_rng(7)
n = 400
xv = rng.uniform(0, 2, n)
# conditional quantile slopes grow with the level: slope(r) = 1 + 0.6 z_r
y = 1.0 + xv + 0.6 * xv * rng.standard_normal(n) + 0.4 * rng.standard_normal(n)
x = np.column_stack([np.ones(n), xv])
data = RegressionData(x, y)

spec = QuantileSpec(levels=(0.05, 0.25, 0.5, 0.75, 0.95), prior_tau=100.0)
print("mixture constants per level:")
for r in spec.levels:
    th, k2 = al_constants(r)
    print(f"  r={r:<5g} theta={th:+7.3f} kappa^2={k2:7.3f}")

result = run_quantile_grid(data, spec, iterations=4000, burn_in=1000, seed=8)

from scipy.stats import norm

print(f"\n{'level':>6s} {'intercept':>10s} {'slope':>7s} {'true slope':>11s}")
for r in spec.levels:
    draws = result.draws[r]
    icept, slope = draws.beta.mean(axis=0)
    true_slope = 1.0 + 0.6 * norm.ppf(r)
    print(f"{r:6g} {icept:10.2f} {slope:7.2f} {true_slope:11.2f}")

print(f"\nquantile crossing rate (reported, never corrected): {result.crossing_rate:.3f}")
print("\nSlopes grow with the level because the noise scale rises with x;"
      "\nthe estimates track the true conditional-quantile slopes.")
