"""The three normal-posterior kernels and where each one wins.

All three sample the same law N(Q^{-1} X'y, Q^{-1}) with
Q = X'X + D^{-1}. The direct and factor-and-solve samplers factor the
p x p precision; the data-augmentation sampler only ever solves an n x n
system, so its cost grows linearly in p and it dominates once p >> n.
"""

import time

import numpy as np

from shrinkreg import PrecisionSystem, make_generator
from shrinkreg.kernels import sample_mvn_bhattacharya, sample_mvn_direct, sample_mvn_rue

rng = make_generator(0)

# 1. agreement: all three match the dense-inversion moments
n, p = 30, 8
x = rng.standard_normal((n, p))
d = rng.uniform(0.5, 2.0, p)
y = rng.standard_normal(n)
sys = PrecisionSystem(x.T @ x, 1.0 / d, x.T @ y)
v = np.linalg.inv(sys.precision())
mean = v @ sys.rhs

for name, draws in [
    ("direct", sample_mvn_direct(sys, make_generator(1), size=50_000)),
    ("rue", sample_mvn_rue(sys, make_generator(2), size=50_000)),
    ("bhattacharya", sample_mvn_bhattacharya(x, d, y, make_generator(3), size=50_000)),
]:
    err = np.abs(draws.mean(axis=0) - mean).max()
    print(f"{name:<14s} worst |empirical mean - exact mean| = {err:.4f}")

# 2. timing: wide designs flip the ranking
print(f"\n{'shape':<16s} {'direct':>10s} {'bhattacharya':>14s}")
for n, p in [(400, 40), (40, 400), (40, 1600)]:
    x = rng.standard_normal((n, p))
    d = np.ones(p)
    y = rng.standard_normal(n)
    sys = PrecisionSystem(x.T @ x, 1.0 / d, x.T @ y)
    g = make_generator(4)

    def best(f, reps=5):
        out = []
        for _ in range(reps):
            t0 = time.perf_counter()
            f()
            out.append(time.perf_counter() - t0)
        return min(out)

    t_direct = best(lambda: sample_mvn_direct(sys, g, size=10))
    t_bhat = best(lambda: sample_mvn_bhattacharya(x, d, y, g, size=10))
    print(f"n={n:<4d} p={p:<6d} {t_direct*1e3:9.2f}ms {t_bhat*1e3:13.2f}ms")

print("\nTall designs favour the p x p factorization; once p/n is large the"
      "\nn x n route is an order of magnitude faster, and the gap widens"
      "\nlinearly in p.")
