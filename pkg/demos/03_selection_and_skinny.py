"""Spike-and-slab selection and the skinny-Gibbs approximation.

Runs the full SSVS sampler and skinny Gibbs on an orthogonal design with
six true signals, compares posterior inclusion probabilities, and shows
the median-probability model recovering the support.
"""

import numpy as np

from shrinkreg import PriorSpec, RegressionData, SamplerPlan, run_chains

rng = np.random.default_rng(42)
n, p = 100, 20
q, _ = np.linalg.qr(rng.standard_normal((n, p)))
x = q * np.sqrt(n)  # orthogonal columns, each with squared norm n
beta = np.zeros(p)
beta[:6] = np.sqrt(0.48) * np.array([1.5, -1.5, 2.0, -2.0, 2.5, -2.5])
y = x @ beta + np.sqrt(3.0) * rng.standard_normal(n)
data = RegressionData(x, y - y.mean())

spec = PriorSpec("ssvs_fixed", "independent",
                 {"tau0_sq": 0.001, "tau1_sq": 4.0, "theta": None, "c": 1.0, "d": 1.0})

full = run_chains(SamplerPlan(spec, iterations=12_000, burn_in=2000, chains=1, seed=9), data)
skinny = run_chains(SamplerPlan(spec, block_mode="skinny", iterations=12_000,
                                burn_in=2000, chains=1, seed=10), data)

pip_f, pip_s = full.pip(), skinny.pip()
print(f"{'coord':>5s} {'true':>6s} {'full pip':>9s} {'skinny pip':>11s}")
for j in range(p):
    mark = " <- signal" if beta[j] != 0 else ""
    print(f"{j:5d} {beta[j]:6.2f} {pip_f[j]:9.3f} {pip_s[j]:11.3f}{mark}")

print(f"\nmax |pip difference| = {np.abs(pip_f - pip_s).max():.3f}")
print("median-probability model (full):  ", np.flatnonzero(pip_f > 0.5))
print("median-probability model (skinny):", np.flatnonzero(pip_s > 0.5))
print("\nThe diagonal inactive block plus the compensation term in the"
      "\ninclusion odds reproduce the full sampler's selection to a few"
      "\nhundredths at a fraction of the per-iteration cost when p is large.")
