"""CAVI for spike-and-slab regression: ELBO path and a Gibbs cross-check.

The mean-field solver converges in a handful of sweeps with a
nondecreasing evidence lower bound; its inclusion probabilities and
coefficient means line up with the matching indicator-in-likelihood Gibbs
sampler while running orders of magnitude faster.
"""

import time

import numpy as np

from shrinkreg import PriorSpec, RegressionData, SamplerPlan, VBHyper, run_cavi, run_chains

rng = np.random.default_rng(3)
n, p = 100, 40
x = rng.standard_normal((n, p))
beta = np.zeros(p)
beta[:5] = [1.5, -1.2, 1.0, -0.8, 0.9]
y = x @ beta + rng.standard_normal(n)
data = RegressionData(x, y)

hyper = VBHyper(d_diag=np.full(p, 4.0), pi0=0.5, a0=0.1, b0=0.1)
t0 = time.perf_counter()
vb = run_cavi(data, hyper)
t_vb = time.perf_counter() - t0
print(f"CAVI converged: {vb.converged} after {len(vb.elbo_trace)} sweeps ({t_vb*1e3:.0f} ms)")
print("ELBO trace:", " -> ".join(f"{v:.2f}" for v in vb.elbo_trace[:6]),
      "..." if len(vb.elbo_trace) > 6 else "")
assert all(b - a >= -1e-8 for a, b in zip(vb.elbo_trace, vb.elbo_trace[1:]))

t0 = time.perf_counter()
plan = SamplerPlan(PriorSpec("kuo_mallick", hyper={"tau_sq": 4.0, "pj": 0.5}),
                   iterations=8000, burn_in=2000, chains=1, seed=4,
                   sigma2_a0=0.1, sigma2_b0=0.1)
store = run_chains(plan, data)
t_mc = time.perf_counter() - t0

print(f"\nGibbs cross-check ({t_mc:.1f} s):")
print(f"{'coord':>5s} {'true':>6s} {'vb mean':>8s} {'mc mean':>8s} {'vb pi':>7s} {'mc pip':>7s}")
for j in range(8):
    print(f"{j:5d} {beta[j]:6.2f} {vb.mu[j]:8.2f} {store.beta[:, j].mean():8.2f} "
          f"{vb.pi[j]:7.2f} {store.pip()[j]:7.2f}")
print(f"\nE[1/sigma^2]: vb {vb.kappa:.3f} vs mc {np.mean(1/store.sigma2):.3f}; "
      f"speedup ~{t_mc/t_vb:.0f}x")
print("\nThe variational marginal variances sit slightly below the Gibbs"
      "\nones - the usual mean-field price for the speed.")
