"""Fit every hierarchical prior family on one sparse-regression dataset.

Generates n=80 observations with three real signals among twelve
covariates, runs a short chain per family, and prints the posterior means
side by side: the shrinkage families agree on the signals and differ in
how hard they pull the noise coordinates toward zero, while the selection
families additionally report posterior inclusion probabilities.
"""

import numpy as np

from shrinkreg import PriorSpec, RegressionData, SamplerPlan, run_chains

rng = np.random.default_rng(1)
n, p = 80, 12
x = rng.standard_normal((n, p))
beta_true = np.zeros(p)
beta_true[:3] = [2.0, -1.5, 1.0]
y = x @ beta_true + rng.standard_normal(n)
data = RegressionData(x, y)

families = [
    PriorSpec("student_t"),
    PriorSpec("lasso_pc"),
    PriorSpec("fused_lasso"),
    PriorSpec("group_lasso", groups=np.repeat([0, 1, 2, 3], 3)),
    PriorSpec("elastic_net_kyung"),
    PriorSpec("gdp"),
    PriorSpec("normal_gamma"),
    PriorSpec("dirichlet_laplace"),
    PriorSpec("horseshoe_ms"),
    PriorSpec("horseshoe_slice"),
    PriorSpec("tpb"),
    PriorSpec("ssvs_fixed"),
    PriorSpec("ssvs_nh"),
    PriorSpec("ssvs_lasso1"),
    PriorSpec("ssvs_lasso2"),
    PriorSpec("ssvs_lasso3"),
    PriorSpec("kuo_mallick"),
]

print(f"true beta: {np.array2string(beta_true, precision=1)}\n")
header = f"{'family':<20s} {'scaling':<12s} {'sigma2':>6s}  posterior means (first 6) / noise max |mean|"
print(header)
print("-" * len(header))
for spec in families:
    plan = SamplerPlan(spec, iterations=3000, burn_in=1000, chains=1, seed=7)
    store = run_chains(plan, data)
    mean = store.beta.mean(axis=0)
    noise_mag = np.abs(mean[3:]).max()
    lead = np.array2string(mean[:6], precision=2, suppress_small=True)
    extra = ""
    pip = store.pip()
    if pip is not None:
        extra = f"   pip(signals) = {np.array2string(pip[:3], precision=2)}"
    print(f"{spec.family:<20s} {spec.scaling:<12s} {store.sigma2.mean():6.2f}  "
          f"{lead}  noise<{noise_mag:.2f}{extra}")

print("\nEvery family keeps the three signals; the spike-and-slab rows show"
      "\nposterior inclusion probabilities of the true signals near one.")
