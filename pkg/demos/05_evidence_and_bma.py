"""Analytic model evidence: marginal likelihoods, a Savage-Dickey test,
information criteria, and exhaustive g-prior model averaging.
"""

import numpy as np

from shrinkreg import ConjugateModel, PriorSpec, RegressionData, SamplerPlan, run_chains
from shrinkreg.evidence import bma_enumerate_gprior, info_criteria, log_marginal_conjugate, \
    predictive_t, sddr

rng = np.random.default_rng(5)
n = 60
x1 = rng.standard_normal(n)
y = 1.8 * x1 + rng.standard_normal(n)

# marginal likelihood and the predictive density for a single-covariate model
model = ConjugateModel(d=np.array([[4.0]]), v0=2.0, s0=2.0)
x = x1[:, None]
lm = log_marginal_conjugate(model, x, y)
pred = predictive_t(model, x, y, np.array([1.0]))
print(f"log p(y) = {lm:.3f}")
print(f"predictive at x_new=1: t(loc={pred.location:.2f}, scale^2={pred.scale_sq:.2f}, "
      f"dof={pred.dof:.0f}); density at loc = {pred.pdf(pred.location):.3f}")

# Savage-Dickey: evidence for beta = 0 collapses under a real signal
bf_restricted = sddr(model, x, y, 0.0)
print(f"\nSavage-Dickey ratio at beta*=0 (restricted : unrestricted) = {bf_restricted:.2e}")
print("  << 1, i.e. overwhelming evidence against the restriction")

# BIC / DIC from a short conjugate chain
data = RegressionData(x, y)
plan = SamplerPlan(PriorSpec("student_t"), iterations=4000, burn_in=1000, chains=1, seed=6)
store = run_chains(plan, data)
from shrinkreg.evidence import gaussian_loglik

plug = gaussian_loglik(x, y, store.beta.mean(axis=0), float(store.sigma2.mean()))
crit = info_criteria(store, x, y, mode_loglik=plug, p_count=1, n_count=n)
print(f"\nBIC = {crit['bic']:.1f}   DIC = {crit['dic']:.1f}")

# exhaustive g-prior BMA over 2^8 models
p = 8
xm = rng.standard_normal((n, p))
beta = np.zeros(p)
beta[:3] = [2.0, -2.0, 1.5]
ym = xm @ beta + np.sqrt(float(beta @ beta) * 0.25) * rng.standard_normal(n)
res = bma_enumerate_gprior(xm, ym, g_rule="ratio")
print(f"\ng-prior BMA over 2^{p} = {2**p} models")
print("top models:", [(cols, round(pr, 3)) for cols, pr in res.models[:3]])
print("inclusion probabilities:", np.array2string(res.pip, precision=2))
print("median-probability model:", res.median_model)
print("BMA coefficients:", np.array2string(res.coefficients, precision=2, suppress_small=True))
