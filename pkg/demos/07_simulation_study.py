"""A desk-scale run of the two built-in Monte Carlo studies.

Reduced to a handful of replications and short chains so it finishes in a
couple of minutes; the full protocol behind the reference tables is
`shrinkreg simulate --full` (100 replications, 4000 iterations).
"""

from shrinkreg.simulate import SimConfig, format_table, run_study

config = SimConfig(n=100, p=50, r2_pop=0.8, replications=4, seed=1)

print("spike-and-slab specification study (R^2 = 0.8, p = 50, 4 replications)")
rows = run_study("ssvs_lasso_table", config, iterations=2000, burn_in=500)
print(format_table(rows))

print("\nconjugate vs independent scaling (R^2 = 0.8, p = 50, 4 replications)")
rows = run_study("conj_vs_ind_table", config, iterations=2000, burn_in=500)
print(format_table(rows))

print("""
Reading the second table: the conjugate rows underestimate the error
variance (the coefficient prior adds p pseudo-observations to its
conditional), while the independent rows stay near the true value 3.
Selection quality is comparable at this dimension; the gap opens at
p >> n, where the independent chains inflate false positives.""")
