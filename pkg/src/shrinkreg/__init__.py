"""Bayesian shrinkage and variable selection for linear regression.

A catalog of hierarchical priors (Student-t, lasso and its fused/group/
elastic-net relatives, generalized double Pareto, normal-gamma,
Dirichlet-Laplace, horseshoe, three-parameter-beta, and a family of
spike-and-slab selectors) driven by composable Gibbs samplers, fast
high-dimensional normal-posterior kernels, a CAVI variational solver,
analytic model-evidence tools, asymmetric-Laplace quantile regression,
and a Monte Carlo harness for the two built-in simulation studies.
"""

from .engine import (DrawStore, GewekeReport, RegressionData, SamplerPlan,
                     geweke_joint_test, run_chain, run_chains)
from .evidence import (ConjugateModel, bma_enumerate_gprior, info_criteria,
                       log_marginal_conjugate, predictive_t, sddr)
from .kernels import (GigParams, InvGaussParams, PrecisionSystem, sample_gig,
                      sample_inverse_gaussian, sample_mvn_bhattacharya,
                      sample_mvn_direct, sample_mvn_rue, slice_halfcauchy)
from .priors import FAMILIES, PriorSpec, ScaleState
from .quantile import QuantileSpec, al_constants, run_quantile_grid
from .rng import RngStream, make_generator
from .simulate import SimConfig, classify_signals, compute_metrics, generate_dgp, run_study
from .vb import VBHyper, VBState, cavi_sweep, compute_elbo, run_cavi

__version__ = "0.1.0"

__all__ = [
    "DrawStore", "GewekeReport", "RegressionData", "SamplerPlan",
    "geweke_joint_test", "run_chain", "run_chains",
    "ConjugateModel", "bma_enumerate_gprior", "info_criteria",
    "log_marginal_conjugate", "predictive_t", "sddr",
    "GigParams", "InvGaussParams", "PrecisionSystem", "sample_gig",
    "sample_inverse_gaussian", "sample_mvn_bhattacharya", "sample_mvn_direct",
    "sample_mvn_rue", "slice_halfcauchy",
    "FAMILIES", "PriorSpec", "ScaleState",
    "QuantileSpec", "al_constants", "run_quantile_grid",
    "RngStream", "make_generator",
    "SimConfig", "classify_signals", "compute_metrics", "generate_dgp", "run_study",
    "VBHyper", "VBState", "cavi_sweep", "compute_elbo", "run_cavi",
    "__version__",
]
