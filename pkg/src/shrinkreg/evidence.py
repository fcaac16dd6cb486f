"""Analytic model evidence and comparison tools for the conjugate model.

Everything here works with the proper normal-inverse-gamma prior
beta | sigma^2 ~ N(0, sigma^2 D), sigma^2 ~ InvGamma(v0/2, s0/2), where
``s0`` is the prior sum of squares (the quantity usually written s_0^2).
The marginal likelihood exists only for proper priors; improper requests
raise instead of returning garbage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import t as student_t

from .kernels import cholesky_lower

__all__ = ["ConjugateModel", "EvidenceResult", "PredictiveT", "log_marginal_conjugate",
           "predictive_t", "info_criteria", "sddr", "bma_enumerate_gprior", "BmaResult"]


class ImproperPriorError(ValueError):
    pass


@dataclass
class ConjugateModel:
    """Natural-conjugate regression prior, optionally on a column subset."""

    d: np.ndarray          # p x p prior covariance scale (scalar/vector ok)
    v0: float              # sigma^2 ~ InvGamma(v0/2, s0/2)
    s0: float              # prior sum of squares (s_0^2)
    columns: tuple | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim == 0:
            d = d.reshape(1, 1)
        elif d.ndim == 1:
            d = np.diag(d)
        self.d = d
        if self.columns is not None:
            self.columns = tuple(int(c) for c in self.columns)

    def design(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.columns is None:
            return x
        return x[:, list(self.columns)] if len(self.columns) else x[:, :0]

    @property
    def p(self) -> int:
        if self.columns is not None:
            return len(self.columns)
        return self.d.shape[0]

    def check_proper(self):
        if not (self.v0 > 0 and self.s0 > 0):
            raise ImproperPriorError(
                "marginal likelihood does not exist: the prior must be proper "
                "(v0 > 0 and s0 > 0)")


def _posterior_pieces(model: ConjugateModel, x, y):
    """mu*, V (cholesky pieces), posterior (v_n, s_n) of the NIG update."""
    x = model.design(x)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if p == 0:
        vn = model.v0 + n
        sn = model.s0 + float(y @ y)
        return np.zeros(0), np.zeros((0, 0)), vn, sn, 0.0, 0.0
    d = model.d
    if d.shape != (p, p):
        raise ValueError(f"prior covariance must be {p}x{p}")
    d_inv = np.linalg.inv(d)
    q = x.T @ x + d_inv
    ell = cholesky_lower(q, "posterior precision")
    logdet_v = -2.0 * float(np.sum(np.log(np.diag(ell))))
    ell_d = cholesky_lower(d, "prior covariance")
    logdet_d = 2.0 * float(np.sum(np.log(np.diag(ell_d))))
    xty = x.T @ y
    w = np.linalg.solve(ell, xty)
    mu = np.linalg.solve(ell.T, w)
    vn = model.v0 + n
    sn = model.s0 + float(y @ y) - float(w @ w)  # w'w = mu' Q mu
    v = np.linalg.inv(q)
    return mu, v, vn, sn, logdet_v, logdet_d


def log_marginal_conjugate(model: ConjugateModel, x, y) -> float:
    """log p(y) for the conjugate model, from log-determinant Cholesky
    pieces: pi^{-n/2} Gamma(vn/2)/Gamma(v0/2) s0^{v0/2}/sn^{vn/2}
    (|V|/|D|)^{1/2}."""
    model.check_proper()
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    _, _, vn, sn, logdet_v, logdet_d = _posterior_pieces(model, x, y)
    return float(
        -0.5 * n * np.log(np.pi)
        + gammaln(vn / 2.0) - gammaln(model.v0 / 2.0)
        + 0.5 * model.v0 * np.log(model.s0) - 0.5 * vn * np.log(sn)
        + 0.5 * (logdet_v - logdet_d)
    )


@dataclass
class PredictiveT:
    """One-point posterior predictive: a Student-t with the stated location,
    squared scale (the scale-matrix entry convention) and degrees of
    freedom; iterates as (location, scale_sq, dof)."""

    location: float
    scale_sq: float
    dof: float

    def __iter__(self):
        return iter((self.location, self.scale_sq, self.dof))

    def pdf(self, x):
        return student_t.pdf(x, df=self.dof, loc=self.location, scale=np.sqrt(self.scale_sq))

    def logpdf(self, x):
        return student_t.logpdf(x, df=self.dof, loc=self.location, scale=np.sqrt(self.scale_sq))

    @property
    def variance(self):
        if self.dof <= 2:
            return np.inf
        return self.scale_sq * self.dof / (self.dof - 2.0)


def predictive_t(model: ConjugateModel, x, y, x_new) -> PredictiveT:
    """Predictive density of y_{n+1} at covariates x_new."""
    model.check_proper()
    mu, v, vn, sn, _, _ = _posterior_pieces(model, x, y)
    x_new = np.atleast_1d(np.asarray(x_new, dtype=float))
    if model.columns is not None and x_new.shape[0] != model.p:
        x_new = x_new[list(model.columns)]
    loc = float(x_new @ mu) if model.p else 0.0
    quad = float(x_new @ v @ x_new) if model.p else 0.0
    return PredictiveT(location=loc, scale_sq=(sn / vn) * (1.0 + quad), dof=vn)


def gaussian_loglik(x, y, beta, sigma2) -> float:
    resid = y - x @ beta
    n = y.shape[0]
    return float(-0.5 * n * np.log(2 * np.pi * sigma2) - 0.5 * (resid @ resid) / sigma2)


def info_criteria(draws, x, y, mode_loglik: float, p_count: int, n_count: int,
                  plugin: str = "mean") -> dict:
    """BIC from the plug-in log likelihood; DIC from the draws.

    DIC = -4 E[log p(y|beta, sigma^2)] + 2 log p(y | plug-in), with the
    expectation estimated by the draw average. The plug-in is the posterior
    mean by default; ``plugin='mode'`` uses the highest-likelihood draw as
    a mode approximation.
    """
    bic = -2.0 * mode_loglik + p_count * np.log(n_count)
    if draws.n_draws == 0:
        raise ValueError("DIC needs at least one draw")
    lls = np.array([gaussian_loglik(x, y, draws.beta[i], draws.sigma2[i])
                    for i in range(draws.n_draws)])
    if plugin == "mean":
        plug = gaussian_loglik(x, y, draws.beta.mean(axis=0), float(draws.sigma2.mean()))
    elif plugin == "mode":
        best = int(np.argmax(lls))
        plug = float(lls[best])
    else:
        raise ValueError("plugin must be 'mean' or 'mode'")
    dic = -4.0 * float(lls.mean()) + 2.0 * plug
    return {"bic": float(bic), "dic": float(dic)}


def sddr(full: ConjugateModel, x, y, beta_star: float = 0.0, log: bool = False):
    """Savage-Dickey density ratio for the point restriction beta = beta*
    in a single-covariate conjugate model.

    Returns marginal posterior over marginal prior of beta at beta*: the
    Bayes factor in favour of the restricted model over the unrestricted
    one (its reciprocal favours the unrestricted model). Computed in log
    space; ``log=True`` returns the log ratio, which never underflows.
    """
    full.check_proper()
    if full.p != 1:
        raise ValueError("the density-ratio shortcut is implemented for p = 1")
    mu, v, vn, sn, _, _ = _posterior_pieces(full, x, y)
    post = student_t.logpdf(beta_star, df=vn, loc=float(mu[0]),
                            scale=np.sqrt(sn / vn * v[0, 0]))
    prior = student_t.logpdf(beta_star, df=full.v0, loc=0.0,
                             scale=np.sqrt(full.s0 / full.v0 * full.d[0, 0]))
    val = post - prior
    return float(val) if log else float(np.exp(val))


@dataclass
class BmaResult:
    models: list            # (columns tuple, posterior probability), sorted
    pip: np.ndarray
    median_model: tuple
    coefficients: np.ndarray  # BMA-averaged, zero-padded, demeaned-x scale
    log_marginals: dict = field(repr=False, default_factory=dict)

    def probability(self, columns) -> float:
        cols = tuple(sorted(columns))
        for c, pr in self.models:
            if c == cols:
                return pr
        return 0.0


def gprior_shrunk_coefficients(x_sub: np.ndarray, y: np.ndarray, g: float) -> np.ndarray:
    """Posterior mean under the g-prior: OLS / (1 + g), exactly."""
    ols, *_ = np.linalg.lstsq(x_sub, y, rcond=None)
    return ols / (1.0 + g)


def bma_enumerate_gprior(x, y, g_rule: str = "ratio", g: float | None = None,
                         model_prior_pi0: float = 0.5, max_p: int = 25) -> BmaResult:
    """Enumerate all 2^p submodels under the g-prior and weight them by
    their analytic marginal likelihoods.

    Covariates are demeaned (the intercept is common to every model and
    integrates out against a flat prior); ``g_rule='ratio'`` uses the
    per-model default g_r = p_r / n, ``g_rule='fixed'`` a caller-supplied
    g. Probabilities are normalized with log-sum-exp.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if p > max_p:
        raise ValueError(
            f"2^{p} submodels is beyond exhaustive enumeration (limit {max_p}); "
            "use one of the MCMC selection families instead")
    if g_rule not in ("ratio", "fixed"):
        raise ValueError("g_rule must be 'ratio' or 'fixed'")
    if g_rule == "fixed" and (g is None or g <= 0):
        raise ValueError("fixed g_rule needs a positive g")
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    yty = float(yc @ yc)

    subsets = []
    logml = np.empty(2 ** p)
    logprior = np.empty(2 ** p)
    for i, mask in enumerate(itertools.product((0, 1), repeat=p)):
        cols = tuple(j for j, m in enumerate(mask) if m)
        subsets.append(cols)
        pr = len(cols)
        logprior[i] = pr * np.log(model_prior_pi0) + (p - pr) * np.log1p(-model_prior_pi0)
        if pr == 0:
            logml[i] = -0.5 * (n - 1) * np.log(yty)
            continue
        gr = (pr / n) if g_rule == "ratio" else g
        xs = xc[:, list(cols)]
        ols, *_ = np.linalg.lstsq(xs, yc, rcond=None)
        fit = float(ols @ (xs.T @ xs) @ ols)
        sn = yty - fit / (1.0 + gr)
        logml[i] = 0.5 * pr * np.log(gr / (1.0 + gr)) - 0.5 * (n - 1) * np.log(sn)

    logpost = logml + logprior
    logpost -= logsumexp(logpost)
    probs = np.exp(logpost)

    pip = np.zeros(p)
    coef = np.zeros(p)
    for cols, pr_model in zip(subsets, probs):
        if not cols:
            continue
        gr = (len(cols) / n) if g_rule == "ratio" else g
        shrunk = gprior_shrunk_coefficients(xc[:, list(cols)], yc, gr)
        for k, j in enumerate(cols):
            pip[j] += pr_model
            coef[j] += pr_model * shrunk[k]
    median_model = tuple(j for j in range(p) if pip[j] > 0.5)
    order = np.argsort(-probs)
    ranked = [(subsets[i], float(probs[i])) for i in order]
    return BmaResult(models=ranked, pip=pip, median_model=median_model,
                     coefficients=coef,
                     log_marginals={subsets[i]: float(logml[i]) for i in range(len(subsets))})


@dataclass
class EvidenceResult:
    log_marginal: float
    posterior_model_prob: float | None = None
    criteria: dict = field(default_factory=dict)
