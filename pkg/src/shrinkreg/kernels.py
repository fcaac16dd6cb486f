"""Random-variate kernels shared by every prior update.

Three exchangeable samplers for the normal posterior
N(Q^{-1} rhs, Q^{-1}) with Q = gram + diag(prior precision):

* ``sample_mvn_direct``  -- Cholesky of Q, solve for the mean, perturb.
* ``sample_mvn_rue``     -- the same factor used through explicit
  triangular solves (v = L^{-1} rhs, mu = L'^{-1} v, u = L'^{-1} z).
* ``sample_mvn_bhattacharya`` -- data-augmentation identity that costs one
  n-by-n solve plus O(n^2 p); the only sensible choice once p >> n.

Plus the scalar variate generators used inside the hierarchical prior
conditionals: generalized inverse Gaussian (ratio-of-uniforms rejection),
inverse Gaussian (Michael-Schucany-Haas transform), and a slice-sampling
transition for half-Cauchy-type targets.

Convention used everywhere for the GIG: density proportional to
x^(nu-1) exp(-(a x + b / x) / 2) on x > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf
from scipy.special import gammainc, gammaincinv

from .rng import as_generator

__all__ = [
    "PrecisionSystem",
    "GigParams",
    "InvGaussParams",
    "PositiveDefiniteError",
    "SingularInnerSystemError",
    "cholesky_lower",
    "sample_mvn_direct",
    "sample_mvn_rue",
    "sample_mvn_bhattacharya",
    "sample_gig",
    "gig_vector",
    "sample_inverse_gaussian",
    "invgauss_vector",
    "slice_halfcauchy",
]

# Floor applied to |beta| inside inverse-Gaussian mean parameters; the
# conditionals are singular at beta = 0.
BETA_FLOOR = 1e-10
# Floor applied to local variances before inversion into D^{-1}.
TAU2_FLOOR = 1e-12


class PositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky failed; ``pivot`` is the 1-based pivot that went negative."""

    def __init__(self, pivot: int, context: str = ""):
        self.pivot = int(pivot)
        msg = f"matrix not positive definite (pivot {self.pivot})"
        if context:
            msg += f": {context}"
        super().__init__(msg)


class SingularInnerSystemError(np.linalg.LinAlgError):
    """The n-by-n system (X D X' + I) of the Bhattacharya sampler failed."""

    def __init__(self):
        super().__init__("inner system singular")


@dataclass
class PrecisionSystem:
    """Gaussian posterior in precision form.

    gram                 : p x p, X'X (or X'X / sigma^2)
    prior_precision_diag : length p, strictly positive diagonal of D^{-1}
    rhs                  : length p, X'y (scaled consistently with gram)

    The target is N(Q^{-1} rhs, Q^{-1}) with Q = gram + diag(prior
    precision).
    """

    gram: np.ndarray
    prior_precision_diag: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=float)
        self.prior_precision_diag = np.asarray(self.prior_precision_diag, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        p = self.rhs.shape[0]
        if self.gram.shape != (p, p):
            raise ValueError(f"gram must be {p}x{p}, got {self.gram.shape}")
        if self.prior_precision_diag.shape != (p,):
            raise ValueError("prior_precision_diag length mismatch")
        if np.any(self.prior_precision_diag <= 0):
            raise ValueError("prior_precision_diag must be strictly positive")

    @property
    def p(self) -> int:
        return self.rhs.shape[0]

    def precision(self) -> np.ndarray:
        q = self.gram.copy()
        q[np.diag_indices_from(q)] += self.prior_precision_diag
        return q


@dataclass(frozen=True)
class GigParams:
    """GIG(nu, a, b): density x^(nu-1) exp(-(a x + b/x)/2) on x > 0."""

    order: float
    rate_a: float
    rate_b: float

    def __post_init__(self):
        nu, a, b = self.order, self.rate_a, self.rate_b
        if a < 0 or b < 0:
            raise ValueError("GIG rates must be nonnegative")
        if a == 0 and b == 0:
            raise ValueError("GIG requires at least one positive rate")
        if a == 0 and nu >= 0:
            raise ValueError("GIG with rate_a=0 needs order < 0")
        if b == 0 and nu <= 0:
            raise ValueError("GIG with rate_b=0 needs order > 0")


@dataclass(frozen=True)
class InvGaussParams:
    """Inverse Gaussian with mean mu and shape lam."""

    mean: float
    shape: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and self.mean > 0):
            raise ValueError("inverse-Gaussian mean must be finite and positive")
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ValueError("inverse-Gaussian shape must be finite and positive")


def cholesky_lower(q: np.ndarray, context: str = "") -> np.ndarray:
    """Lower Cholesky factor of q; one shot of jitter, then a hard error.

    On the first failure 1e-10 * trace/p is added to the diagonal; a second
    failure raises PositiveDefiniteError carrying the offending pivot.
    """
    c, info = dpotrf(q, lower=1, overwrite_a=0)
    if info == 0:
        return np.tril(c)
    jitter = 1e-10 * np.trace(q) / q.shape[0]
    qj = q.copy()
    qj[np.diag_indices_from(qj)] += jitter
    c, info = dpotrf(qj, lower=1, overwrite_a=1)
    if info == 0:
        return np.tril(c)
    raise PositiveDefiniteError(info, context)


def _mvn_from_factor(chol_lower, mu, rng, size):
    p = mu.shape[0]
    if size is None:
        z = rng.standard_normal(p)
        return mu + solve_triangular(chol_lower, z, lower=True, trans="T", check_finite=False)
    z = rng.standard_normal((p, size))
    u = solve_triangular(chol_lower, z, lower=True, trans="T", check_finite=False)
    return (mu[:, None] + u).T


def sample_mvn_direct(sys: PrecisionSystem, rng, size=None):
    """Draw from N(Q^{-1} rhs, Q^{-1}) via one Cholesky of Q.

    Q^{-1} itself is never formed. With ``size`` set, returns a (size, p)
    array drawn with a single factorization.
    """
    rng = as_generator(rng)
    q = sys.precision()
    ell = cholesky_lower(q, "precision system")
    w = solve_triangular(ell, sys.rhs, lower=True, check_finite=False)
    mu = solve_triangular(ell, w, lower=True, trans="T", check_finite=False)
    return _mvn_from_factor(ell, mu, rng, size)


def sample_mvn_rue(sys: PrecisionSystem, rng, size=None):
    """Rue's factor-and-solve recipe; same law as ``sample_mvn_direct``.

    L = chol(Q); v = L^{-1} rhs; mu = L'^{-1} v; u = L'^{-1} z;
    return mu + u.
    """
    rng = as_generator(rng)
    q = sys.precision()
    ell = cholesky_lower(q, "precision system")
    v = solve_triangular(ell, sys.rhs, lower=True, check_finite=False)
    mu = solve_triangular(ell, v, lower=True, trans="T", check_finite=False)
    if size is None:
        z = rng.standard_normal(sys.p)
        u = solve_triangular(ell, z, lower=True, trans="T", check_finite=False)
        return mu + u
    z = rng.standard_normal((sys.p, size))
    u = solve_triangular(ell, z, lower=True, trans="T", check_finite=False)
    return (mu[:, None] + u).T


def sample_mvn_bhattacharya(x: np.ndarray, d_diag: np.ndarray, y_scaled: np.ndarray, rng, size=None):
    """Draw from N(V X'y, V), V = (X'X + D^{-1})^{-1}, via an n-by-n solve.

    Inputs must be pre-scaled so that the target has this exact form
    (any sigma^2 is absorbed by the caller). Cost O(n^2 p + n^3): linear
    in p at fixed n, which is what makes it the p >> n kernel.
    """
    rng = as_generator(rng)
    x = np.asarray(x, dtype=float)
    d_diag = np.asarray(d_diag, dtype=float)
    y = np.asarray(y_scaled, dtype=float)
    n, p = x.shape
    xd = x * d_diag  # X D, n x p
    m = xd @ x.T
    m[np.diag_indices_from(m)] += 1.0
    if not np.all(np.isfinite(m)):
        raise SingularInnerSystemError()
    try:
        ell = cholesky_lower(m, "inner system")
    except PositiveDefiniteError as exc:
        raise SingularInnerSystemError() from exc

    def _one():
        eta = np.sqrt(d_diag) * rng.standard_normal(p)
        delta = rng.standard_normal(n)
        v = x @ eta + delta
        w = solve_triangular(ell, y - v, lower=True, check_finite=False)
        w = solve_triangular(ell, w, lower=True, trans="T", check_finite=False)
        return eta + xd.T @ w

    if size is None:
        return _one()
    eta = np.sqrt(d_diag)[:, None] * rng.standard_normal((p, size))
    delta = rng.standard_normal((n, size))
    v = x @ eta + delta
    w = solve_triangular(ell, y[:, None] - v, lower=True, check_finite=False)
    w = solve_triangular(ell, w, lower=True, trans="T", check_finite=False)
    return (eta + xd.T @ w).T


# ---------------------------------------------------------------------------
# Generalized inverse Gaussian
# ---------------------------------------------------------------------------


def _psi(x, alpha, lam):
    return -alpha * (math.cosh(x) - 1.0) - lam * (math.exp(x) - x - 1.0)


def _dpsi(x, alpha, lam):
    return -alpha * math.sinh(x) - lam * (math.exp(x) - 1.0)


def _gig_two_param(rng, lam, omega):
    """One draw from density prop. to x^(lam-1) exp(-omega (x + 1/x)/2).

    Ratio-of-uniforms-style rejection with a three-piece hat (Devroye's
    construction); uniformly bounded acceptance rate in (lam, omega).
    Returns (draw, number of proposals).
    """
    alpha = math.sqrt(omega * omega + lam * lam) - lam

    # right and left endpoints of the central plateau
    x = -_psi(1.0, alpha, lam)
    if 0.5 <= x <= 2.0:
        t = 1.0
    elif x > 2.0:
        t = 1.0 if (alpha == 0 and lam == 0) else math.sqrt(2.0 / (alpha + lam))
    else:
        t = 1.0 if (alpha == 0 and lam == 0) else math.log(4.0 / (alpha + 2.0 * lam))

    x = -_psi(-1.0, alpha, lam)
    if 0.5 <= x <= 2.0:
        s = 1.0
    elif x > 2.0:
        if alpha == 0 and lam == 0:
            s = 1.0
        else:
            s = math.sqrt(4.0 / (alpha * math.cosh(1.0) + lam))
    else:
        if alpha == 0 and lam == 0:
            s = 1.0
        elif alpha == 0:
            s = 1.0 / lam
        elif lam == 0:
            ai = 1.0 / alpha
            s = math.log(1.0 + ai + math.sqrt(ai * ai + 2.0 * ai))
        else:
            ai = 1.0 / alpha
            s = min(1.0 / lam, math.log(1.0 + ai + math.sqrt(ai * ai + 2.0 * ai)))

    eta = -_psi(t, alpha, lam)
    zeta = -_dpsi(t, alpha, lam)
    theta = -_psi(-s, alpha, lam)
    xi = _dpsi(-s, alpha, lam)
    pp = 1.0 / xi
    r = 1.0 / zeta
    td = t - r * eta
    sd = s - pp * theta
    q = td + sd
    total = pp + q + r

    n_iter = 0
    while True:
        n_iter += 1
        if n_iter > 1000:
            raise RuntimeError("GIG rejection sampler failed to accept")
        u = rng.random() * total
        v = rng.random()
        w = rng.random()
        if u < q:
            rnd = -sd + q * v
        elif u < q + r:
            rnd = td - r * math.log(v)
        else:
            rnd = -sd + pp * math.log(v)
        if -sd <= rnd <= td:
            hat = 1.0
        elif rnd > td:
            hat = math.exp(-eta - zeta * (rnd - t))
        else:
            hat = math.exp(-theta + xi * (rnd + s))
        if w * hat <= math.exp(_psi(rnd, alpha, lam)):
            break

    out = math.exp(rnd) * (lam / omega + math.sqrt(1.0 + (lam / omega) ** 2))
    return out, n_iter


def _sample_gig_scalar(rng, nu, a, b, count=None):
    if b == 0.0:
        return rng.gamma(nu, 2.0 / a)
    if a == 0.0:
        return 1.0 / rng.gamma(-nu, 2.0 / b)
    lam = nu
    swap = False
    if lam < 0:
        lam = -lam
        swap = True
    omega = math.sqrt(a * b)
    draw, n_iter = _gig_two_param(rng, lam, omega)
    if swap:
        draw = 1.0 / draw
    draw = draw / math.sqrt(a / b)
    if count is not None:
        count.append(n_iter)
    return draw


def sample_gig(params: GigParams, rng) -> float:
    """One GIG(nu, a, b) draw under the package-wide density convention.

    Reductions honoured exactly: b = 0 gives Gamma(nu, rate a/2); a = 0
    gives the inverse of Gamma(-nu, rate b/2); nu = -1/2 is the inverse
    Gaussian with mean sqrt(b/a), shape b.
    """
    rng = as_generator(rng)
    return _sample_gig_scalar(rng, params.order, params.rate_a, params.rate_b)


def gig_vector(nu, a, b, rng) -> np.ndarray:
    """Independent GIG draws with broadcast (nu, a, b); used by the prior
    updates that redraw one local scale per coordinate."""
    rng = as_generator(rng)
    nu, a, b = np.broadcast_arrays(np.asarray(nu, float), np.asarray(a, float), np.asarray(b, float))
    out = np.empty(nu.shape, dtype=float)
    flat_nu, flat_a, flat_b = nu.ravel(), a.ravel(), b.ravel()
    flat = out.ravel()
    for i in range(flat.shape[0]):
        flat[i] = _sample_gig_scalar(rng, flat_nu[i], flat_a[i], flat_b[i])
    return out


# ---------------------------------------------------------------------------
# Inverse Gaussian
# ---------------------------------------------------------------------------


def invgauss_vector(mean, shape, rng, size=None) -> np.ndarray:
    """Michael-Schucany-Haas draws from IG(mean, shape), vectorized."""
    rng = as_generator(rng)
    mu = np.asarray(mean, dtype=float)
    lam = np.asarray(shape, dtype=float)
    if np.any(mu <= 0) or np.any(lam <= 0):
        raise ValueError("inverse-Gaussian parameters must be positive")
    if size is not None:
        mu = np.broadcast_to(mu, size).astype(float)
        lam = np.broadcast_to(lam, size).astype(float)
    else:
        mu, lam = np.broadcast_arrays(mu, lam)
    nu = rng.standard_normal(mu.shape) ** 2
    w = mu * nu
    # smaller root of the MSH quadratic, rationalized so huge mu*nu cannot
    # overflow: x = mu (1 - 2 / (1 + sqrt(1 + 4 lam / w)))
    ratio = 4.0 * lam / np.maximum(w, 1e-300)
    x = mu * (1.0 - 2.0 / (1.0 + np.sqrt(1.0 + ratio)))
    x = np.maximum(x, 1e-300)
    u = rng.random(mu.shape)
    take_other = u > mu / (mu + x)
    return np.where(take_other, mu * mu / x, x)


def sample_inverse_gaussian(params: InvGaussParams, rng) -> float:
    """One inverse-Gaussian draw with mean mu and shape lam."""
    rng = as_generator(rng)
    return float(invgauss_vector(params.mean, params.shape, rng))


# ---------------------------------------------------------------------------
# Slice transition for half-Cauchy style conditionals
# ---------------------------------------------------------------------------


def _trunc_gamma(rng, shape, rate, upper):
    """Inverse-CDF draw from Gamma(shape, rate) truncated to (0, upper)."""
    if rate <= 0.0:
        # pure power-law slice: density prop. to x^(shape-1) on (0, upper)
        return upper * rng.random() ** (1.0 / shape)
    cap = gammainc(shape, rate * upper)
    if cap <= 0.0 or not np.isfinite(cap):
        # upper sits so deep in the left tail that the exponential factor
        # is flat there; fall back to the power-law slice
        return upper * rng.random() ** (1.0 / shape)
    u = rng.random()
    draw = gammaincinv(shape, u * cap) / rate
    return min(draw, upper)


def slice_halfcauchy(current: float, exp_rate: float, gamma_shape: float, rng) -> float:
    """One slice-sampling transition for the density
    eta^(shape-1) exp(-mu eta) / (1 + eta) on eta > 0.

    Step 1 draws the slice variable u ~ U(0, 1/(1+eta)); step 2 redraws eta
    from the gamma (exponential when shape = 1) density truncated to
    (0, (1-u)/u). Targets with mu = 0 degenerate to a truncated power law
    and stay valid.
    """
    if current <= 0:
        raise ValueError("current state must be positive")
    if gamma_shape < 0.5:
        raise ValueError("gamma_shape must be >= 1/2")
    rng = as_generator(rng)
    u = rng.random() / (1.0 + current)
    upper = (1.0 - u) / u
    return _trunc_gamma(rng, gamma_shape, exp_rate, upper)
