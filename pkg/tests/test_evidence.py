"""Evidence tests: marginal likelihood against direct quadrature, the
Savage-Dickey identity on compatible nested fixtures, information criteria
arithmetic, and the g-prior enumeration properties."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from shrinkreg.engine import DrawStore
from shrinkreg.evidence import (
    ConjugateModel,
    ImproperPriorError,
    bma_enumerate_gprior,
    gaussian_loglik,
    info_criteria,
    log_marginal_conjugate,
    predictive_t,
    sddr,
)
from shrinkreg.rng import make_generator


def quadrature_log_marginal(model, x, y):
    """Oracle: log p(y) by direct 2-D integration over (beta, sigma^2),
    log-rescaled so quad's tolerances bite. p = 1 only."""
    x = model.design(x)[:, 0]
    y = np.asarray(y, float)
    n = len(y)
    d = float(model.d[0, 0])
    v0, s0 = model.v0, model.s0

    def log_joint(beta, s2):
        rss = float(np.sum((y - x * beta) ** 2))
        loglik = -0.5 * n * np.log(2 * np.pi * s2) - rss / (2.0 * s2)
        lp_beta = -0.5 * np.log(2 * np.pi * s2 * d) - beta * beta / (2 * s2 * d)
        lp_s2 = (0.5 * v0 * np.log(s0 / 2.0) - gammaln(v0 / 2.0)
                 - (v0 / 2.0 + 1.0) * np.log(s2) - s0 / (2.0 * s2))
        return loglik + lp_beta + lp_s2

    bgrid = np.linspace(-6, 6, 41)
    sgrid = np.geomspace(1e-2, 40, 41)
    shift = max(log_joint(b, s) for b in bgrid for s in sgrid)

    def inner(s2):
        val, _ = quad(lambda b: np.exp(log_joint(b, s2) - shift), -np.inf, np.inf, limit=200)
        return val

    outer, _ = quad(inner, 1e-6, 200.0, limit=300)
    return shift + np.log(outer)


FIXTURES = [
    # (x, y, D, v0, s0)
    (np.array([[1.0], [1.0], [1.0]]), np.array([1.0, 0.0, -1.0]), 1.0, 1.0, 1.0),
    (np.array([[0.5], [-1.0], [2.0], [0.3]]), np.array([0.2, -0.7, 1.9, 0.5]), 4.0, 3.0, 2.0),
    (np.array([[1.0], [2.0], [3.0], [4.0], [5.0]]),
     np.array([1.1, 1.9, 3.2, 3.8, 5.1]), 0.5, 2.0, 0.5),
    (np.array([[-1.0], [0.5], [1.5]]), np.array([0.3, -0.1, 0.8]), 10.0, 5.0, 3.0),
    (np.array([[2.0], [-2.0], [1.0], [0.5]]), np.array([3.1, -2.8, 1.4, 0.9]), 2.0, 1.0, 2.0),
]


@pytest.mark.parametrize("idx", range(len(FIXTURES)))
def test_log_marginal_matches_quadrature(idx):
    x, y, d, v0, s0 = FIXTURES[idx]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    analytic = log_marginal_conjugate(model, x, y)
    oracle = quadrature_log_marginal(model, x, y)
    assert abs(analytic - oracle) < 1e-4


def test_log_marginal_p2_matches_reduced_quadrature():
    rng = make_generator(1)
    x = rng.standard_normal((6, 2))
    y = x @ np.array([1.0, -0.5]) + rng.standard_normal(6)
    model = ConjugateModel(d=np.diag([2.0, 3.0]), v0=2.0, s0=2.0)
    analytic = log_marginal_conjugate(model, x, y)

    # sigma^2 integrated analytically, beta on a 2-D grid
    n = 6
    d_inv = np.diag([0.5, 1.0 / 3.0])

    def log_beta_marginal(b1, b2):
        beta = np.array([b1, b2])
        rss = float(np.sum((y - x @ beta) ** 2))
        quad_form = float(beta @ d_inv @ beta)
        a_post = (model.v0 + n + 2) / 2.0
        rate = (model.s0 + rss + quad_form) / 2.0
        const = (0.5 * model.v0 * np.log(model.s0 / 2.0) - gammaln(model.v0 / 2.0)
                 - 0.5 * (n + 2) * np.log(2 * np.pi) - 0.5 * np.log(6.0))
        return const + gammaln(a_post) - a_post * np.log(rate)

    grid = np.linspace(-4, 4, 401)
    from scipy.integrate import simpson
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    vals = np.vectorize(log_beta_marginal)(g1, g2)
    shift = vals.max()
    total = simpson(simpson(np.exp(vals - shift), x=grid, axis=1), x=grid)
    oracle = shift + np.log(total)
    assert abs(analytic - oracle) < 1e-4


def test_lindley_effect_diffuse_prior_lowers_evidence():
    x, y, _, _, _ = FIXTURES[1]
    y = y - y.mean()
    lo = log_marginal_conjugate(ConjugateModel(d=np.array([[1.0]]), v0=2.0, s0=2.0), x, y)
    hi = log_marginal_conjugate(ConjugateModel(d=np.array([[1e6]]), v0=2.0, s0=2.0), x, y)
    assert hi < lo


def test_log_marginal_invariant_to_observation_order():
    rng = make_generator(2)
    x = rng.standard_normal((8, 1))
    y = 0.5 * x[:, 0] + rng.standard_normal(8)
    model = ConjugateModel(d=np.array([[2.0]]), v0=2.0, s0=2.0)
    base = log_marginal_conjugate(model, x, y)
    perm = rng.permutation(8)
    assert abs(log_marginal_conjugate(model, x[perm], y[perm]) - base) < 1e-12


def test_improper_prior_refused():
    with pytest.raises(ImproperPriorError, match="proper"):
        log_marginal_conjugate(ConjugateModel(d=np.eye(1), v0=0.0, s0=1.0),
                               np.ones((3, 1)), np.zeros(3))


# ---------------------------------------------------------------------------
# predictive density
# ---------------------------------------------------------------------------


def test_predictive_zero_covariates_centred():
    x, y, d, v0, s0 = FIXTURES[1]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    pred = predictive_t(model, x, y, np.array([0.0]))
    assert pred.location == 0.0


def test_predictive_density_integrates_to_one():
    x, y, d, v0, s0 = FIXTURES[0]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    pred = predictive_t(model, x, y, np.array([1.0]))
    total, _ = quad(pred.pdf, -60, 60, limit=200)
    assert abs(total - 1.0) < 1e-4


def test_predictive_matches_evidence_ratio():
    # independent identity: p(y_new | y) = p(y, y_new) / p(y)
    x, y, d, v0, s0 = FIXTURES[1]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    x_new = np.array([0.8])
    pred = predictive_t(model, x, y, x_new)
    for y_new in (-1.0, 0.3, 2.2):
        num = log_marginal_conjugate(model, np.vstack([x, x_new[None, :]]),
                                     np.append(y, y_new))
        den = log_marginal_conjugate(model, x, y)
        assert abs(pred.logpdf(y_new) - (num - den)) < 1e-10


def test_predictive_variance_shrinks_to_sigma2():
    rng = make_generator(3)
    n = 5000
    x = rng.standard_normal((n, 1))
    sigma2 = 1.7
    y = 0.5 * x[:, 0] + np.sqrt(sigma2) * rng.standard_normal(n)
    model = ConjugateModel(d=np.array([[4.0]]), v0=2.0, s0=2.0)
    pred = predictive_t(model, x, y, np.array([0.3]))
    assert abs(pred.variance - sigma2) / sigma2 < 0.1


# ---------------------------------------------------------------------------
# information criteria
# ---------------------------------------------------------------------------


def test_bic_arithmetic():
    store = DrawStore(beta=np.zeros((1, 3)), sigma2=np.ones(1),
                      scale_diag=np.ones((1, 3)), chain_id=np.zeros(1, int),
                      iteration=np.zeros(1, int))
    out = info_criteria(store, np.zeros((100, 3)), np.zeros(100),
                        mode_loglik=-150.0, p_count=3, n_count=100)
    assert abs(out["bic"] - (300 + 3 * np.log(100))) < 1e-10
    assert abs(out["bic"] - 313.8155) < 1e-3


def test_dic_degenerate_single_draw():
    rng = make_generator(4)
    x = rng.standard_normal((30, 2))
    beta = np.array([1.0, -1.0])
    y = x @ beta + rng.standard_normal(30)
    store = DrawStore(beta=beta[None, :], sigma2=np.array([1.3]),
                      scale_diag=np.ones((1, 2)), chain_id=np.zeros(1, int),
                      iteration=np.zeros(1, int))
    ll = gaussian_loglik(x, y, beta, 1.3)
    out = info_criteria(store, x, y, mode_loglik=ll, p_count=2, n_count=30)
    assert abs(out["dic"] - (-2.0 * ll)) < 1e-10


def test_dic_matches_quadrature_expectation():
    # exact NIG posterior draws; the posterior expectation of the data
    # log density computed by 2-D quadrature over the analytic posterior
    rng = make_generator(5)
    n = 40
    x = rng.standard_normal((n, 1))
    y = 0.7 * x[:, 0] + rng.standard_normal(n)
    d, v0, s0 = 4.0, 3.0, 3.0
    q = float(x[:, 0] @ x[:, 0]) + 1.0 / d
    mu = float(x[:, 0] @ y) / q
    vn = v0 + n
    sn = s0 + float(y @ y) - mu * mu * q

    m = 200_000
    sig2 = sn / 2.0 / rng.gamma(vn / 2.0, 1.0, size=m)
    betas = mu + np.sqrt(sig2 / q) * rng.standard_normal(m)
    store = DrawStore(beta=betas[:, None], sigma2=sig2,
                      scale_diag=np.ones((m, 1)), chain_id=np.zeros(m, int),
                      iteration=np.arange(m))
    pm_ll = gaussian_loglik(x, y, np.array([betas.mean()]), float(sig2.mean()))
    out = info_criteria(store, x, y, mode_loglik=pm_ll, p_count=1, n_count=n)

    def post_expect():
        from scipy.integrate import simpson
        bgrid = np.linspace(mu - 1.5, mu + 1.5, 301)
        sgrid = np.linspace(0.3, 4.0, 301)
        bb, ss = np.meshgrid(bgrid, sgrid, indexing="ij")
        rss = ((y[None, None, :] - x[:, 0][None, None, :] * bb[..., None]) ** 2).sum(-1)
        ll = -0.5 * n * np.log(2 * np.pi * ss) - rss / (2 * ss)
        logpost = (-0.5 * np.log(ss) - (bb - mu) ** 2 * q / (2 * ss)
                   - (vn / 2 + 1) * np.log(ss) - sn / (2 * ss))
        w = np.exp(logpost - logpost.max())
        norm = simpson(simpson(w, x=sgrid, axis=1), x=bgrid)
        return simpson(simpson(w * ll, x=sgrid, axis=1), x=bgrid) / norm

    dic_quad = -4.0 * post_expect() + 2.0 * pm_ll
    assert abs(out["dic"] - dic_quad) < 0.05


# ---------------------------------------------------------------------------
# Savage-Dickey
# ---------------------------------------------------------------------------


def nested_ml_ratio(full, x, y, beta_star=0.0):
    """log p(y | restricted) - log p(y | full) where the restricted model's
    sigma^2 prior is the compatible conditional p(sigma^2 | beta*, full):
    InvGamma((v0+1)/2, (s0 + beta*^2/D)/2)."""
    log_full = log_marginal_conjugate(full, x, y)
    v0_r = full.v0 + 1.0
    s0_r = full.s0 + beta_star ** 2 / float(full.d[0, 0])
    restricted = ConjugateModel(d=np.zeros((0, 0)), v0=v0_r, s0=s0_r, columns=())
    y_shift = y - x[:, 0] * beta_star
    log_restricted = log_marginal_conjugate(restricted, x, y_shift)
    return log_restricted - log_full


@pytest.mark.parametrize("idx", range(5))
def test_sddr_equals_marginal_likelihood_ratio(idx):
    x, y, d, v0, s0 = FIXTURES[idx]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    lhs = sddr(model, x, y, 0.0, log=True)
    rhs = nested_ml_ratio(model, x, y, 0.0)
    assert abs(lhs - rhs) < 1e-3


def test_sddr_nonzero_restriction_point():
    x, y, d, v0, s0 = FIXTURES[1]
    model = ConjugateModel(d=np.array([[d]]), v0=v0, s0=s0)
    lhs = sddr(model, x, y, 0.4, log=True)
    rhs = nested_ml_ratio(model, x, y, 0.4)
    assert abs(lhs - rhs) < 1e-3


def test_bartlett_diffuse_prior_favours_restriction():
    # the unrestricted-over-restricted factor tends to zero as the prior
    # variance grows (pure-noise data)
    rng = make_generator(6)
    x = rng.standard_normal((40, 1))
    y = rng.standard_normal(40)
    vals = []
    for dv in (1e2, 1e4, 1e6):
        model = ConjugateModel(d=np.array([[dv]]), v0=2.0, s0=2.0)
        vals.append(-sddr(model, x, y, 0.0, log=True))  # log BF(full : restricted)
    assert vals[0] > vals[1] > vals[2]


def test_sddr_maximal_at_posterior_mode():
    rng = make_generator(7)
    x = rng.standard_normal((60, 1))
    y = 2.0 * x[:, 0] + 0.5 * rng.standard_normal(60)
    model = ConjugateModel(d=np.array([[4.0]]), v0=2.0, s0=2.0)
    q = float(x[:, 0] @ x[:, 0]) + 0.25
    mode = float(x[:, 0] @ y) / q
    grid = np.linspace(mode - 1.0, mode + 1.0, 41)
    vals = [sddr(model, x, y, b, log=True) for b in grid]
    assert abs(grid[int(np.argmax(vals))] - mode) < 0.06


def test_sddr_underflow_guarded_in_log_space():
    rng = make_generator(8)
    x = rng.standard_normal((50, 1))
    y = 5.0 * x[:, 0] + 0.1 * rng.standard_normal(50)
    model = ConjugateModel(d=np.array([[1.0]]), v0=2.0, s0=2.0)
    val = sddr(model, x, y, -40.0, log=True)  # far outside both densities
    assert np.isfinite(val)


# ---------------------------------------------------------------------------
# g-prior BMA
# ---------------------------------------------------------------------------


def test_bma_null_model_wins_on_noise():
    rng = make_generator(9)
    x = np.linalg.qr(rng.standard_normal((40, 2)))[0]  # orthonormal design
    y = rng.standard_normal(40)
    res = bma_enumerate_gprior(x, y, g_rule="ratio")
    assert res.models[0][0] == ()
    total = sum(pr for _, pr in res.models)
    assert abs(total - 1.0) < 1e-10


def test_bma_recovers_true_support():
    hits = 0
    for rep in range(20):
        rng = make_generator(100 + rep)
        n, p = 100, 8
        x = rng.standard_normal((n, p))
        beta = np.zeros(p)
        beta[:3] = [2.0, -2.0, 1.5]
        sigma2 = float(beta @ beta) * (1 - 0.8) / 0.8
        y = x @ beta + np.sqrt(sigma2) * rng.standard_normal(n)
        res = bma_enumerate_gprior(x, y, g_rule="ratio")
        hits += res.median_model == (0, 1, 2)
    assert hits >= 18


def test_gprior_shrinkage_identity_exact():
    from shrinkreg.evidence import gprior_shrunk_coefficients

    rng = make_generator(10)
    x = rng.standard_normal((30, 3))
    xc = x - x.mean(axis=0)
    y = rng.standard_normal(30)
    yc = y - y.mean()
    g = 3.0 / 30.0
    ols, *_ = np.linalg.lstsq(xc, yc, rcond=None)
    shrunk = gprior_shrunk_coefficients(xc, yc, g)
    assert np.array_equal(shrunk, ols / (1.0 + g))


def test_bma_refuses_large_p():
    x = np.zeros((10, 26))
    with pytest.raises(ValueError, match="MCMC selection"):
        bma_enumerate_gprior(x, np.zeros(10))


def test_bma_probability_lookup_and_pip_consistency():
    rng = make_generator(11)
    x = rng.standard_normal((50, 3))
    y = x @ np.array([2.0, 0.0, 0.0]) + 0.5 * rng.standard_normal(50)
    res = bma_enumerate_gprior(x, y)
    assert 0 <= res.probability((0,)) <= 1
    manual_pip0 = sum(pr for cols, pr in res.models if 0 in cols)
    assert abs(manual_pip0 - res.pip[0]) < 1e-12
