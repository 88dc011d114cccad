import math

import numpy as np
import pytest

from ordinal_clm.clm_head import (
    EPS_PROB,
    ClmParameters,
    LinkFunction,
    build_thresholds,
    clm_forward,
    clm_gradients,
    inverse_link,
    link_cdf,
    link_pdf,
    predict_argmax,
    predict_interval,
)
from ordinal_clm.exceptions import DomainError

from conftest import central_difference, relative_error

LINKS = list(LinkFunction)


def test_link_names_round_trip():
    assert [l.value for l in LinkFunction] == ["logit", "probit", "cloglog"]
    assert LinkFunction.parse("PROBIT") is LinkFunction.PROBIT
    with pytest.raises(DomainError):
        LinkFunction.parse("cauchit")


@pytest.mark.parametrize("link, z, expected", [
    ("logit", 0.0, 0.5),
    ("probit", 0.0, 0.5),
    ("cloglog", 0.0, 1 - math.exp(-1)),
    # mpmath, 30 digits
    ("logit", 2.0, 0.880797077977882444),
])
def test_link_cdf_values(link, z, expected):
    assert link_cdf(link, z) == pytest.approx(expected, abs=1e-15)


def test_link_pdf_values():
    assert link_pdf("logit", 0.0) == 0.25
    # 1/sqrt(2 pi) by mpmath
    assert link_pdf("probit", 0.0) == pytest.approx(0.398942280401432678, abs=1e-15)


@pytest.mark.parametrize("link", LINKS)
@pytest.mark.parametrize("z", [-3.0, -0.5, 0.0, 0.7, 2.5])
def test_link_pdf_is_cdf_derivative(link, z):
    h = 1e-6
    fd = (link_cdf(link, z + h) - link_cdf(link, z - h)) / (2 * h)
    assert abs(fd - link_pdf(link, z)) / link_pdf(link, z) < 1e-6


@pytest.mark.parametrize("link", LINKS)
def test_link_rejects_non_finite(link):
    for bad in (np.nan, np.inf, -np.inf):
        with pytest.raises(DomainError):
            link_cdf(link, bad)
        with pytest.raises(DomainError):
            link_pdf(link, bad)


@pytest.mark.parametrize("link", LINKS)
def test_link_cdf_clamped_and_increasing(link):
    z = np.linspace(-60, 60, 4001)
    p = link_cdf(link, z)
    assert p.min() >= EPS_PROB and p.max() <= 1 - EPS_PROB
    assert np.all(np.diff(p) >= 0)
    mid = np.linspace(-5, 3, 200)
    assert np.all(np.diff(link_cdf(link, mid)) > 0)


def test_cloglog_saturation_guards():
    assert link_cdf("cloglog", 31.0) == 1 - EPS_PROB
    assert link_cdf("cloglog", -31.0) == EPS_PROB
    assert link_cdf("cloglog", 800.0) == 1 - EPS_PROB


@pytest.mark.parametrize("link", ["logit", "probit"])
def test_symmetric_links(link):
    z = np.linspace(-8, 8, 1601)
    assert np.max(np.abs(link_cdf(link, z) + link_cdf(link, -z) - 1)) <= 1e-12
    # 1 - p cancels catastrophically in the far tails
    p = link_cdf(link, np.linspace(-5, 5, 1001))
    assert np.max(np.abs(inverse_link(link, p) + inverse_link(link, 1 - p))) <= 1e-9


def test_cloglog_is_asymmetric():
    z = np.linspace(-8, 8, 1601)
    assert np.max(np.abs(link_cdf("cloglog", z) + link_cdf("cloglog", -z) - 1)) > 0.01


@pytest.mark.parametrize("link", LINKS)
def test_inverse_link_inverts_cdf(link):
    z = np.linspace(-3, 3, 61)
    np.testing.assert_allclose(inverse_link(link, link_cdf(link, z)), z, atol=1e-9)


@pytest.mark.parametrize("b1, alpha, expected", [
    (0.0, [], [0.0]),
    (0.0, [0.0, 0.0], [0.0, 0.0, 0.0]),
    (-1.0, [1.0, 2.0], [-1.0, 0.0, 4.0]),
])
def test_build_thresholds(b1, alpha, expected):
    np.testing.assert_array_equal(build_thresholds(ClmParameters(b1, alpha)), expected)


def test_thresholds_monotone_random(rng):
    for _ in range(10_000):
        q = rng.integers(2, 10)
        p = ClmParameters(rng.normal(0, 3), rng.normal(0, 2, q - 2), 1.0)
        b = build_thresholds(p)
        assert b.size == q - 1
        assert np.all(np.diff(b) >= 0)


def test_initial_parameters():
    p = ClmParameters.initial(5)
    np.testing.assert_allclose(build_thresholds(p), [-2, -2 / 3, 2 / 3, 2], atol=1e-15)
    assert p.tau == 1.0
    np.testing.assert_array_equal(build_thresholds(ClmParameters.initial(2)), [-2.0])
    with pytest.raises(DomainError):
        ClmParameters.initial(1)


def test_parameters_validate_tau():
    with pytest.raises(DomainError):
        ClmParameters(0.0, [], tau=0.0)
    with pytest.raises(DomainError):
        ClmParameters(np.nan, [])


def test_forward_hand_example():
    # thresholds [0, 1]
    p = ClmParameters(0.0, [1.0], 1.0)
    rec = clm_forward(p, "logit", 0.0)
    s1 = 0.731058578630004879  # logistic(1), mpmath
    np.testing.assert_allclose(rec.cumulative, [0.5, s1], atol=1e-15)
    np.testing.assert_allclose(rec.probs, [0.5, s1 - 0.5, 1 - s1], atol=1e-15)
    assert predict_argmax(rec) == 0
    assert predict_interval(p, 0.0) == 0


@pytest.mark.parametrize("link", LINKS)
def test_two_classes_even_split(link):
    p = ClmParameters(0.8, [], tau=2.5)
    probs = clm_forward(p, "logit", 0.8 * 2.5).probs
    np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("link", LINKS)
def test_forward_invariants(link, rng):
    for _ in range(200):
        q = int(rng.integers(2, 9))
        p = ClmParameters(rng.normal(0, 2), rng.normal(0, 1.5, q - 2), rng.uniform(0.1, 3))
        latent = rng.normal(0, 6, 50)
        rec = clm_forward(p, link, latent)
        assert rec.probs.shape == (50, q)
        assert np.max(np.abs(rec.probs.sum(axis=1) - 1)) <= 1e-12
        assert np.all(rec.probs >= 0)
        assert np.all(np.diff(rec.cumulative, axis=1) >= 0)
        assert np.all((rec.cumulative > 0) & (rec.cumulative < 1))
        partial = np.cumsum(rec.probs, axis=1)[:, :-1]
        assert np.max(np.abs(partial - rec.cumulative)) <= 1e-12


@pytest.mark.parametrize("link", LINKS)
def test_tau_scaling_covariance(link, rng):
    for _ in range(100):
        p = ClmParameters(rng.normal(), rng.normal(size=3), rng.uniform(0.2, 2))
        latent = rng.normal(0, 3, 10)
        c = rng.uniform(0.1, 10)
        scaled = ClmParameters(p.b1, p.alpha, p.tau * c)
        a = clm_forward(p, link, latent).probs
        b = clm_forward(scaled, link, latent * c).probs
        assert np.max(np.abs(a - b)) <= 1e-12


def test_forward_rejects_non_finite_latent():
    with pytest.raises(DomainError):
        clm_forward(ClmParameters.initial(3), "logit", np.nan)


def _head_fd(params, link, latent, upstream):
    """Finite differences of upstream . probs w.r.t. (latent, b1, alpha, tau)."""
    n_alpha = params.alpha.size

    def loss(theta):
        l = theta[:latent.size]
        b1, alpha, tau = theta[latent.size], theta[latent.size + 1:-1], theta[-1]
        probs = clm_forward(ClmParameters(b1, alpha, tau), link, l).probs
        return float(np.sum(upstream * probs))

    theta = np.concatenate([latent, [params.b1], params.alpha, [params.tau]])
    fd = central_difference(loss, theta)
    return fd[:latent.size], fd[latent.size], fd[latent.size + 1:latent.size + 1 + n_alpha], fd[-1]


def _head_analytic(params, link, latent, upstream):
    g = clm_gradients(params, link, latent, upstream)
    return g.d_latent, g.d_b1, g.d_alpha, g.d_tau


def test_gradient_seed42_one_hot():
    rng = np.random.default_rng(42)
    p = ClmParameters(rng.normal(), rng.normal(size=1), rng.uniform(0.5, 2))
    latent = rng.normal(size=1)
    upstream = np.array([[1.0, 0.0, 0.0]])
    for a, f in zip(_head_analytic(p, "logit", latent, upstream),
                    _head_fd(p, "logit", latent, upstream)):
        assert relative_error(a, f) < 1e-5


@pytest.mark.parametrize("link", LINKS)
@pytest.mark.parametrize("q", [2, 3, 5, 8])
def test_gradient_matches_finite_differences(link, q):
    rng = np.random.default_rng(q * 7 + LINKS.index(link))
    for _ in range(9):
        p = ClmParameters(rng.normal(), rng.normal(0, 0.8, q - 2), rng.uniform(0.5, 2))
        latent = rng.normal(0, 2, 4)
        upstream = rng.normal(size=(4, q))
        for a, f in zip(_head_analytic(p, link, latent, upstream),
                        _head_fd(p, link, latent, upstream)):
            assert relative_error(a, f) < 1e-5


def test_gradient_zero_alpha_and_zero_upstream():
    p = ClmParameters(0.3, [0.0, 0.0, 0.0], 1.2)
    g = clm_gradients(p, "probit", np.array([0.1, -0.4]), np.ones((2, 5)) * np.arange(5))
    np.testing.assert_array_equal(g.d_alpha, 0.0)
    g = clm_gradients(ClmParameters.initial(4), "cloglog", np.array([0.5]), np.zeros((1, 4)))
    assert g.d_b1 == 0 and g.d_tau == 0
    np.testing.assert_array_equal(g.d_alpha, 0.0)
    np.testing.assert_array_equal(g.d_latent, 0.0)


def test_scalar_gradient_shape():
    g = clm_gradients(ClmParameters.initial(3), "logit", 0.2, [1.0, 0.0, 0.0])
    assert isinstance(g.d_latent, float)


@pytest.mark.parametrize("latent, expected", [(-3.0, 0), (2.0, 1), (0.0, 0), (4.0, 1), (4.5, 2)])
def test_predict_interval(latent, expected):
    p = ClmParameters(0.0, [2.0], 1.0)  # thresholds [0, 4]
    assert predict_interval(p, latent) == expected


def test_predict_interval_matches_scan(rng):
    for _ in range(500):
        q = int(rng.integers(2, 7))
        p = ClmParameters(rng.normal(), rng.normal(size=q - 2), rng.uniform(0.5, 2))
        b = build_thresholds(p)
        l = rng.normal(0, 3)
        f = l / p.tau
        # lowest class whose upper threshold is >= f
        expected = next((k for k, bk in enumerate(b) if f <= bk), q - 1)
        assert predict_interval(p, l) == expected


def test_predict_argmax_ties():
    assert predict_argmax(np.array([0.5, 0.23, 0.27])) == 0
    assert predict_argmax(np.array([0.25] * 4)) == 0
    np.testing.assert_array_equal(predict_argmax(np.array([[0.1, 0.9], [0.5, 0.5]])), [1, 0])
