import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from minimaxq.divergences import (
    DiscreteDist,
    GaussianDist,
    ProductDist,
    bretagnolle_huber_tv_bound,
    kl_discrete,
    kl_divergence,
    kl_gaussian,
    pinsker_tv_bound,
    tensorize_kl,
    tv_discrete,
    tv_product_exact,
)
from minimaxq.exceptions import CapacityError, DomainError

probs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5)


def _law(weights):
    w = np.asarray(weights) / np.sum(weights)
    return DiscreteDist(np.arange(len(w), dtype=float), w)


def test_discrete_law_validation():
    with pytest.raises(ValueError):
        DiscreteDist([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteDist([0.0, 0.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        DiscreteDist([0.0, 1.0], [-0.1, 1.1])


def test_gaussian_validation():
    with pytest.raises(ValueError):
        GaussianDist([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        GaussianDist([0.0], [[1.0, 0.0], [0.0, 1.0]])


def test_kl_gaussian_identity_is_zero():
    p = GaussianDist([1.0, -2.0], [[2.0, 0.3], [0.3, 1.0]])
    assert kl_gaussian(p, p) == pytest.approx(0.0, abs=1e-12)


def test_kl_gaussian_mean_shift_pair():
    # n * KL equals half the two-point budget for the top-eigenvector pair
    Sigma = np.diag([5.0, 3.0, 1.0])
    n, delta = 200, 0.05
    budget = math.log(1 / (4 * delta * (1 - delta)))
    shift = math.sqrt(5.0 * budget / n) * np.eye(3)[0]
    kl = kl_gaussian(GaussianDist(np.zeros(3), Sigma), GaussianDist(shift, Sigma))
    assert n * kl == pytest.approx(budget / 2, rel=1e-12)


def test_kl_gaussian_scaled_variance():
    a, s2 = 0.8, 2.5
    kl = kl_gaussian(GaussianDist([0.0], [[a**2 * s2]]), GaussianDist([0.0], [[s2]]))
    assert kl == pytest.approx((math.log(1 / a**2) - (1 - a**2)) / 2, rel=1e-12)


def test_kl_gaussian_errors():
    p = GaussianDist([0.0, 0.0], np.eye(2))
    q = GaussianDist([0.0, 0.0], np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        kl_gaussian(p, q)
    with pytest.raises(ValueError):
        kl_gaussian(p, GaussianDist([0.0], [[1.0]]))


def test_kl_discrete_bernoulli_pair():
    s = 0.3
    kl = kl_discrete(DiscreteDist.bernoulli((1 + s) / 2), DiscreteDist.bernoulli((1 - s) / 2))
    assert kl == pytest.approx(s * math.log((1 + s) / (1 - s)), rel=1e-12)


def test_kl_discrete_infinite_without_absolute_continuity():
    p = DiscreteDist([0.0, 1.0, 2.0], [0.2, 0.3, 0.5])
    q = DiscreteDist([0.0, 1.0], [0.5, 0.5])
    assert math.isinf(kl_discrete(p, q))
    assert bretagnolle_huber_tv_bound(kl_discrete(p, q)) == 1.0


@given(probs, probs)
@settings(max_examples=200, deadline=None)
def test_kl_discrete_matches_scipy_entropy(a, b):
    k = min(len(a), len(b))
    p, q = _law(a[:k]), _law(b[:k])
    assert kl_discrete(p, q) == pytest.approx(stats.entropy(p.probs, q.probs), rel=1e-9, abs=1e-12)


def test_tv_discrete_examples():
    assert tv_discrete(DiscreteDist.bernoulli(0.2), DiscreteDist.bernoulli(0.2)) == 0.0
    assert tv_discrete(DiscreteDist.bernoulli(0.2), DiscreteDist.bernoulli(0.7)) == pytest.approx(0.5, abs=1e-15)


def test_tv_three_point_contamination_laws():
    eps = 0.1
    a, b = (eps + eps**2) / 2, (3 * eps + eps**2) / 2
    X = DiscreteDist([-1.0, 0.0, 1.0], [eps, 1 - 2 * eps, eps])
    Y = DiscreteDist([-1.0, 0.0, 1.0], [a, 1 - a - b, b])
    assert tv_discrete(X, Y) == pytest.approx((eps + eps**2) / 2, abs=1e-15)


def test_tensorize_kl():
    assert tensorize_kl(0.0, 7) == 0.0
    assert tensorize_kl(0.5, 4) == 2.0
    d, n = 50, 500
    assert tensorize_kl(math.log(d) / (4 * n), n) == pytest.approx(math.log(d) / 4, rel=1e-12)
    with pytest.raises(ValueError):
        tensorize_kl(-1.0, 2)


def test_tv_product_exact_examples():
    p, q = DiscreteDist.bernoulli(0.5), DiscreteDist.bernoulli(0.9)
    assert tv_product_exact(p, q, 1) == pytest.approx(tv_discrete(p, q), abs=1e-15)
    assert tv_product_exact(p, p, 3) == 0.0
    # four outcomes by hand
    pp = [0.25, 0.25, 0.25, 0.25]
    qq = [0.01, 0.09, 0.09, 0.81]
    assert tv_product_exact(p, q, 2) == pytest.approx(0.5 * sum(abs(x - y) for x, y in zip(pp, qq)), abs=1e-15)


def test_tv_product_capacity():
    p = _law(np.ones(10))
    with pytest.raises(CapacityError):
        tv_product_exact(p, p, 8)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_tv_product_monotone_and_subadditive(a, b):
    p, q = DiscreteDist.bernoulli(a), DiscreteDist.bernoulli(b)
    tv1 = tv_discrete(p, q)
    tvs = [tv_product_exact(p, q, n) for n in range(1, 6)]
    assert all(x <= y + 1e-12 for x, y in zip(tvs, tvs[1:]))
    assert all(t <= min(1.0, n * tv1) + 1e-12 for n, t in zip(range(1, 6), tvs))


def test_bretagnolle_huber_examples():
    assert bretagnolle_huber_tv_bound(0.0) == 0.0
    delta = 0.1
    assert bretagnolle_huber_tv_bound(math.log(1 / (4 * delta * (1 - delta)))) == pytest.approx(0.8, abs=1e-12)
    assert bretagnolle_huber_tv_bound(math.inf) == 1.0
    assert bretagnolle_huber_tv_bound(800.0) == 1.0


def test_pinsker_examples():
    assert pinsker_tv_bound(0.0) == 0.0
    assert pinsker_tv_bound(8 / 9) == pytest.approx(2 / 3, abs=1e-15)
    assert pinsker_tv_bound(2.0) == 1.0
    with pytest.raises(ValueError):
        pinsker_tv_bound(-0.1)


@given(probs, probs)
@settings(max_examples=300, deadline=None)
def test_tv_below_kl_bounds(a, b):
    k = min(len(a), len(b))
    p, q = _law(a[:k]), _law(b[:k])
    tv, kl = tv_discrete(p, q), kl_discrete(p, q)
    assert tv <= pinsker_tv_bound(kl) + 1e-12
    assert tv <= bretagnolle_huber_tv_bound(kl) + 1e-12


@given(probs)
@settings(max_examples=100, deadline=None)
def test_divergences_vanish_on_equal_laws(a):
    p = _law(a)
    assert kl_discrete(p, p) == 0.0
    assert tv_discrete(p, p) == 0.0


def test_kl_divergence_dispatch_and_products():
    p, q = DiscreteDist.bernoulli(0.3), DiscreteDist.bernoulli(0.6)
    assert kl_divergence(ProductDist(p, 5), ProductDist(q, 5)) == pytest.approx(5 * kl_discrete(p, q))
    g = GaussianDist([0.0], [[1.0]])
    h = GaussianDist([1.0], [[1.0]])
    assert kl_divergence(g, h) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        kl_divergence(ProductDist(p, 2), ProductDist(q, 3))


def test_kl_gaussian_against_monte_carlo(rng):
    A = rng.standard_normal((3, 3))
    p = GaussianDist(rng.standard_normal(3), A @ A.T + np.eye(3))
    q = GaussianDist(rng.standard_normal(3), np.diag([1.0, 2.0, 0.5]))
    x = p.sample(200_000, rng)
    lr = stats.multivariate_normal(p.mean, p.covariance).logpdf(x) - stats.multivariate_normal(q.mean, q.covariance).logpdf(x)
    assert abs(lr.mean() - kl_gaussian(p, q)) <= 3 * lr.std(ddof=1) / math.sqrt(x.shape[0])
