import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from minimaxq.bounds import IDENTITY, SQUARE, LossModel
from minimaxq.divergences import DiscreteDist, tv_product_exact
from minimaxq.estimators import (
    EPANECHNIKOV,
    EstimatorSpec,
    build_estimator,
    clipped_sgd,
    kde_point,
    lepski_kde,
    median_of_means,
    median_of_three,
    pava,
    prox_sorted_l1,
    sample_covariance,
    sample_mean,
    slope,
    slope_weights,
    zero_covariance,
)
from minimaxq.estimators.basic import mom_blocks
from minimaxq.estimators.kde import lepski_constants
from minimaxq.estimators.sgd import default_schedule
from minimaxq.estimators.slope import sorted_l1_norm
from minimaxq.estimators.testing import lr_two_point
from minimaxq.estimators import isotonic_clipped

GRID_STEP = 1e-3


def grid_isotonic(y, step=GRID_STEP):
    """Exact minimiser of ||theta - y||^2 over nondecreasing theta on a grid, by dynamic programming."""
    grid = np.arange(math.floor(y.min() / step) - 1, math.ceil(y.max() / step) + 2) * step
    cost = (grid - y[0]) ** 2
    back = []
    for yi in y[1:]:
        best_prev = np.minimum.accumulate(cost)
        arg_prev = np.array([0] + [0] * (len(grid) - 1))
        # index of the running minimum
        idx = np.zeros(len(grid), dtype=int)
        run = 0
        for j in range(1, len(grid)):
            if cost[j] < cost[run]:
                run = j
            idx[j] = run
        back.append(idx)
        cost = best_prev + (grid - yi) ** 2
        del arg_prev
    j = int(np.argmin(cost))
    path = [j]
    for idx in reversed(back):
        j = int(idx[j])
        path.append(j)
    return grid[np.array(path[::-1])]


class TestLocation:
    def test_sample_mean(self):
        assert np.allclose(sample_mean(np.full((4, 3), 2.5)), 2.5)
        assert sample_mean([0.0, 2.0]) == 1.0
        with pytest.raises(ValueError):
            sample_mean(np.zeros((0, 2)))

    def test_median_of_means(self):
        data = np.array([1.0, 5.0, 2.0, 8.0, 3.0])
        assert median_of_means(data, 1) == pytest.approx(data.mean())
        assert median_of_means(np.full(10, 4.0), 3) == 4.0
        # blocks of two, leftover dropped: means 3, 5 -> median 4
        assert median_of_means(data, 2) == pytest.approx(4.0)
        with pytest.raises(ValueError):
            median_of_means(data, 6)
        assert mom_blocks(0.01) == math.ceil(8 * math.log(100))

    def test_covariance(self):
        x = np.array([[1.0, 2.0]])
        assert np.allclose(sample_covariance(x), np.outer(x[0], x[0]))
        assert np.array_equal(zero_covariance(3), np.zeros((3, 3)))

    @pytest.mark.slow
    def test_sample_covariance_concentrates(self, rng):
        errs = [np.linalg.norm(sample_covariance(rng.standard_normal((10_000, 3))) - np.eye(3), 2) for _ in range(200)]
        assert np.mean(np.array(errs) < 0.1) >= 0.99


class TestIsotonic:
    def test_examples(self):
        y = np.array([0.1, 0.4, 0.9])
        assert np.array_equal(isotonic_clipped(y), y)
        assert np.allclose(pava([3.0, 1.0, 2.0]), [2.0, 2.0, 2.0])
        assert np.allclose(isotonic_clipped([-1.0, 2.0]), [0.0, 1.0])

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_matches_grid_oracle(self, values):
        y = np.array(values)
        fit = pava(y)
        oracle = grid_isotonic(y)
        assert np.abs(fit - oracle).max() <= 2e-3

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_output_monotone_and_clipped(self, values):
        out = isotonic_clipped(np.array(values))
        assert (np.diff(out) >= -1e-12).all()
        assert out.min() >= 0 and out.max() <= 1

    def test_weighted(self):
        assert np.allclose(pava([2.0, 0.0], weights=[3.0, 1.0]), [1.5, 1.5])


class TestSortedL1:
    def test_examples(self):
        z = np.array([1.5, -0.3, 2.0])
        assert np.allclose(prox_sorted_l1(z, np.zeros(3)), z)
        assert np.allclose(prox_sorted_l1(np.zeros(3), [3.0, 2.0, 1.0]), 0.0)
        with pytest.raises(ValueError):
            prox_sorted_l1(z, [1.0, 2.0, 3.0])

    @given(st.floats(-5, 5), st.floats(0, 3))
    @settings(max_examples=100, deadline=None)
    def test_scalar_soft_threshold(self, z, lam):
        out = prox_sorted_l1([z], [lam])[0]
        grid = np.linspace(-6, 6, 120_001)
        oracle = grid[np.argmin(0.5 * (grid - z) ** 2 + lam * np.abs(grid))]
        assert out == pytest.approx(np.sign(z) * max(abs(z) - lam, 0.0), abs=1e-12)
        assert abs(out - oracle) <= 1e-4

    def test_local_optimality(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 7))
            z = rng.normal(scale=2.0, size=d)
            lam = np.sort(rng.uniform(0, 1.5, size=d))[::-1]
            x = prox_sorted_l1(z, lam)

            def obj(v):
                return 0.5 * np.sum((v - z) ** 2) + sorted_l1_norm(v, lam)

            base = obj(x)
            for _ in range(50):
                e = rng.normal(size=d) * 1e-4
                assert base <= obj(x + e) + 1e-12


class TestSlope:
    def test_zero_response(self, rng):
        X = rng.standard_normal((30, 5))
        assert np.allclose(slope(X, np.zeros(30), 1.0), 0.0)

    def test_one_dimensional_closed_form(self, rng):
        n = 50
        q, _ = np.linalg.qr(rng.standard_normal((n, 1)))
        X = q * math.sqrt(n)
        y = rng.standard_normal(n) + 2 * X[:, 0]
        lam = slope_weights(1, n, 1.0)[0]
        z = X[:, 0] @ y / n
        assert slope(X, y, 1.0)[0] == pytest.approx(np.sign(z) * max(abs(z) - lam, 0), abs=1e-6)

    def test_noiseless_recovery_and_monotone_objective(self, rng):
        n, d = 200, 10
        X = rng.standard_normal((n, d))
        theta = np.zeros(d)
        theta[:3] = [1.0, -2.0, 0.5]
        fit = slope(X, X @ theta, 1e-8, return_info=True)
        assert fit.converged
        assert np.abs(fit.coef - theta).max() < 1e-4
        assert all(a >= b - 1e-12 for a, b in zip(fit.objective, fit.objective[1:]))

    def test_weights(self):
        w = slope_weights(4, 100, 2.0)
        assert w[0] == pytest.approx(6 * 2.0 * math.sqrt(math.log(8) / 100))
        assert (np.diff(w) <= 0).all()


class TestKDE:
    def test_kde_point_examples(self):
        assert kde_point(np.zeros(5), 0.0, 0.5) == pytest.approx(EPANECHNIKOV(0.0) / 0.5)
        assert kde_point([1.3], 1.0, 0.3) == pytest.approx(EPANECHNIKOV(1.0) / 0.3)
        with pytest.raises(ValueError):
            kde_point([0.0], 0.0, 0.0)

    def test_lepski_tiny_sample_is_zero(self):
        consts = lepski_constants(1.0)
        n = max(1, int(3 * math.log(2) / consts.c))
        assert lepski_kde(np.zeros(n), 0.0, 1.0, 1.0) == 0.0

    def test_lepski_range(self, rng):
        data = rng.triangular(-1, 0, 1, 2000)
        est, info = lepski_kde(data, 0.0, 1.0, 1.0, return_info=True)
        assert 0 <= est <= lepski_constants(1.0).C1
        assert info["k_hat"] >= 1
        with pytest.raises(ValueError):
            lepski_kde(data, 0.0, 2.5, 1.0)

    def test_lepski_close_to_truth(self, rng):
        data = rng.triangular(-1, 0, 1, 16384)
        assert abs(lepski_kde(data, 0.0, 1.0, 1.0) - 1.0) < 0.2


class TestMedianOfThree:
    def test_examples(self):
        loss = LossModel("euclidean")
        v = np.array([1.0, 2.0])
        assert np.array_equal(median_of_three([v, v, v], 0.1, loss), v)
        a, b, c = np.array([0.0]), np.array([0.05]), np.array([10.0])
        assert median_of_three([c, a, b], 0.1, loss) is a
        far = [np.array([0.0]), np.array([5.0]), np.array([10.0])]
        fb = np.array([-1.0])
        assert median_of_three(far, 1.0, loss, fallback=fb) is fb
        assert median_of_three(far, 1.0, loss) is far[0]

    def test_guarantee(self, rng):
        loss = LossModel("euclidean", IDENTITY, 1.0)
        for _ in range(1000):
            theta = rng.normal(size=3)
            r = rng.uniform(0.1, 2.0)
            close = [theta + rng.normal(size=3) * r / 10 for _ in range(2)]
            close = [theta + (c - theta) * min(1.0, 0.999 * r / max(np.linalg.norm(c - theta), 1e-300)) for c in close]
            cands = close + [theta + rng.normal(size=3) * 10]
            order = rng.permutation(3)
            out = median_of_three([cands[i] for i in order], r, loss)
            assert loss(out, theta) <= 2 * r + 1e-12


class TestClippedSGD:
    def test_zero_subgradient_stays(self):
        out = clipped_sgd(lambda x, t: np.zeros(2), 20, 1.0, 0.1, 1.0, x0=[0.3, 0.2], dim=2)
        assert np.allclose(out, [0.3, 0.2])

    def test_deterministic_descent(self):
        R = 1.0
        step = 1e-3
        last = []
        clipped_sgd(lambda x, t: np.sign(x - R), 5000, R, step, 10.0, callback=last.append)
        assert abs(last[-1][0] - R) <= 2 * step

    @given(st.integers(1, 60), st.floats(0.1, 3.0), st.floats(0.01, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_iterates_stay_in_ball(self, T, R, step):
        rng = np.random.default_rng(T)
        seen = []
        clipped_sgd(lambda x, t: rng.standard_cauchy(3) * 50, T, R, step, 5.0, dim=3, callback=seen.append)
        assert max(np.linalg.norm(x) for x in seen) <= R * (1 + 1e-12)

    def test_default_schedule(self):
        step, tau = default_schedule(500, 2.0, 3.0, 0.05)
        assert step == pytest.approx(3.0 / (2.0 * math.sqrt(500)))
        assert tau == pytest.approx(2.0 * math.sqrt(500 / math.log(20)))
        assert default_schedule(1, 1.0, 1.0, 1e-9)[1] == 1.0


class TestLikelihoodRatio:
    def test_equal_laws(self):
        P = DiscreteDist.bernoulli(0.3)
        rule = lr_two_point(P, P, 2, 0.0, 1.0)
        assert rule.bayes_error() == pytest.approx(0.5)

    def test_single_bit(self):
        rule = lr_two_point(DiscreteDist.bernoulli(0.1), DiscreteDist.bernoulli(0.9), 1, 0.0, 1.0)
        assert rule.worst_error() == pytest.approx(0.1)
        assert rule(np.array([1.0])) == 1.0 and rule(np.array([0.0])) == 0.0

    @given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.integers(1, 4))
    @settings(max_examples=100, deadline=None)
    def test_error_matches_tv(self, a, b, n):
        P1, P2 = DiscreteDist.bernoulli(a), DiscreteDist.bernoulli(b)
        rule = lr_two_point(P1, P2, n, 0.0, 1.0)
        assert rule.bayes_error() == pytest.approx((1 - tv_product_exact(P1, P2, n)) / 2, abs=1e-12)


class TestRegistry:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            EstimatorSpec("tukey_median")

    def test_missing_parameters(self):
        with pytest.raises(ValueError):
            build_estimator(EstimatorSpec("slope"))

    def test_median_of_three_aggregate(self, rng):
        spec = EstimatorSpec("median_of_three", {"base": "sample_mean", "r": 0.5, "loss": LossModel("euclidean")})
        est = build_estimator(spec)
        data = rng.normal(size=(300, 2))
        assert np.linalg.norm(est(data)) < 0.5

    def test_mom_from_delta(self):
        est = build_estimator(EstimatorSpec("median_of_means"), {"delta": 0.01})
        assert est(np.arange(100.0)) == median_of_means(np.arange(100.0), 37)

    def test_label(self):
        assert EstimatorSpec("median_of_means", {"k": 5}).label() == "median_of_means(k=5)"

    @pytest.mark.slow
    def test_sample_mean_gaussian_tail(self, rng):
        Sigma = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
        n, reps = 200, 20_000
        # the sample mean is exactly N(theta, Sigma/n)
        draws = rng.standard_normal((reps, 5)) * np.sqrt(np.diag(Sigma) / n)
        err = np.sort((draws**2).sum(1))
        q = err[math.ceil(0.95 * reps) - 1]
        assert q <= 2 * 15 / n + 4 * 5 * math.log(20) / n
        assert stats.chi2.ppf(0.95, 5) / n <= 2 * 15 / n + 4 * 5 * math.log(20) / n


def test_median_of_three_midpoint_when_no_candidate_qualifies():
    loss = LossModel("euclidean", IDENTITY, 1.0)
    a, b, c = np.array([-0.9]), np.array([0.9]), np.array([50.0])
    out = median_of_three([c, a, b], 1.0, loss)
    assert np.allclose(out, [0.0])
