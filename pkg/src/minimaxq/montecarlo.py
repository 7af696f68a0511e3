"""Empirical quantiles, sandwich checks, exact minimax values on tiny models and rate fits."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimators import EstimatorSpec, build_estimator
from .exceptions import CapacityError

DKW_ALPHA = 0.01
MAX_ESTIMATOR_TABLES = 10**7
_TABLE_CHUNK = 50_000
_PROB_TOL = 1e-12


@dataclass
class QuantileEstimate:
    """Empirical (1 - delta)-quantile with a DKW band at confidence 1 - DKW_ALPHA."""

    delta: float
    value: float
    reps: int
    dkw_lo: float
    dkw_hi: float


def _order_index(frac, N):
    """1-based order statistic index ceil(frac N), clamped to [1, N]."""
    # guard against ceil(0.9 * 10) landing on 10.000000000000002
    idx = math.ceil(round(frac * N, 9))
    return min(max(idx, 1), N)


def empirical_quantile(losses, delta, alpha=DKW_ALPHA):
    """Order statistic of rank ceil((1 - delta) N) and its DKW band.

    Parameters
    ----------
    losses : array_like
        Replicated loss values.
    delta : float
        Tail level in (0, 1].
    alpha : float
        Miscoverage of the band; the half-width in probability is
        sqrt(log(2 / alpha) / (2 N)).
    """
    x = np.sort(np.asarray(losses, dtype=float).ravel())
    N = x.size
    if N == 0:
        raise ValueError("losses must be nonempty")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    eta = math.sqrt(math.log(2 / alpha) / (2 * N))
    value = x[_order_index(1 - delta, N) - 1]
    lo = x[_order_index(1 - delta - eta, N) - 1]
    hi = x[_order_index(1 - delta + eta, N) - 1]
    return QuantileEstimate(float(delta), float(value), N, float(lo), float(hi))


@dataclass
class ExperimentResult:
    problem: str
    hypothesis: int
    estimator: str
    n: int
    losses: np.ndarray
    quantiles: dict
    seed: int

    def quantile(self, delta):
        return self.quantiles[delta]


def replication_rng(master_seed, hypothesis, rep):
    """Independent stream for one replication, fixed by (seed, hypothesis, replication)."""
    return np.random.default_rng([int(master_seed), int(hypothesis), int(rep)])


def _resolve_estimator(problem, estimator):
    if callable(estimator) and not isinstance(estimator, EstimatorSpec):
        return estimator, getattr(estimator, "__name__", "custom")
    spec = estimator or problem.default_estimator
    if isinstance(spec, str):
        spec = EstimatorSpec(spec)
    try:
        return build_estimator(spec, problem.context), spec.label()
    except (KeyError, TypeError) as exc:
        raise ValueError(f"estimator {spec.kind!r} does not fit problem {problem.name!r}: {exc}") from exc


def run_experiment(problem, estimator=None, n=None, reps=1000, deltas=(0.05,), master_seed=0, threads=1, hypotheses=None):
    """Replicate estimation on each simulation hypothesis of ``problem``.

    Parameters
    ----------
    problem : ProblemInstance
    estimator : EstimatorSpec, str or callable, optional
        Defaults to the problem's own estimator.
    n : int, optional
        Sample size; taken from the problem parameters (``n`` or ``T``) when omitted.
    reps : int
    deltas : sequence of float
    master_seed : int
    threads : int
        Worker threads.  Results do not depend on it.
    hypotheses : sequence of int, optional
        Defaults to ``problem.sim_hypotheses``.

    Returns
    -------
    list of ExperimentResult, one per hypothesis.
    """
    reps = int(reps)
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if n is None:
        n = problem.params.get("n", problem.params.get("T"))
        if n is None:
            raise ValueError("sample size not given and not fixed by the problem")
    n = int(n)
    est, label = _resolve_estimator(problem, estimator)
    hyps = list(problem.sim_hypotheses if hypotheses is None else hypotheses)

    results = []
    for h in hyps:

        def one(r, h=h):
            data = problem.sample(h, n, replication_rng(master_seed, h, r))
            return problem.evaluate_loss(est(data), h)

        try:
            if threads > 1:
                with ThreadPoolExecutor(max_workers=int(threads)) as pool:
                    losses = np.fromiter(pool.map(one, range(reps)), dtype=float, count=reps)
            else:
                losses = np.fromiter((one(r) for r in range(reps)), dtype=float, count=reps)
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"estimator {label!r} does not fit problem {problem.name!r}: {exc}") from exc
        quantiles = {float(d): empirical_quantile(losses, d) for d in deltas}
        results.append(ExperimentResult(problem.name, h, label, n, losses, quantiles, int(master_seed)))
    return results


@dataclass
class Verdict:
    """Outcome of lb <= quantile <= ub checked against the DKW band."""

    passed: bool
    lower_ok: bool
    upper_ok: bool
    lower_margin: float
    upper_margin: Optional[float] = None
    detail: dict = field(default_factory=dict)


def sandwich_check(lb, emp, ub=None):
    """Pass iff lb <= emp.dkw_hi and, when ub is given, emp.dkw_lo <= ub.

    Margins are dkw_hi - lb and ub - dkw_lo, so negative means a violation.
    """
    lb = 0.0 if lb is None else float(lb)
    lower_margin = emp.dkw_hi - lb
    lower_ok = lower_margin >= 0
    upper_margin = None if ub is None else float(ub) - emp.dkw_lo
    upper_ok = upper_margin is None or upper_margin >= 0
    return Verdict(lower_ok and upper_ok, lower_ok, upper_ok, lower_margin, upper_margin, {"lb": lb, "ub": ub, "emp": emp.value})


def _product_law(P, n):
    """Outcomes and probabilities of n i.i.d. draws from a discrete law."""
    idx = list(itertools.product(range(len(P)), repeat=n))
    probs = np.array([np.prod(P.probs[list(t)]) for t in idx])
    return idx, probs


def brute_force_minimax(P1, P2, n, theta_grid, loss, delta, theta1=None, theta2=None):
    """Exact minimax and lower minimax quantiles over deterministic estimators.

    Every map from the outcomes of n draws to ``theta_grid`` is enumerated.
    The two hypotheses are (P1, theta1) and (P2, theta2), by default the first
    two grid points; the laws must share their support.

    Returns
    -------
    (M, M_minus) : tuple of float
    """
    if not 1 <= n <= 4:
        raise ValueError("n must lie in 1..4")
    grid = list(theta_grid)
    theta1 = grid[0] if theta1 is None else theta1
    theta2 = grid[1] if theta2 is None else theta2
    if len(P1) != len(P2) or not np.allclose(P1.atoms, P2.atoms):
        raise ValueError("P1 and P2 must share their support points")
    outcomes, p1 = _product_law(P1, n)
    _, p2 = _product_law(P2, n)
    X, G = len(outcomes), len(grid)
    total = G**X
    if total > MAX_ESTIMATOR_TABLES:
        raise CapacityError(f"{total} estimator tables exceed the budget of {MAX_ESTIMATOR_TABLES}")

    # loss of grid point k under hypothesis j, and the candidate thresholds
    losses = np.array([[loss(g, t) for g in grid] for t in (theta1, theta2)])
    cand = np.unique(np.concatenate([[0.0], losses.ravel()]))
    exceed = losses[:, :, None] > cand[None, None, :]  # (2, G, R)
    probs = np.stack([p1, p2])  # (2, X)

    best_M = math.inf
    best_minus = np.full(cand.size, math.inf)
    powers = G ** np.arange(X)
    for start in range(0, total, _TABLE_CHUNK):
        codes = np.arange(start, min(total, start + _TABLE_CHUNK))
        tables = (codes[:, None] // powers[None, :]) % G  # (B, X)
        # P_j(L > r) for every table, hypothesis and threshold
        tail = np.stack([(probs[j][None, :, None] * exceed[j][tables]).sum(axis=1) for j in range(2)], axis=1)
        worst = tail.max(axis=1)  # (B, R)
        best_minus = np.minimum(best_minus, worst.min(axis=0))
        ok = tail <= delta + _PROB_TOL
        q_idx = ok.argmax(axis=2)  # first threshold meeting the level; the top one always does
        best_M = min(best_M, float(cand[q_idx.max(axis=1)].min()))
    M_minus = float(cand[np.argmax(best_minus <= delta + _PROB_TOL)])
    return best_M, M_minus


def rate_fit(points):
    """Least-squares slope of log(quantile) against log(n).

    Parameters
    ----------
    points : sequence of (n, quantile) pairs, at least three.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (n, value) points")
    if (pts <= 0).any():
        raise ValueError("sample sizes and values must be positive")
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)
