"""Likelihood-ratio test between two finitely supported laws."""

import itertools

import numpy as np

from ..divergences import PRODUCT_CAPACITY, _atom_key, aligned_probs
from ..exceptions import CapacityError


class LikelihoodRatioRule:
    """Deterministic estimator choosing theta1 iff the likelihood ratio favours P1.

    Outcomes with equal likelihoods are split between the two answers so that
    the larger of the two error probabilities is as small as possible; this
    leaves the Bayes error unchanged.  ``table`` maps each outcome sequence (a tuple of
    support indices) to 0 (theta1) or 1 (theta2).
    """

    def __init__(self, P1, P2, n, theta1, theta2):
        pp, qq = aligned_probs(P1, P2)
        if pp.size**n > PRODUCT_CAPACITY:
            raise CapacityError("outcome space too large to enumerate")
        self.support = {}
        for key in P1._keys + P2._keys:
            self.support.setdefault(key, len(self.support))
        self.n = n
        self.theta = (theta1, theta2)
        self.p1, self.p2 = pp, qq
        outcomes = list(itertools.product(range(pp.size), repeat=n))
        self.outcomes = outcomes
        lik1 = np.array([np.prod(pp[list(o)]) for o in outcomes])
        lik2 = np.array([np.prod(qq[list(o)]) for o in outcomes])
        self.lik = (lik1, lik2)
        self.choice = (lik2 > lik1).astype(int)
        ties = np.flatnonzero(np.isclose(lik1, lik2, rtol=1e-12, atol=0.0) & (lik1 > 0))
        if ties.size:
            self.choice[ties] = _balance_ties(lik1, lik2, self.choice, ties)
        self.table = dict(zip(outcomes, self.choice.tolist()))

    def __call__(self, sample):
        sample = np.asarray(sample, dtype=float)
        if sample.ndim == 1:
            sample = sample[:, None]
        idx = tuple(self.support[_atom_key(x)] for x in sample)
        return self.theta[self.table[idx]]

    def error_probabilities(self):
        """P1(choose theta2) and P2(choose theta1)."""
        lik1, lik2 = self.lik
        return float(lik1[self.choice == 1].sum()), float(lik2[self.choice == 0].sum())

    def bayes_error(self):
        e1, e2 = self.error_probabilities()
        return 0.5 * (e1 + e2)

    def worst_error(self):
        return max(self.error_probabilities())


_TIE_ENUMERATION_LIMIT = 16


def _balance_ties(lik1, lik2, choice, ties):
    """Assignment of tied outcomes minimising max(P1 error, P2 error)."""
    free = choice.copy()
    free[ties] = 0
    base1 = lik1[free == 1].sum()
    base2 = lik2[(free == 0)].sum() - lik2[ties].sum()
    w = lik1[ties]
    if ties.size <= _TIE_ENUMERATION_LIMIT:
        masks = (np.arange(2**ties.size)[:, None] >> np.arange(ties.size)) & 1
        e1 = base1 + masks @ w
        e2 = base2 + (1 - masks) @ w
        return masks[int(np.argmin(np.maximum(e1, e2)))]
    # greedy: heaviest ties first, each to the side with the smaller error
    out = np.zeros(ties.size, dtype=int)
    e1, e2 = base1, base2
    for i in np.argsort(-w, kind="stable"):
        if e1 <= e2:
            out[i], e1 = 1, e1 + w[i]
        else:
            e2 += w[i]
    return out


def lr_two_point(P1, P2, n, theta1, theta2):
    return LikelihoodRatioRule(P1, P2, n, theta1, theta2)
