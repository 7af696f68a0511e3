"""Best-two-of-three selection used to boost confidence levels."""

import numpy as np


def median_of_three(candidates, r, loss, fallback=None):
    """A point with loss below ``r`` to at least two of three candidates.

    The first candidate that qualifies is returned (a candidate counts itself).
    Failing that, the midpoint of the first pair (in index order) whose
    midpoint qualifies is returned: two candidates within ``r`` of the truth
    need not be within ``r`` of each other, but their midpoint is within ``r``
    of both for every norm-based loss.  If two of the three candidates have
    loss below ``r`` to the truth, the output has loss at most 2 A r to the
    truth, where A is the quasi-triangle constant of ``loss``.  When nothing
    qualifies the ``fallback`` (default: the first candidate) is returned.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if len(candidates) != 3:
        raise ValueError("exactly three candidates are needed")
    for cand in candidates:
        close = sum(1 for other in candidates if loss(cand, other) < r)
        if close >= 2:
            return cand
    for i, j in ((0, 1), (0, 2), (1, 2)):
        mid = (np.asarray(candidates[i], dtype=float) + np.asarray(candidates[j], dtype=float)) / 2
        if loss(mid, candidates[i]) < r and loss(mid, candidates[j]) < r:
            return mid
    return candidates[0] if fallback is None else fallback
