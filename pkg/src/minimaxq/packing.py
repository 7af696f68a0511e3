"""Greedy Hamming-cube packings.

Both constructions scan candidate words in lexicographic order and keep a word
whenever it is far enough from every word kept so far, so repeated calls return
identical packings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb


@dataclass
class HammingPacking:
    """Binary words with pairwise Hamming distance strictly above ``min_distance``.

    ``complete`` is False when the scan stopped early at ``max_words``.
    """

    dimension: int
    words: np.ndarray
    min_distance: float
    complete: bool = True

    def __len__(self):
        return self.words.shape[0]

    @property
    def size(self):
        return self.words.shape[0]

    def pairwise_distances(self):
        w = self.words.astype(np.int64)
        return w.shape[1] - (w @ w.T + (1 - w) @ (1 - w).T)

    def to_lines(self):
        return ["".join("1" if b else "0" for b in row) for row in self.words]


def sparse_packing_log_bound(d, s):
    """Guaranteed log-cardinality (3s/4) log(d/(4s)) of the sparse packing."""
    return 0.75 * s * math.log(d / (4.0 * s))


def cube_packing_log_bound(m):
    """Guaranteed log-cardinality m/8 of the cube packing (m >= 20)."""
    return m / 8.0


def volume_bound(m, radius):
    """Greedy volume bound 2^m / sum_{l <= radius} C(m, l)."""
    ball = sum(comb(m, ell, exact=True) for ell in range(int(math.floor(radius)) + 1))
    return 2**m / ball


def _greedy(candidate_chunks, d, min_distance, max_words):
    """Lexicographic greedy over chunks of boolean candidate rows."""
    kept = np.zeros((0, d), dtype=np.uint8)
    complete = True
    for chunk in candidate_chunks:
        chunk = np.asarray(chunk, dtype=np.uint8)
        if kept.shape[0]:
            # distances to kept words via inner products: d_H = |a| + |b| - 2<a, b>
            dist = chunk.sum(1)[:, None] + kept.sum(1)[None, :] - 2 * (chunk.astype(np.int32) @ kept.T.astype(np.int32))
            chunk = chunk[(dist > min_distance).all(axis=1)]
        # survivors may still conflict with each other, resolve in order
        fresh = []
        for row in chunk:
            if fresh:
                prev = np.asarray(fresh)
                if not (np.count_nonzero(prev != row, axis=1) > min_distance).all():
                    continue
            fresh.append(row)
            if max_words is not None and kept.shape[0] + len(fresh) >= max_words:
                break
        if fresh:
            kept = np.vstack([kept, np.asarray(fresh, dtype=np.uint8)])
        if max_words is not None and kept.shape[0] >= max_words:
            complete = False
            break
    return kept, complete


def _chunk_size(d, kept_hint=4096):
    return max(64, int(2e7 // (max(d, 1) * kept_hint)))


def gv_sparse_packing(d, s, max_words=None):
    """Greedy packing of the weight-``s`` words of {0,1}^d.

    Parameters
    ----------
    d, s : int
        Ambient dimension and sparsity, ``1 <= s <= d``.
    max_words : int, optional
        Stop once this many words are kept.  The full greedy scan visits all
        C(d, s) words, which is only practical for small instances.

    Returns
    -------
    packing : HammingPacking
        Words with pairwise Hamming distance > s/4.
    vectors : ndarray
        The words scaled by 1/sqrt(s); distinct rows are more than 1/2 apart.
    """
    d, s = int(d), int(s)
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    min_distance = s / 4.0
    size = _chunk_size(d)

    def chunks():
        combos = itertools.combinations(range(d), s)
        while True:
            block = list(itertools.islice(combos, size))
            if not block:
                return
            rows = np.zeros((len(block), d), dtype=np.uint8)
            rows[np.repeat(np.arange(len(block)), s), np.asarray(block).ravel()] = 1
            yield rows

    if s < 8:
        # distinct words of equal weight are at even distance >= 2 > s/4
        total = comb(d, s, exact=True)
        take = total if max_words is None else min(total, int(max_words))
        block = list(itertools.islice(itertools.combinations(range(d), s), take))
        words = np.zeros((take, d), dtype=np.uint8)
        words[np.repeat(np.arange(take), s), np.asarray(block, dtype=np.int64).ravel()] = 1
        complete = take == total
    else:
        words, complete = _greedy(chunks(), d, min_distance, max_words)
    packing = HammingPacking(d, words, min_distance, complete)
    return packing, words / math.sqrt(s)


def gv_cube_packing(m, max_words=None, exhaustive=False):
    """Greedy packing of the full cube {0,1}^m with pairwise distance > m/4.

    Words are scanned in increasing binary order (most significant bit first).
    For ``m >= 20`` the scan stops by default as soon as ``ceil(exp(m/8))``
    words are kept, which is the cardinality the covariance construction
    needs; a full scan of 2^m words is only affordable for small ``m``.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    if max_words is None and not exhaustive and m >= 20:
        max_words = math.ceil(math.exp(cube_packing_log_bound(m)))
    if m > 40 and max_words is None:
        raise ValueError("a full scan of {0,1}^m is only feasible for m <= 40")
    min_distance = m / 4.0
    size = _chunk_size(m, kept_hint=256)
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint64)

    def chunks():
        start = 0
        top = 1 << m
        while start < top:
            stop = min(top, start + size)
            ints = np.arange(start, stop, dtype=np.uint64)
            yield ((ints[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
            start = stop

    words, complete = _greedy(chunks(), m, min_distance, max_words)
    return HammingPacking(m, words, min_distance, complete)
