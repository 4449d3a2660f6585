"""NumPy fallback for the segmentation kernels.

Same contract as the compiled module `_speed`: all functions take the
(n+1, d) float64 prefix-sum matrix of the sentence vectors, where row i is
the componentwise sum of vectors[:i].  Segment [a, b) scores as
||prefix[b] - prefix[a]||.
"""

from __future__ import annotations

import numpy as np


def seg_norm(prefix: np.ndarray, start: int, stop: int) -> float:
    """Euclidean norm of the vector sum over [start, stop)."""
    return float(np.linalg.norm(prefix[stop] - prefix[start]))


def best_split(prefix: np.ndarray, start: int, stop: int, min_len: int) -> tuple[int, float]:
    """Best interior split of segment [start, stop).

    Returns (t, left_score + right_score) maximized over
    t in [start+min_len, stop-min_len]; ties keep the smallest t.
    Returns (-1, -inf) when no split satisfies min_len.
    """
    lo = start + min_len
    hi = stop - min_len
    if lo > hi:
        return -1, float("-inf")
    mids = prefix[lo : hi + 1]
    combined = np.linalg.norm(mids - prefix[start], axis=1)
    combined = combined + np.linalg.norm(prefix[stop] - mids, axis=1)
    offset = int(np.argmax(combined))  # first max == smallest t
    return lo + offset, float(combined[offset])


def _pairwise_norms(prefix: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", prefix, prefix)
    gram = prefix @ prefix.T
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def exact_dp(prefix: np.ndarray, k: int, min_len: int) -> tuple[float, list[int]]:
    """Optimal split of n items into k contiguous segments of >= min_len.

    Maximizes the summed segment norms by dynamic programming over the
    prefix sums.  Returns (objective, interior boundaries b_1 < ... <
    b_{k-1}); segment m covers [b_m, b_{m+1}) with b_0 = 0, b_k = n.
    Ties keep the smallest boundary at each decision.
    """
    n = prefix.shape[0] - 1
    if k < 1:
        raise ValueError(f"segment count must be >= 1, got {k}")
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    if k * min_len > n:
        raise ValueError(f"cannot cut {n} items into {k} segments of >= {min_len}")

    dist = _pairwise_norms(prefix)
    neg = float("-inf")
    value = np.full((k + 1, n + 1), neg)
    choice = np.zeros((k + 1, n + 1), dtype=np.intp)
    value[0, 0] = 0.0
    for kk in range(1, k + 1):
        j_lo = (kk - 1) * min_len
        for i in range(kk * min_len, n + 1):
            j_hi = i - min_len
            cand = value[kk - 1, j_lo : j_hi + 1] + dist[j_lo : j_hi + 1, i]
            arg = int(np.argmax(cand))
            value[kk, i] = cand[arg]
            choice[kk, i] = j_lo + arg

    bounds = []
    i = n
    for kk in range(k, 0, -1):
        i = int(choice[kk, i])
        bounds.append(i)
    bounds.reverse()
    assert bounds[0] == 0
    return float(value[k, n]), bounds[1:]
