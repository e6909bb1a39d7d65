"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np

N_ALPHA = 63


def bigram_counts(names, index):
    counts = np.zeros((N_ALPHA, N_ALPHA), dtype=np.int64)
    dropped = 0
    for name in names:
        raw = name.encode("utf-8")
        codes = [index[ch] for ch in raw]
        if any(c < 0 for c in codes):
            dropped += 1
            continue
        for a, b in zip(codes, codes[1:]):
            counts[a, b] += 1
    return counts, dropped


def name_likelihoods(names, log_prob, index, uniform):
    out = np.empty(len(names), dtype=np.float64)
    for k, name in enumerate(names):
        codes = [index[ch] for ch in name.encode("utf-8")]
        total = 0.0
        used = 0
        for a, b in zip(codes, codes[1:]):
            if a >= 0 and b >= 0:
                total += log_prob[a, b]
                used += 1
        out[k] = np.exp(total / used) if used else uniform
    return out


def midrank_auc(scores, positive):
    n = scores.shape[0]
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    # midrank of each distinct value: (first rank + last rank) / 2
    last = np.cumsum(counts)
    midranks = last - (counts - 1) / 2.0
    pos = positive.astype(bool)
    n_pos = float(pos.sum())
    n_neg = n - n_pos
    rank_sum = float(midranks[inverse[pos]].sum())
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)


def ad_midrank_sum(pooled, sample_id, sizes):
    n = pooled.shape[0]
    k = sizes.shape[0]
    values, starts, l = np.unique(pooled, return_index=True, return_counts=True)
    # per-sample counts at each distinct value, shape (k, L)
    group = np.repeat(np.arange(values.shape[0]), l)
    equal = np.zeros((k, values.shape[0]))
    np.add.at(equal, (sample_id, group), 1.0)
    below = np.cumsum(equal, axis=1) - equal
    n_below = np.cumsum(l) - l
    b = n_below + l / 2.0
    denom = b * (n - b) - n * l / 4.0
    m = below + equal / 2.0
    diff = n * m - sizes[:, None] * b[None, :]
    ok = denom > 0
    terms = np.zeros_like(diff)
    terms[:, ok] = l[ok] * diff[:, ok] ** 2 / denom[ok]
    return float((terms.sum(axis=1) / sizes).sum())
