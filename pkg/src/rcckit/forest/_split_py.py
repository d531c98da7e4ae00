"""Pure-numpy split search, the fallback for the compiled kernel.

Must stay bit-identical to _split_cy: same candidate positions, the same
integer class counts, the same float expression for the score, and the same
tie-breaking (ascending feature index, then ascending threshold).
"""

import numpy as np


def best_split(X, y, idx, feats, n_classes, min_leaf):
    """Best Gini split of node rows `idx` over candidate columns `feats`.

    Maximizes sum_c nl_c^2 / nl + sum_c nr_c^2 / nr over boundaries between
    distinct adjacent sorted values (equivalent to minimizing the weighted
    Gini impurity of the children). Returns (feature, threshold), with
    feature -1 when no candidate column admits a valid boundary.
    """
    n = idx.shape[0]
    sub = X[np.ix_(idx, feats)]
    order = np.argsort(sub, axis=0, kind="stable")
    sv = np.take_along_axis(sub, order, axis=0)
    sy = y[idx][order]

    onehot = sy[:, :, None] == np.arange(n_classes)[None, None, :]
    cum = np.cumsum(onehot, axis=0, dtype=np.int64)
    left = cum[:-1]
    total = cum[-1]
    right = total[None, :, :] - left

    nl = np.arange(1, n, dtype=np.int64)[:, None]
    nr = n - nl
    score = (left * left).sum(axis=2) / nl + (right * right).sum(axis=2) / nr
    valid = (sv[:-1] < sv[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    score = np.where(valid, score, -np.inf)

    col_best = score.max(axis=0)
    col_pos = score.argmax(axis=0)

    best_feat = -1
    best_thr = 0.0
    best_score = -np.inf
    for j in range(feats.shape[0]):
        if col_best[j] > best_score:
            best_score = float(col_best[j])
            i = int(col_pos[j])
            lo = float(sv[i, j])
            hi = float(sv[i + 1, j])
            thr = lo + (hi - lo) / 2.0
            if thr >= hi:
                thr = lo
            best_feat = int(feats[j])
            best_thr = thr
    return best_feat, best_thr
