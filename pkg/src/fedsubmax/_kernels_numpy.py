"""Pure-numpy implementations of the enumeration and sampling kernels.

Every function here has a twin with the same signature in
``_kernels_numba``. Subsets are int64 bitmasks (bit ``e`` set iff element
``e`` is present); tables are indexed by mask.
"""

import numpy as np


def subset_probabilities(x):
    """P[R = S] for every mask S when R includes e independently w.p. x[e]."""
    probs = np.ones(1)
    for xe in x:
        probs = np.concatenate((probs * (1.0 - xe), probs * xe))
    return probs


def extension_gradient(table, probs, n):
    grad = np.empty(n)
    masks = np.arange(table.shape[0], dtype=np.int64)
    for e in range(n):
        bit = np.int64(1) << e
        grad[e] = probs @ (table[masks | bit] - table[masks & ~bit])
    return grad


def extension_gradients_stacked(tables, probs, n):
    grads = np.empty((tables.shape[0], n))
    masks = np.arange(tables.shape[1], dtype=np.int64)
    for e in range(n):
        bit = np.int64(1) << e
        grads[:, e] = (tables[:, masks | bit] - tables[:, masks & ~bit]) @ probs
    return grads


def sampled_gradient(table, masks, n):
    bits = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    hi = table[masks[:, None] | bits]
    lo = table[masks[:, None] & ~bits]
    return (hi - lo).mean(axis=0)


def facility_table(row):
    """max_{j in S} row[j] for every mask S, with the empty set mapped to 0."""
    n = row.shape[0]
    table = np.zeros(1 << n)
    for e in range(n):
        half = 1 << e
        table[half : 2 * half] = np.maximum(table[:half], row[e])
    return table


def masks_from_rows(rows):
    n = rows.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    return rows.astype(np.int64) @ weights
