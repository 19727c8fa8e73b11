"""numba-compiled twins of ``_kernels_numpy`` (same signatures, same results)."""

import numpy as np
from numba import njit


@njit(cache=True)
def subset_probabilities(x):
    n = x.shape[0]
    probs = np.empty(1 << n)
    probs[0] = 1.0
    size = 1
    for e in range(n):
        xe = x[e]
        for s in range(size):
            p = probs[s]
            probs[s + size] = p * xe
            probs[s] = p * (1.0 - xe)
        size *= 2
    return probs


@njit(cache=True)
def extension_gradient(table, probs, n):
    grad = np.zeros(n)
    for e in range(n):
        bit = np.int64(1) << e
        acc = 0.0
        for s in range(table.shape[0]):
            acc += probs[s] * (table[s | bit] - table[s & ~bit])
        grad[e] = acc
    return grad


@njit(cache=True)
def extension_gradients_stacked(tables, probs, n):
    clients = tables.shape[0]
    grads = np.zeros((clients, n))
    for i in range(clients):
        for e in range(n):
            bit = np.int64(1) << e
            acc = 0.0
            for s in range(tables.shape[1]):
                acc += probs[s] * (tables[i, s | bit] - tables[i, s & ~bit])
            grads[i, e] = acc
    return grads


@njit(cache=True)
def sampled_gradient(table, masks, n):
    grad = np.zeros(n)
    m = masks.shape[0]
    for e in range(n):
        bit = np.int64(1) << e
        acc = 0.0
        for k in range(m):
            acc += table[masks[k] | bit] - table[masks[k] & ~bit]
        grad[e] = acc / m
    return grad


@njit(cache=True)
def facility_table(row):
    n = row.shape[0]
    table = np.zeros(1 << n)
    for e in range(n):
        half = 1 << e
        for s in range(half):
            v = table[s]
            table[s + half] = v if v > row[e] else row[e]
    return table


@njit(cache=True)
def masks_from_rows(rows):
    m, n = rows.shape
    out = np.zeros(m, dtype=np.int64)
    for k in range(m):
        acc = np.int64(0)
        for e in range(n):
            if rows[k, e]:
                acc |= np.int64(1) << e
        out[k] = acc
    return out
