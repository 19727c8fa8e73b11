"""Multilinear extension: exact enumeration and Monte-Carlo estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .objectives import ENUM_LIMIT, TABLE_LIMIT, ClientPopulation, SetFunction, all_masks, mask_to_list
from .streams import as_generator


def as_point(x, n: int | None = None, tol: float = 0.0) -> np.ndarray:
    """Validate a fractional point in [0, 1]^n and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        raise InputError(f"expected a point of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any(x < -tol) or np.any(x > 1.0 + tol):
        raise InputError("fractional point must lie in [0, 1]^n")
    return x


@dataclass(frozen=True)
class SampleBatch:
    """m subsets drawn independently according to a fractional point."""

    members: np.ndarray  # (m, n) bool, one subset per row
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.members.shape[0]

    @property
    def sets(self) -> list[list[int]]:
        return [np.flatnonzero(r).tolist() for r in self.members]


def sample_rows(x, m: int, rng) -> np.ndarray:
    x = as_point(x)
    rng = as_generator(rng)
    return rng.random((m, x.shape[0])) < x


def sample_set(x, rng) -> list[int]:
    """Random subset containing each e independently with probability x[e]."""
    return np.flatnonzero(sample_rows(x, 1, rng)[0]).tolist()


def exact_extension(oracle: SetFunction, x) -> float:
    """sum_S f(S) prod_{e in S} x_e prod_{e not in S} (1 - x_e), by enumeration (n <= 20)."""
    x = as_point(x, oracle.n)
    table = oracle.value_table()
    return float(kernels.subset_probabilities(x) @ table)


def exact_gradient(oracle: SetFunction, x) -> np.ndarray:
    """Partial derivatives E_R[f(R + e) - f(R - e)] with R ~ x, by enumeration."""
    x = as_point(x, oracle.n)
    table = oracle.value_table()
    return kernels.extension_gradient(table, kernels.subset_probabilities(x), oracle.n)


def client_gradients(pop: ClientPopulation, x) -> np.ndarray:
    """(N, n) matrix whose row i is the exact gradient of f_i's extension at x."""
    x = as_point(x, pop.n)
    if pop.n > ENUM_LIMIT:
        all_masks(pop.n)  # raises SizeError
    probs = kernels.subset_probabilities(x)
    return kernels.extension_gradients_stacked(pop.client_tables(), probs, pop.n)


def population_gradient(pop: ClientPopulation, x, weighted: bool = True) -> np.ndarray:
    return exact_gradient(pop.F(weighted), x)


def population_extension(pop: ClientPopulation, x, weighted: bool = True) -> float:
    return exact_extension(pop.F(weighted), x)


def _sampled_marginals(oracle: SetFunction, rows: np.ndarray) -> np.ndarray:
    n = oracle.n
    if n <= TABLE_LIMIT:
        masks = kernels.masks_from_rows(rows)
        return kernels.sampled_gradient(oracle.table, masks, n)
    m = rows.shape[0]
    grad = np.empty(n)
    for e in range(n):
        with_e = rows.copy()
        with_e[:, e] = True
        without_e = rows.copy()
        without_e[:, e] = False
        grad[e] = (oracle.values(with_e) - oracle.values(without_e)).sum() / m
    return grad


def estimate_gradient(oracle: SetFunction, x, m: int, rng) -> tuple[np.ndarray, SampleBatch]:
    """Monte-Carlo gradient from m sets R_k ~ x, reused across all coordinates.

    Every term f(R_k + e) - f(R_k - e) is a marginal of a monotone
    function, so the estimate is coordinate-wise nonnegative.
    """
    if m < 1:
        raise InputError("sample count m must be >= 1")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rows = sample_rows(as_point(x, oracle.n), m, as_generator(rng))
    grad = _sampled_marginals(oracle, rows)
    return grad, SampleBatch(rows, seed)


def estimate_extension(oracle: SetFunction, x, m: int, rng) -> float:
    rows = sample_rows(as_point(x, oracle.n), m, as_generator(rng))
    return float(oracle.values(rows).mean())


def sample_count(sigma: float, delta: float, rounds: int, clients_per_round: int, n: int) -> int:
    """m = ceil(4 ln(4 n T K / delta) / sigma^2).

    Chernoff bound per coordinate with a union bound over n coordinates,
    T rounds and K clients.
    """
    if not 0 < sigma < 1:
        raise InputError("sigma must lie in (0, 1)")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if rounds < 1 or clients_per_round < 1 or n < 1:
        raise InputError("rounds, clients_per_round and n must be positive")
    return math.ceil(4.0 * math.log(4.0 * n * rounds * clients_per_round / delta) / sigma**2)


def integral_point(S, n: int) -> np.ndarray:
    x = np.zeros(n)
    x[list(S)] = 1.0
    return x


__all__ = [
    "SampleBatch",
    "as_point",
    "client_gradients",
    "estimate_extension",
    "estimate_gradient",
    "exact_extension",
    "exact_gradient",
    "integral_point",
    "mask_to_list",
    "population_extension",
    "population_gradient",
    "sample_count",
    "sample_rows",
    "sample_set",
]
