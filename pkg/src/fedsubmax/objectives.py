"""Set-function oracles and the weighted decomposable objective.

Subsets cross the public interface as iterables of element ids; internally
they are bitmasks (Python ints, so any ``n`` works) or boolean row
matrices for batched evaluation. Oracles are immutable once built; the
lazily cached value tables are pure functions of the construction data.
"""

from __future__ import annotations

import csv
import functools
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import InputError, SizeError

# Oracles with n <= TABLE_LIMIT keep a cached table of f over all 2^n subsets.
TABLE_LIMIT = 16
# Exact enumeration (uncached) is allowed up to this size.
ENUM_LIMIT = 20
CHECK_LIMIT = 12


def as_mask(S: Iterable[int], n: int) -> int:
    mask = 0
    for e in S:
        e = int(e)
        if not 0 <= e < n:
            raise InputError(f"element id {e} out of range for ground set of size {n}")
        mask |= 1 << e
    return mask


def mask_to_list(mask: int) -> list[int]:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


def rows_from_masks(masks: np.ndarray, n: int) -> np.ndarray:
    bits = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    return (np.asarray(masks, dtype=np.int64)[:, None] & bits) != 0


def all_masks(n: int) -> np.ndarray:
    if n > ENUM_LIMIT:
        raise SizeError(f"enumeration over 2^{n} subsets exceeds the limit n <= {ENUM_LIMIT}")
    return np.arange(1 << n, dtype=np.int64)


class SetFunction:
    """Monotone submodular set function on the ground set {0, ..., n-1}.

    Subclasses implement ``_rows`` (batched evaluation on a boolean matrix
    with one subset per row) and may override ``_build_table``.
    """

    n: int

    def _rows(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def values(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=bool)
        if rows.ndim != 2 or rows.shape[1] != self.n:
            raise InputError(f"expected a (m, {self.n}) membership matrix, got shape {rows.shape}")
        return self._rows(rows)

    def eval(self, S: Iterable[int]) -> float:
        return self.eval_mask(as_mask(S, self.n))

    __call__ = eval

    def eval_mask(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        if self.n <= TABLE_LIMIT:
            return float(self.table[mask])
        row = np.zeros((1, self.n), dtype=bool)
        row[0, mask_to_list(mask)] = True
        return float(self._rows(row)[0])

    def marginal(self, S: Iterable[int], e: int) -> float:
        mask = as_mask(S, self.n)
        if not 0 <= e < self.n:
            raise InputError(f"element id {e} out of range for ground set of size {self.n}")
        if mask >> e & 1:
            raise InputError(f"element {e} is already in the set")
        return self.eval_mask(mask | 1 << e) - self.eval_mask(mask)

    def _build_table(self) -> np.ndarray:
        masks = all_masks(self.n)
        out = np.empty(masks.shape[0])
        chunk = 1 << 14
        for lo in range(0, masks.shape[0], chunk):
            part = masks[lo : lo + chunk]
            out[lo : lo + chunk] = self._rows(rows_from_masks(part, self.n))
        out[0] = 0.0
        return out

    @functools.cached_property
    def table(self) -> np.ndarray:
        """f over every subset, indexed by bitmask (cached; n <= TABLE_LIMIT)."""
        if self.n > TABLE_LIMIT:
            raise SizeError(f"cached tables are limited to n <= {TABLE_LIMIT}; use value_table()")
        t = self._build_table()
        t.setflags(write=False)
        return t

    def value_table(self) -> np.ndarray:
        """f over every subset; cached for small n, recomputed for n <= ENUM_LIMIT."""
        if self.n <= TABLE_LIMIT:
            return self.table
        return self._build_table()

    def singletons(self) -> np.ndarray:
        return self._rows(np.eye(self.n, dtype=bool))

    @functools.cached_property
    def max_singleton(self) -> float:
        """m_f = max_e f({e})."""
        return float(self.singletons().max())


class FacilityLocationObjective(SetFunction):
    """f(A) = max_{j in A} c(client, j), with f(empty) = 0."""

    def __init__(self, scores, client: int):
        scores = np.asarray(scores, dtype=float)
        if scores.ndim == 1:
            scores = scores[None, :]
        if scores.ndim != 2 or scores.shape[1] < 1:
            raise InputError("scores must be a (clients, facilities) matrix")
        if np.any(scores < 0) or not np.all(np.isfinite(scores)):
            raise InputError("facility scores must be finite and nonnegative")
        if not 0 <= client < scores.shape[0]:
            raise InputError(f"client {client} out of range")
        self.client = int(client)
        self.row = np.ascontiguousarray(scores[client])
        self.row.setflags(write=False)
        self.n = self.row.shape[0]

    def _rows(self, rows):
        return np.where(rows, self.row, 0.0).max(axis=1, initial=0.0)

    def _build_table(self):
        return kernels.facility_table(self.row)

    def singletons(self):
        return self.row.copy()

    def __repr__(self):
        return f"FacilityLocationObjective(client={self.client}, n={self.n})"


class CoverageObjective(SetFunction):
    """f(A) = 1 if the client belongs to some selected group, else 0."""

    def __init__(self, groups: Sequence[Iterable[int]], client_id: int):
        if len(groups) < 1:
            raise InputError("coverage needs at least one group")
        self.client_id = int(client_id)
        self.n = len(groups)
        self.member = np.array([self.client_id in set(g) for g in groups], dtype=bool)
        self.member.setflags(write=False)
        self.member_mask = as_mask(np.flatnonzero(self.member), self.n)

    def _rows(self, rows):
        return (rows & self.member).any(axis=1).astype(float)

    def _build_table(self):
        masks = all_masks(self.n)
        return ((masks & self.member_mask) != 0).astype(float)

    def singletons(self):
        return self.member.astype(float)

    def __repr__(self):
        return f"CoverageObjective(client_id={self.client_id}, n={self.n})"


class ModularObjective(SetFunction):
    """f(A) = sum_{e in A} w[e] for nonnegative w."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        if np.any(self.weights < 0):
            raise InputError("modular weights must be nonnegative")
        self.n = self.weights.shape[0]

    def _rows(self, rows):
        return rows.astype(float) @ self.weights

    def singletons(self):
        return self.weights.copy()


class FunctionObjective(SetFunction):
    """Wraps a Python callable taking a frozenset of element ids."""

    def __init__(self, fn: Callable[[frozenset], float], n: int):
        if n < 1:
            raise InputError("ground set must have n >= 1")
        self.fn = fn
        self.n = int(n)

    def _rows(self, rows):
        return np.array([0.0 if not r.any() else float(self.fn(frozenset(np.flatnonzero(r).tolist()))) for r in rows])


class WeightedSumObjective(SetFunction):
    """sum_i weight_i * f_i(A) as a single oracle."""

    def __init__(self, oracles: Sequence[SetFunction], weights):
        self.oracles = list(oracles)
        self.weights = np.asarray(weights, dtype=float)
        if len(self.oracles) != self.weights.shape[0] or not self.oracles:
            raise InputError("need one weight per oracle and at least one oracle")
        self.n = self.oracles[0].n

    def _rows(self, rows):
        out = np.zeros(rows.shape[0])
        for w, f in zip(self.weights, self.oracles):
            if w != 0.0:
                out += w * f._rows(rows)
        return out

    def _build_table(self):
        out = np.zeros(1 << self.n)
        for w, f in zip(self.weights, self.oracles):
            if w != 0.0:
                out += w * f.value_table()
        return out

    def singletons(self):
        out = np.zeros(self.n)
        for w, f in zip(self.weights, self.oracles):
            out += w * f.singletons()
        return out


class ClientPopulation:
    """N clients, each holding a private oracle f_i and a weight p_i."""

    def __init__(self, oracles: Sequence[SetFunction], weights=None):
        oracles = list(oracles)
        if not oracles:
            raise InputError("a population needs at least one client")
        n = oracles[0].n
        if any(f.n != n for f in oracles):
            raise InputError("all client oracles must share one ground set")
        if weights is None:
            weights = np.full(len(oracles), 1.0 / len(oracles))
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(oracles),):
            raise InputError("need exactly one weight per client")
        if np.any(weights < 0):
            raise InputError("client weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise InputError(f"client weights must sum to 1 (got {weights.sum()!r})")
        weights.setflags(write=False)
        self.oracles = oracles
        self.weights = weights
        self.n = n

    @property
    def N(self) -> int:
        return len(self.oracles)

    def __len__(self):
        return len(self.oracles)

    def objective(self, weighted: bool = True) -> WeightedSumObjective:
        """F = sum p_i f_i (weighted) or sum f_i (unit weights) as one oracle."""
        w = self.weights if weighted else np.ones(self.N)
        return WeightedSumObjective(self.oracles, w)

    @functools.cached_property
    def _weighted(self):
        return self.objective(weighted=True)

    @functools.cached_property
    def _unweighted(self):
        return self.objective(weighted=False)

    def F(self, weighted: bool = True) -> WeightedSumObjective:
        return self._weighted if weighted else self._unweighted

    def eval(self, S: Iterable[int], weighted: bool = True) -> float:
        return self.F(weighted).eval(S)

    def client_tables(self) -> np.ndarray:
        """(N, 2^n) matrix of every client's value table."""
        return np.stack([f.value_table() for f in self.oracles])

    def singleton_matrix(self) -> np.ndarray:
        """(N, n) matrix of f_i({e})."""
        return np.stack([f.singletons() for f in self.oracles])


def facility_population(scores, weights=None) -> ClientPopulation:
    scores = np.asarray(scores, dtype=float)
    return ClientPopulation([FacilityLocationObjective(scores, i) for i in range(scores.shape[0])], weights)


def coverage_population(groups: Sequence[Iterable[int]], num_clients: int, weights=None) -> ClientPopulation:
    groups = [frozenset(int(c) for c in g) for g in groups]
    for g in groups:
        for c in g:
            if not 0 <= c < num_clients:
                raise InputError(f"client id {c} out of range for {num_clients} clients")
    return ClientPopulation([CoverageObjective(groups, i) for i in range(num_clients)], weights)


# -- operations ---------------------------------------------------------------


def eval_set(oracle: SetFunction, S: Iterable[int]) -> float:
    return oracle.eval(S)


def marginal_gain(oracle: SetFunction, S: Iterable[int], e: int) -> float:
    return oracle.marginal(S, e)


def decomposable_eval(pop: ClientPopulation, S: Iterable[int], weighted: bool = True) -> float:
    return pop.eval(S, weighted)


def max_singleton(oracle: SetFunction) -> float:
    return oracle.max_singleton


class SingletonBounds(NamedTuple):
    m_F: float
    gamma_bound: float


def max_singleton_global(pop: ClientPopulation, weighted: bool = True) -> SingletonBounds:
    """m_F for the aggregate objective and the heterogeneity cap 2 * max_i m_{f_i}."""
    m_fi = max(f.max_singleton for f in pop.oracles)
    return SingletonBounds(pop.F(weighted).max_singleton, 2.0 * m_fi)


def _checkable_table(oracle: SetFunction, n_limit: int) -> np.ndarray:
    if oracle.n > n_limit:
        raise SizeError(f"exhaustive check refused for n={oracle.n} > {n_limit}")
    return oracle.value_table()


def check_monotone(oracle: SetFunction, n_limit: int = CHECK_LIMIT, tol: float = 1e-12) -> bool:
    """f(S + e) >= f(S) for every S and e, by enumeration."""
    table = _checkable_table(oracle, n_limit)
    masks = np.arange(table.shape[0], dtype=np.int64)
    for e in range(oracle.n):
        if np.any(table[masks | (1 << e)] < table[masks] - tol):
            return False
    return True


def check_submodular(oracle: SetFunction, n_limit: int = CHECK_LIMIT, tol: float = 1e-12) -> bool:
    """Diminishing returns for every (S, T, e) with S a subset of T and e outside T.

    Checked on adjacent pairs T = S + j, which implies the general case by
    chaining along any maximal chain from S to T.
    """
    table = _checkable_table(oracle, n_limit)
    n = oracle.n
    masks = np.arange(table.shape[0], dtype=np.int64)
    for e in range(n):
        for j in range(n):
            if j == e:
                continue
            free = masks[(masks & ((1 << e) | (1 << j))) == 0]
            gain_small = table[free | (1 << e)] - table[free]
            with_j = free | (1 << j)
            gain_large = table[with_j | (1 << e)] - table[with_j]
            if np.any(gain_small < gain_large - tol):
                return False
    return True


# -- ingestion ----------------------------------------------------------------


def read_facility_csv(path, n: int | None = None, num_clients: int | None = None) -> np.ndarray:
    """Score matrix from ``client_id,facility_id,score`` triplets; missing pairs are 0."""
    path = Path(path)
    triplets = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["client_id", "facility_id", "score"]:
            raise InputError(f"{path}: header must be client_id,facility_id,score")
        for lineno, rec in enumerate(reader, start=2):
            try:
                triplets.append((int(rec["client_id"]), int(rec["facility_id"]), float(rec["score"])))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: malformed record") from exc
    if not triplets:
        raise InputError(f"{path}: no records")
    clients = num_clients if num_clients is not None else max(t[0] for t in triplets) + 1
    facilities = n if n is not None else max(t[1] for t in triplets) + 1
    scores = np.zeros((clients, facilities))
    for i, j, s in triplets:
        if not (0 <= i < clients and 0 <= j < facilities):
            raise InputError(f"{path}: pair ({i}, {j}) out of range")
        if s < 0:
            raise InputError(f"{path}: negative score for pair ({i}, {j})")
        scores[i, j] = s
    return scores


def read_coverage_groups(path, n: int | None = None, num_clients: int | None = None):
    """Groups from lines ``<group_id>: <client_id> <client_id> ...``.

    Returns ``(groups, num_clients)``; group ids absent from the file are empty.
    """
    path = Path(path)
    parsed = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected '<group_id>: <client ids>'")
        try:
            gid = int(head)
            members = [int(tok) for tok in tail.split()]
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: ids must be integers") from exc
        if gid < 0 or any(c < 0 for c in members):
            raise InputError(f"{path}:{lineno}: ids must be nonnegative")
        parsed.setdefault(gid, set()).update(members)
    if not parsed:
        raise InputError(f"{path}: no groups")
    size = n if n is not None else max(parsed) + 1
    if max(parsed) >= size:
        raise InputError(f"{path}: group id {max(parsed)} out of range for n={size}")
    seen = [c for g in parsed.values() for c in g]
    clients = num_clients if num_clients is not None else (max(seen) + 1 if seen else 1)
    groups = [sorted(parsed.get(g, ())) for g in range(size)]
    return groups, clients
