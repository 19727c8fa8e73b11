"""Matroids, their polytopes, and greedy linear maximization.

Three flavours: uniform (cardinality), partition (per-block capacities),
and a generic matroid given by an independence oracle. Structured
matroids answer membership and rank questions in closed form; the generic
one falls back to enumeration and refuses instances that are too large.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError, SizeError
from .objectives import ENUM_LIMIT, as_mask, mask_to_list

GENERIC_LIMIT = 15


def _popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)


class Matroid:
    n: int
    rank: int

    @property
    def r(self) -> int:
        return self.rank

    def is_independent(self, S: Iterable[int]) -> bool:
        return self._independent(as_mask(S, self.n))

    def _independent(self, mask: int) -> bool:
        raise NotImplementedError

    def rank_of(self, S: Iterable[int]) -> int:
        return self._rank_of(as_mask(S, self.n))

    def _rank_of(self, mask: int) -> int:
        # Greedy suffices for matroids: every maximal independent subset has the same size.
        acc = 0
        for e in mask_to_list(mask):
            if self._independent(acc | 1 << e):
                acc |= 1 << e
        return bin(acc).count("1")

    def is_base(self, S: Iterable[int]) -> bool:
        mask = as_mask(S, self.n)
        return bin(mask).count("1") == self.rank and self._independent(mask)

    def _greedy(self, order: np.ndarray) -> list[int]:
        acc = 0
        chosen = []
        for e in order:
            e = int(e)
            if len(chosen) == self.rank:
                break
            if self._independent(acc | 1 << e):
                acc |= 1 << e
                chosen.append(e)
        return chosen

    def independent_masks(self) -> np.ndarray:
        """Every independent set as a bitmask, ascending (n <= 20)."""
        if self.n > ENUM_LIMIT:
            raise SizeError(f"enumerating independent sets needs n <= {ENUM_LIMIT}")
        masks = np.arange(1 << self.n, dtype=np.int64)
        keep = np.fromiter((self._independent(int(m)) for m in masks), dtype=bool, count=masks.shape[0])
        return masks[keep]

    def bases(self) -> list[tuple[int, ...]]:
        masks = self.independent_masks()
        return [tuple(mask_to_list(int(m))) for m in masks[_popcount(masks) == self.rank]]

    def _polytope_generic(self, x: np.ndarray, tol: float) -> bool:
        if self.n > GENERIC_LIMIT:
            raise SizeError(f"polytope membership for oracle matroids needs n <= {GENERIC_LIMIT}")
        for mask in range(1, 1 << self.n):
            if x[mask_to_list(mask)].sum() > self._rank_of(mask) + tol:
                return False
        return True

    def polytope_contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise InputError(f"expected a point of length {self.n}")
        if np.any(x < -tol):
            return False
        return self._polytope(x, tol)

    def _polytope(self, x, tol):
        return self._polytope_generic(x, tol)

    def to_config(self) -> dict:
        raise NotImplementedError


class UniformMatroid(Matroid):
    """Independent sets are those of size at most k."""

    def __init__(self, n: int, k: int):
        if n < 1 or k < 0:
            raise InputError("uniform matroid needs n >= 1 and k >= 0")
        self.n = int(n)
        self.k = int(k)
        self.rank = min(self.k, self.n)

    def _independent(self, mask):
        return bin(mask).count("1") <= self.k

    def _rank_of(self, mask):
        return min(bin(mask).count("1"), self.k)

    def _greedy(self, order):
        return [int(e) for e in order[: self.rank]]

    def independent_masks(self):
        if self.n > ENUM_LIMIT:
            raise SizeError(f"enumerating independent sets needs n <= {ENUM_LIMIT}")
        masks = np.arange(1 << self.n, dtype=np.int64)
        return masks[_popcount(masks) <= self.k]

    def _polytope(self, x, tol):
        cap = 1.0 if self.k >= 1 else 0.0
        return bool(np.all(x <= cap + tol) and x.sum() <= self.k + tol)

    def to_config(self):
        return {"kind": "uniform", "k": self.k}

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, k={self.k})"


class PartitionMatroid(Matroid):
    """At most caps[b] elements from each block b; blocks partition the ground set."""

    def __init__(self, blocks: Sequence[Iterable[int]], caps: Sequence[int], n: int | None = None):
        blocks = [sorted(int(e) for e in b) for b in blocks]
        caps = [int(c) for c in caps]
        if len(blocks) != len(caps) or not blocks:
            raise InputError("partition matroid needs one capacity per block")
        if any(c < 0 for c in caps):
            raise InputError("block capacities must be nonnegative")
        flat = [e for b in blocks for e in b]
        size = n if n is not None else len(flat)
        if sorted(flat) != list(range(size)):
            raise InputError("blocks must partition the ground set {0, ..., n-1}")
        self.n = size
        self.blocks = blocks
        self.caps = caps
        self.block_of = np.empty(size, dtype=np.int64)
        for b, members in enumerate(blocks):
            self.block_of[members] = b
        self.block_masks = [as_mask(b, size) for b in blocks]
        self.rank = sum(min(c, len(b)) for b, c in zip(blocks, caps))

    def _independent(self, mask):
        return all(bin(mask & bm).count("1") <= c for bm, c in zip(self.block_masks, self.caps))

    def _rank_of(self, mask):
        return sum(min(bin(mask & bm).count("1"), c) for bm, c in zip(self.block_masks, self.caps))

    def _greedy(self, order):
        used = [0] * len(self.blocks)
        chosen = []
        for e in order:
            b = self.block_of[e]
            if used[b] < self.caps[b]:
                used[b] += 1
                chosen.append(int(e))
                if len(chosen) == self.rank:
                    break
        return chosen

    def independent_masks(self):
        if self.n > ENUM_LIMIT:
            raise SizeError(f"enumerating independent sets needs n <= {ENUM_LIMIT}")
        masks = np.arange(1 << self.n, dtype=np.int64)
        keep = np.ones(masks.shape[0], dtype=bool)
        for bm, c in zip(self.block_masks, self.caps):
            keep &= _popcount(masks & bm) <= c
        return masks[keep]

    def _polytope(self, x, tol):
        for members, c in zip(self.blocks, self.caps):
            if x[members].sum() > c + tol:
                return False
            if np.any(x[members] > min(1, c) + tol):
                return False
        return True

    def to_config(self):
        return {"kind": "partition", "blocks": self.blocks, "caps": self.caps}

    def __repr__(self):
        return f"PartitionMatroid(blocks={self.blocks}, caps={self.caps})"


class OracleMatroid(Matroid):
    """Matroid defined by an independence oracle on frozensets."""

    def __init__(self, n: int, is_independent: Callable[[frozenset], bool]):
        if n < 1:
            raise InputError("ground set must have n >= 1")
        self.n = int(n)
        self._oracle = is_independent
        if not self._oracle(frozenset()):
            raise InputError("the empty set must be independent")
        self.rank = self._rank_of((1 << self.n) - 1)

    def _independent(self, mask):
        return bool(self._oracle(frozenset(mask_to_list(mask))))

    def rank_of(self, S):
        mask = as_mask(S, self.n)
        if bin(mask).count("1") > GENERIC_LIMIT:
            raise SizeError(f"rank queries on oracle matroids need |S| <= {GENERIC_LIMIT}")
        return self._rank_of(mask)


def matroid_from_config(cfg: dict, n: int) -> Matroid:
    kind = cfg.get("kind")
    if kind == "uniform":
        return UniformMatroid(n, cfg["k"])
    if kind == "partition":
        return PartitionMatroid(cfg["blocks"], cfg["caps"], n=n)
    raise InputError(f"unknown matroid kind {kind!r}")


# -- operations ---------------------------------------------------------------


def is_independent(M: Matroid, S: Iterable[int]) -> bool:
    return M.is_independent(S)


def rank_of_subset(M: Matroid, S: Iterable[int]) -> int:
    return M.rank_of(S)


def polytope_membership(M: Matroid, x, tol: float = 1e-9) -> bool:
    return M.polytope_contains(x, tol)


def linear_maximize(M: Matroid, w) -> np.ndarray:
    """Indicator of a maximum-weight base for nonnegative weights w.

    Elements are scanned by decreasing weight, ties broken by smallest id,
    with exact comparisons so that the result is a deterministic function
    of the represented weights.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (M.n,):
        raise InputError(f"expected {M.n} weights, got shape {w.shape}")
    if np.any(np.isnan(w)) or np.any(w < 0):
        raise InputError("linear_maximize needs nonnegative weights")
    order = np.argsort(-w, kind="stable")
    chosen = M._greedy(order)
    if len(chosen) != M.rank:
        raise InputError("greedy scan ended before reaching the matroid rank")
    v = np.zeros(M.n)
    v[chosen] = 1.0
    return v


def check_axioms(M: Matroid, n_limit: int = 10) -> bool:
    """Exhaustively verify the independence axioms (n <= n_limit)."""
    if M.n > n_limit:
        raise SizeError(f"axiom check refused for n={M.n} > {n_limit}")
    full = 1 << M.n
    indep = [M._independent(m) for m in range(full)]
    if not indep[0]:
        return False
    for m in range(full):
        if not indep[m]:
            continue
        sub = m
        while sub:
            sub = (sub - 1) & m
            if not indep[sub]:
                return False
    sets = [m for m in range(full) if indep[m]]
    for a, b in itertools.product(sets, repeat=2):
        if bin(a).count("1") < bin(b).count("1"):
            if not any(indep[a | 1 << e] for e in mask_to_list(b & ~a)):
                return False
    return True
