"""Simulated federation: client sampling, secure aggregation, bit accounting.

The aggregators are in-process stand-ins for a SecAgg service. The masked
variant encodes each vector in fixed point, adds pairwise masks that
cancel in the sum, and works modulo 2^b, so the server only ever sees
uniformly masked submissions and their (exact) sum.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AggregationOverflow, InputError
from .streams import derive


# -- client sampling ----------------------------------------------------------


@dataclass(frozen=True)
class SamplingDraw:
    t: int
    chosen: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.chosen)


def sample_clients(weights, K: int, rng: np.random.Generator, t: int = 0) -> SamplingDraw:
    """K i.i.d. draws, with replacement, of client i with probability p_i.

    ``weights`` may be a ClientPopulation or a probability vector.
    """
    if K < 1:
        raise InputError("K must be >= 1")
    p = np.asarray(getattr(weights, "weights", weights), dtype=float)
    chosen = rng.choice(p.shape[0], size=K, replace=True, p=p)
    return SamplingDraw(t, tuple(int(i) for i in chosen))


# -- aggregation --------------------------------------------------------------


def _check_lengths(vectors: Sequence[np.ndarray]) -> int:
    if not vectors:
        raise InputError("nothing to aggregate")
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise InputError("all submitted vectors must have the same length")
    return n


class PlainAggregator:
    """Sums submissions in slot order; the server learns the sum only by convention."""

    mode = "plain"

    def aggregate_sum(self, vectors: Sequence[np.ndarray], t: int = 0) -> np.ndarray:
        n = _check_lengths(vectors)
        acc = np.zeros(n)
        for v in vectors:
            acc += np.asarray(v, dtype=float)
        return acc

    def aggregate_mean(self, vectors: Sequence[np.ndarray], t: int = 0) -> np.ndarray:
        return self.aggregate_sum(vectors, t) / len(vectors)


class MaskedAggregator:
    """Pairwise additive masking over Z_{2^b} on fixed-point encodings (scale 2^s).

    Submission slot i adds +m_ij for every later slot j and -m_ji for every
    earlier slot j. The masks are drawn from streams keyed by
    (seed, round, i, j), standing in for pairwise shared seeds.
    """

    mode = "masked"

    def __init__(self, seed: int = 0, frac_bits: int = 24, modulus_bits: int = 64):
        if not 0 < modulus_bits <= 64 or not 0 <= frac_bits < modulus_bits - 1:
            raise InputError("need 0 <= frac_bits < modulus_bits - 1 and modulus_bits <= 64")
        self.seed = int(seed)
        self.s = int(frac_bits)
        self.b = int(modulus_bits)
        self._mod_mask = np.uint64((1 << self.b) - 1) if self.b < 64 else np.uint64(2**64 - 1)

    @property
    def limit(self) -> float:
        """Exclusive bound on coordinate magnitude, 2^(b - s - 1)."""
        return float(2 ** (self.b - self.s - 1))

    def encode(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) >= self.limit):
            raise AggregationOverflow(f"coordinate magnitude must stay below 2^{self.b - self.s - 1}")
        q = np.rint(v * 2.0**self.s).astype(np.int64)
        return q.view(np.uint64) & self._mod_mask

    def decode(self, enc: np.ndarray) -> np.ndarray:
        enc = np.asarray(enc, dtype=np.uint64) & self._mod_mask
        signed = enc.view(np.int64).copy()
        if self.b < 64:
            half = 1 << (self.b - 1)
            signed = np.where(signed >= half, signed - (1 << self.b), signed)
        return signed.astype(float) / 2.0**self.s

    def fixed_point(self, v) -> np.ndarray:
        """What the aggregate 'sees' of v: v rounded to the 2^-s grid."""
        return self.decode(self.encode(v))

    def pair_mask(self, t: int, i: int, j: int, n: int) -> np.ndarray:
        rng = derive(self.seed, "secagg-mask", t, min(i, j), max(i, j))
        return rng.integers(0, 1 << self.b, size=n, dtype=np.uint64)

    def masked_submit(self, vector, slot: int, t: int, slots: int) -> np.ndarray:
        """Masked encoding of ``vector`` for submission slot ``slot`` of ``slots``."""
        if not 0 <= slot < slots:
            raise InputError("slot out of range")
        enc = self.encode(vector)
        n = enc.shape[0]
        for j in range(slots):
            if j == slot:
                continue
            m = self.pair_mask(t, slot, j, n)
            enc = enc + m if j > slot else enc - m
        return enc & self._mod_mask

    def masked_unmask(self, total: np.ndarray) -> np.ndarray:
        return self.decode(total)

    def aggregate_sum(self, vectors: Sequence[np.ndarray], t: int = 0) -> np.ndarray:
        n = _check_lengths(vectors)
        bound = sum(float(np.max(np.abs(np.rint(np.asarray(v, dtype=float) * 2.0**self.s)), initial=0.0)) for v in vectors)
        if bound >= 2.0 ** (self.b - 1):
            raise AggregationOverflow("aggregate would wrap around the modulus")
        total = np.zeros(n, dtype=np.uint64)
        for slot, v in enumerate(vectors):
            total = (total + self.masked_submit(v, slot, t, len(vectors))) & self._mod_mask
        return self.masked_unmask(total)

    def aggregate_mean(self, vectors: Sequence[np.ndarray], t: int = 0) -> np.ndarray:
        return self.aggregate_sum(vectors, t) / len(vectors)


def make_aggregator(mode: str = "plain", seed: int = 0, frac_bits: int = 24, modulus_bits: int = 64):
    if mode == "plain":
        return PlainAggregator()
    if mode == "masked":
        return MaskedAggregator(seed, frac_bits, modulus_bits)
    raise InputError(f"unknown aggregator mode {mode!r}")


def aggregate_mean(vectors: Sequence[np.ndarray], K: int | None = None) -> np.ndarray:
    """Coordinate-wise mean, summed in ascending slot order."""
    if K is not None and K != len(vectors):
        raise InputError(f"expected {K} vectors, got {len(vectors)}")
    return PlainAggregator().aggregate_mean(vectors)


# -- communication accounting -------------------------------------------------


def index_bits(n: int) -> int:
    """ceil(log2 n) for n >= 1."""
    return (int(n) - 1).bit_length()


@dataclass(frozen=True)
class BaseIndicatorPayload:
    r: int
    n: int

    @property
    def bits(self) -> int:
        return self.r * index_bits(self.n)


@dataclass(frozen=True)
class DenseVectorPayload:
    n: int
    bits_per_coord: int = 64

    @property
    def bits(self) -> int:
        return self.n * self.bits_per_coord


@dataclass(frozen=True)
class ModelBroadcastPayload:
    n: int
    bits_per_coord: int = 64

    @property
    def bits(self) -> int:
        return self.n * self.bits_per_coord


@dataclass
class RoundEntry:
    t: int
    uplink_bits: int = 0
    downlink_bits: int = 0
    clients: int = 0

    def to_dict(self) -> dict:
        return {"t": self.t, "uplink_bits": self.uplink_bits, "downlink_bits": self.downlink_bits, "clients": self.clients}


@dataclass
class CommLedger:
    rounds: dict[int, RoundEntry] = field(default_factory=dict)

    def entry(self, t: int) -> RoundEntry:
        if t not in self.rounds:
            self.rounds[t] = RoundEntry(t)
        return self.rounds[t]

    def record(self, t: int, direction: str, payload, count: int = 1) -> int:
        bits = payload.bits * count
        if bits < 0:
            raise InputError("negative payload size")
        e = self.entry(t)
        if direction == "uplink":
            e.uplink_bits += bits
            e.clients += count
        elif direction == "downlink":
            e.downlink_bits += bits
        else:
            raise InputError(f"direction must be 'uplink' or 'downlink', not {direction!r}")
        return bits

    @property
    def uplink_bits(self) -> int:
        return sum(e.uplink_bits for e in self.rounds.values())

    @property
    def downlink_bits(self) -> int:
        return sum(e.downlink_bits for e in self.rounds.values())

    def per_round(self) -> list[dict]:
        return [self.rounds[t].to_dict() for t in sorted(self.rounds)]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(d) + "\n" for d in self.per_round())

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def record_payload(ledger: CommLedger, direction: str, payload, t: int = 0, count: int = 1) -> int:
    return ledger.record(t, direction, payload, count)


# -- client-side parallelism --------------------------------------------------


def worker_count() -> int:
    raw = os.environ.get("FEDSUBMAX_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError("FEDSUBMAX_THREADS must be an integer") from None
    return os.cpu_count() or 1


_POOL: ThreadPoolExecutor | None = None


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Order-preserving map over client tasks, threaded when more than one worker is allowed."""
    global _POOL
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    if _POOL is None or _POOL._max_workers != workers:
        _POOL = ThreadPoolExecutor(max_workers=workers)
    return list(_POOL.map(fn, items))


__all__ = [
    "BaseIndicatorPayload",
    "CommLedger",
    "DenseVectorPayload",
    "MaskedAggregator",
    "ModelBroadcastPayload",
    "PlainAggregator",
    "SamplingDraw",
    "aggregate_mean",
    "index_bits",
    "make_aggregator",
    "parallel_map",
    "record_payload",
    "sample_clients",
]
