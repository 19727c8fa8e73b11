"""Federated discrete greedy with randomized-response participation.

The aggregate objective here is the unit-weight sum F = sum_i f_i: the
clients' raw marginal vectors are summed by the aggregator, exactly as the
importance histograms O[j] = sum_i f_i({j}) are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError
from .federated import (
    BaseIndicatorPayload,
    CommLedger,
    DenseVectorPayload,
    ModelBroadcastPayload,
    make_aggregator,
)
from .matroid import Matroid
from .objectives import ClientPopulation, CoverageObjective, FacilityLocationObjective, WeightedSumObjective, mask_to_list
from .streams import derive


@dataclass
class ImportanceFactors:
    w: np.ndarray
    kappa: Optional[float] = None

    @property
    def kappa_i(self) -> np.ndarray:
        if self.kappa is None:
            raise InputError("kappa has not been set")
        return participation_probabilities(self.w, self.kappa)


def participation_probabilities(w, kappa: float) -> np.ndarray:
    """kappa_i = min(kappa * w_i, 1); clients with w_i = 0 never participate."""
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = np.minimum(kappa * w[pos], 1.0)
    return out


def _ratio_max(values: np.ndarray, totals: np.ndarray) -> float:
    ok = totals > 0
    if not np.any(ok):
        return 0.0
    return float(np.max(values[ok] / totals[ok]))


def _histogram_protocol(pop: ClientPopulation, vectors: list[np.ndarray], aggregator, ledger: CommLedger):
    n = pop.n
    O = aggregator.aggregate_sum(vectors, 0)
    ledger.record(0, "uplink", DenseVectorPayload(n), count=pop.N)
    ledger.record(1, "downlink", ModelBroadcastPayload(n), count=pop.N)
    return O


def importance_facility(pop: ClientPopulation, aggregator=None, ledger: Optional[CommLedger] = None) -> ImportanceFactors:
    """Two-round protocol: aggregate O[j] = sum_i c(i, j), then w_i = max_j c(i, j) / O[j]."""
    if not all(isinstance(f, FacilityLocationObjective) for f in pop.oracles):
        raise InputError("importance_facility needs facility-location clients")
    aggregator = aggregator or make_aggregator("plain")
    ledger = ledger if ledger is not None else CommLedger()
    rows = [f.row.copy() for f in pop.oracles]
    O = _histogram_protocol(pop, rows, aggregator, ledger)
    return ImportanceFactors(np.array([_ratio_max(row, O) for row in rows]))


def importance_coverage(pop: ClientPopulation, aggregator=None, ledger: Optional[CommLedger] = None) -> ImportanceFactors:
    """Two-round protocol over group-membership histograms: w_i = max over own groups of 1 / |G_a|."""
    if not all(isinstance(f, CoverageObjective) for f in pop.oracles):
        raise InputError("importance_coverage needs coverage clients")
    aggregator = aggregator or make_aggregator("plain")
    ledger = ledger if ledger is not None else CommLedger()
    memberships = [f.member.astype(float) for f in pop.oracles]
    O = _histogram_protocol(pop, memberships, aggregator, ledger)
    w = []
    for member in memberships:
        sizes = O[member > 0]
        w.append(float(np.max(1.0 / sizes)) if sizes.size else 0.0)
    return ImportanceFactors(np.array(w))


def importance_direct(pop: ClientPopulation) -> ImportanceFactors:
    """w_i = max_e f_i({e}) / F({e}) straight from the oracles (no protocol)."""
    singles = [f.singletons() for f in pop.oracles]
    totals = np.zeros(pop.n)
    for s in singles:
        totals = totals + s
    return ImportanceFactors(np.array([_ratio_max(s, totals) for s in singles]))


def importance_factors(pop: ClientPopulation, aggregator=None, ledger=None) -> ImportanceFactors:
    if all(isinstance(f, FacilityLocationObjective) for f in pop.oracles):
        return importance_facility(pop, aggregator, ledger)
    if all(isinstance(f, CoverageObjective) for f in pop.oracles):
        return importance_coverage(pop, aggregator, ledger)
    return importance_direct(pop)


def default_kappa(r: int, n: int, epsilon: float, delta: Optional[float] = None) -> int:
    """ceil(3 (r ln n + ln(2r) + ln(1/delta)) / eps^2), with delta = 1/n by default."""
    if not 0 < epsilon < 1:
        raise InputError("epsilon must lie in (0, 1)")
    delta = 1.0 / n if delta is None else delta
    return math.ceil(3.0 * (r * math.log(n) + math.log(2 * max(r, 1)) + math.log(1.0 / delta)) / epsilon**2)


@dataclass
class DiscreteRun:
    S: list[int]
    kappa: float
    kappa_i: np.ndarray
    participants: list[int] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)
    ledger: CommLedger = field(default_factory=CommLedger)
    stopped_early: bool = False


def _feasible(M: Matroid, mask: int) -> list[int]:
    return [e for e in range(M.n) if not mask >> e & 1 and M._independent(mask | 1 << e)]


def fed_discrete_greedy(
    pop: ClientPopulation,
    M: Matroid,
    w=None,
    epsilon: float = 0.2,
    kappa_override: Optional[float] = None,
    seed: int = 0,
    aggregator: str = "plain",
) -> DiscreteRun:
    """r rounds of greedy where clients report scaled marginals by randomized response."""
    if M.n != pop.n:
        raise InputError("matroid and objective must share a ground set")
    if w is None:
        w = importance_factors(pop).w
    w = np.asarray(getattr(w, "w", w), dtype=float)
    if w.shape != (pop.N,) or np.any(w < 0):
        raise InputError("need one nonnegative importance factor per client")
    kappa = float(kappa_override) if kappa_override is not None else default_kappa(M.rank, pop.n, epsilon)
    kappa_i = participation_probabilities(w, kappa)
    agg = make_aggregator(aggregator, seed=int(derive(seed, "secagg").integers(2**63)))
    run = DiscreteRun([], kappa, kappa_i)
    n = pop.n
    mask = 0
    for t in range(M.rank):
        feasible = _feasible(M, mask)
        if not feasible:
            break
        run.ledger.record(t, "downlink", BaseIndicatorPayload(bin(mask).count("1"), n), count=pop.N)
        submissions = []
        for i, f in enumerate(pop.oracles):
            if kappa_i[i] <= 0:
                continue
            if derive(seed, "randomized-response", t, i).random() >= kappa_i[i]:
                continue
            base = f.eval_mask(mask)
            vec = np.zeros(n)
            for e in feasible:
                vec[e] = (f.eval_mask(mask | 1 << e) - base) / kappa_i[i]
            submissions.append(vec)
        run.ledger.record(t, "uplink", DenseVectorPayload(len(feasible)), count=len(submissions))
        run.participants.append(len(submissions))
        total = agg.aggregate_sum(submissions, t) if submissions else np.zeros(n)
        scores = total[feasible]
        if not np.any(scores > 0):
            run.stopped_early = True
            run.log.append({"round": t, "participants": len(submissions), "chosen": None, "uplink_bits": run.ledger.entry(t).uplink_bits})
            break
        best = feasible[int(np.argmax(scores))]
        mask |= 1 << best
        run.log.append({"round": t, "participants": len(submissions), "chosen": best, "uplink_bits": run.ledger.entry(t).uplink_bits})
    run.S = mask_to_list(mask)
    return run


def centralized_greedy(pop: ClientPopulation, M: Matroid, weighted: bool = False) -> list[int]:
    """Classical greedy on F = sum_i f_i (or sum_i p_i f_i); stops when no gain is positive.

    Gains are accumulated client by client in id order, matching how the
    aggregator sums client vectors.
    """
    weights = pop.weights if weighted else np.ones(pop.N)
    mask = 0
    for _ in range(M.rank):
        feasible = _feasible(M, mask)
        if not feasible:
            break
        gains = np.zeros(pop.n)
        for wi, f in zip(weights, pop.oracles):
            base = f.eval_mask(mask)
            vec = np.zeros(pop.n)
            for e in feasible:
                vec[e] = wi * (f.eval_mask(mask | 1 << e) - base) if weighted else f.eval_mask(mask | 1 << e) - base
            gains += vec
        scores = gains[feasible]
        if not np.any(scores > 0):
            break
        mask |= 1 << feasible[int(np.argmax(scores))]
    return mask_to_list(mask)


def brute_force_opt(pop: ClientPopulation, M: Matroid, weighted: bool = True) -> tuple[list[int], float]:
    """Exact maximizer of F over all independent sets, by enumeration (n <= 20)."""
    if M.n != pop.n:
        raise InputError("matroid and objective must share a ground set")
    masks = M.independent_masks()
    values = pop.F(weighted).value_table()[masks]
    k = int(np.argmax(values))
    return mask_to_list(int(masks[k])), float(values[k])


def sparsified_value(pop: ClientPopulation, kappa_i, rng: np.random.Generator) -> WeightedSumObjective:
    """F'(S) = sum over kept clients of f_i(S) / kappa_i, client i kept with probability kappa_i."""
    kappa_i = np.asarray(kappa_i, dtype=float)
    keep = rng.random(pop.N) < kappa_i
    weights = np.where(keep, 1.0 / np.where(kappa_i > 0, kappa_i, 1.0), 0.0)
    return WeightedSumObjective(pop.oracles, weights)
