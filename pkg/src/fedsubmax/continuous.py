"""Federated continuous greedy (FedCG) and its local-step variant (FedCG+).

Both maintain a fractional point x in the matroid polytope, starting at 0.
In FedCG every active client answers with the base that best aligns with
its local gradient at x; the server averages those bases and moves x by
eta times the average. FedCG+ lets each client run tau local greedy steps
with Monte-Carlo gradients before sending its (fractional) model change.

Every stochastic choice draws from a stream derived from
(seed, round, slot, client, local step), so runs are reproducible
regardless of how client work is scheduled.
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
    parallel_map,
    sample_clients,
)
from .matroid import Matroid, linear_maximize
from .multilinear import client_gradients, estimate_gradient, exact_gradient, population_extension, sample_count
from .objectives import ENUM_LIMIT, ClientPopulation, SetFunction
from .rounding import BaseDecomposition
from .streams import derive


@dataclass(frozen=True)
class FedCGConfig:
    T: int
    eta: Optional[float] = None  # defaults to 1/T
    K: int = 1
    participation: str = "sampled"  # "sampled" | "full"
    payload: str = "direction"  # "direction" | "gradient" (full participation only)
    gradient_mode: str = "exact"  # "exact" | "estimated"
    m: Optional[int] = None  # samples per gradient estimate
    aggregator: str = "plain"
    diagnostics: bool = False

    def __post_init__(self):
        if self.T < 1:
            raise InputError("T must be >= 1")
        if self.eta is None:
            object.__setattr__(self, "eta", 1.0 / self.T)
        if not 0 < self.eta <= 1:
            raise InputError("eta must lie in (0, 1]")
        if self.eta * self.T > 1 + 1e-12:
            raise InputError("eta * T must not exceed 1, or the final point can leave the polytope")
        if self.K < 1:
            raise InputError("K must be >= 1")
        if self.participation not in ("sampled", "full"):
            raise InputError("participation must be 'sampled' or 'full'")
        if self.payload not in ("direction", "gradient"):
            raise InputError("payload must be 'direction' or 'gradient'")
        if self.payload == "gradient" and self.participation != "full":
            raise InputError("gradient payloads are only defined for full participation")
        if self.gradient_mode not in ("exact", "estimated"):
            raise InputError("gradient_mode must be 'exact' or 'estimated'")
        if self.gradient_mode == "estimated" and (self.m is None or self.m < 1):
            raise InputError("estimated gradients need a sample count m >= 1")


@dataclass(frozen=True)
class FedCGPlusConfig:
    T: int
    tau: int
    eta: Optional[float] = None  # defaults to tau/T
    K: int = 1
    sigma: float = 0.2
    delta: float = 0.1
    m: Optional[int] = None  # defaults to sample_count(sigma, delta, T, K, n)
    gradient_mode: str = "estimated"
    aggregator: str = "plain"
    bits_per_coord: int = 64
    diagnostics: bool = False

    def __post_init__(self):
        if self.T < 1 or self.tau < 1:
            raise InputError("T and tau must be >= 1")
        if self.T % self.tau:
            raise InputError("tau must divide T")
        if self.eta is None:
            object.__setattr__(self, "eta", self.tau / self.T)
        if not 0 < self.eta <= 1:
            raise InputError("eta must lie in (0, 1]")
        if self.eta * self.T / self.tau > 1 + 1e-12:
            raise InputError("eta * (T / tau) must not exceed 1")
        if self.K < 1:
            raise InputError("K must be >= 1")
        if not 0 < self.sigma < 1 or not 0 < self.delta < 1:
            raise InputError("sigma and delta must lie in (0, 1)")
        if self.gradient_mode not in ("exact", "estimated"):
            raise InputError("gradient_mode must be 'exact' or 'estimated'")
        if self.m is not None and self.m < 1:
            raise InputError("m must be >= 1")

    @property
    def rounds(self) -> int:
        return self.T // self.tau

    def samples(self, n: int) -> int:
        return self.m if self.m is not None else sample_count(self.sigma, self.delta, self.T, self.K, n)


@dataclass
class RoundRecord:
    t: int
    chosen: tuple[int, ...]
    delta: np.ndarray
    gamma: Optional[float] = None
    max_drift: Optional[float] = None


@dataclass
class HeterogeneityDiagnostics:
    gamma: list[float]
    L: list[float]
    m_F: float

    @property
    def D(self) -> float:
        return float(sum(self.gamma))

    @property
    def Q(self) -> float:
        return float(sum(self.L))


@dataclass
class Trajectory:
    points: list[np.ndarray]
    rounds: list[RoundRecord] = field(default_factory=list)
    decomposition: BaseDecomposition = field(default_factory=BaseDecomposition)
    ledger: CommLedger = field(default_factory=CommLedger)
    diagnostics: Optional[HeterogeneityDiagnostics] = None

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


# -- client step --------------------------------------------------------------


def local_gradient(oracle: SetFunction, x, gradient_mode: str = "exact", m: Optional[int] = None, rng=None) -> np.ndarray:
    # Local models in FedCG+ may overshoot 1 in some coordinates; gradients are taken at the clipped point.
    x = np.clip(x, 0.0, 1.0)
    if gradient_mode == "exact":
        return exact_gradient(oracle, x)
    if m is None or rng is None:
        raise InputError("estimated gradients need m and an RNG stream")
    return estimate_gradient(oracle, x, m, rng)[0]


def client_direction(oracle: SetFunction, x, M: Matroid, gradient_mode: str = "exact", m: Optional[int] = None, rng=None) -> np.ndarray:
    """Base indicator maximizing <v, grad f_i(x)> over the matroid polytope."""
    return linear_maximize(M, local_gradient(oracle, x, gradient_mode, m, rng))


# -- diagnostics and bounds ---------------------------------------------------


def compute_gamma(pop: ClientPopulation, x) -> float:
    """max_i || grad f_i(x) - grad F(x) ||_inf with F weighted by p_i."""
    G = client_gradients(pop, np.clip(x, 0.0, 1.0))
    g = pop.weights @ G
    return float(np.max(np.abs(G - g)))


def lipschitz_bound(pop: ClientPopulation, r: int) -> float:
    """Upper bound max_i m_{f_i} * sqrt(r) on the per-round smoothness constant L_t."""
    return max(f.max_singleton for f in pop.oracles) * math.sqrt(r)


def guarantee_factor(eta: float, rounds: int) -> float:
    return 1.0 - (1.0 - eta) ** rounds


def theoretical_bound_full(T: int, eta: float, r: int, D: float, m_F: float) -> float:
    """Additive slack eta*r*D + T*eta^2*r^2*m_F/2 of the full-participation guarantee."""
    return eta * r * D + T * eta**2 * r**2 * m_F / 2.0


def theoretical_bound_partial(T: int, eta: float, r: int, D: float, m_F: float, K: int, delta: float) -> float:
    """Slack of the client-sampling guarantee, holding with probability 1 - delta."""
    return eta * (r * D + 6.0 * r * D / math.sqrt(K * delta / T)) + T * eta**2 * r**2 * m_F / 2.0


def theoretical_bound_plus(T: int, eta: float, r: int, D: float, m_F: float, K: int, delta: float, tau: int, sigma: float, Q: float) -> float:
    """Slack of the local-step guarantee (heterogeneity + local steps + client sampling).

    D and Q sum gamma_t and L_t over the T/tau communication rounds.
    """
    hetero = eta * r * D
    local = 2.0 * sigma * r + 2.0 * eta * r**1.5 * Q
    sampling = math.sqrt(T) * (6.0 * eta * r * D + 2.0 * sigma * r + 2.0 * eta * r**1.5 * Q) / math.sqrt(K * tau * delta)
    return T * eta**2 * r**2 * m_F / (2.0 * tau) + hetero + local + sampling


def inner_product_samples(pop: ClientPopulation, M: Matroid, x, K: int, draws: int, seed: int):
    """Resample the client draw at a fixed x and record <Delta, grad F(x)>.

    Returns ``(samples, expected, gamma)`` where ``expected`` is
    sum_i p_i <v_i, grad F(x)> and ``gamma`` the heterogeneity at x.
    """
    G = client_gradients(pop, x)
    g = pop.weights @ G
    V = np.stack([linear_maximize(M, G[i]) for i in range(pop.N)])
    scores = V @ g
    expected = float(pop.weights @ scores)
    rng = derive(seed, "inner-product")
    idx = rng.choice(pop.N, size=(draws, K), replace=True, p=pop.weights)
    samples = scores[idx].mean(axis=1)
    gamma = float(np.max(np.abs(G - g)))
    return samples, expected, gamma


def _diagnostics(pop, points, r):
    if pop.n > ENUM_LIMIT:
        return None
    gammas = [compute_gamma(pop, x) for x in points]
    L = [lipschitz_bound(pop, r)] * len(points)
    return HeterogeneityDiagnostics(gammas, L, pop.F().max_singleton)


# -- algorithms ---------------------------------------------------------------


def fedcg_run(pop: ClientPopulation, M: Matroid, cfg: FedCGConfig, seed: int = 0) -> Trajectory:
    n, r = pop.n, M.rank
    if M.n != n:
        raise InputError("matroid and objective must share a ground set")
    agg = make_aggregator(cfg.aggregator, seed=int(derive(seed, "secagg").integers(2**63)))
    x = np.zeros(n)
    traj = Trajectory(points=[x.copy()])
    for t in range(cfg.T):
        if cfg.participation == "full":
            chosen = tuple(range(pop.N))
        else:
            chosen = sample_clients(pop, cfg.K, derive(seed, "sampling", t), t).chosen
        traj.ledger.record(t, "downlink", ModelBroadcastPayload(n), count=len(chosen))

        if cfg.payload == "gradient":

            def task(item, x=x, t=t):
                slot, i = item
                return local_gradient(pop.oracles[i], x, cfg.gradient_mode, cfg.m, derive(seed, "client", t, slot, i, 0))

            grads = parallel_map(task, enumerate(chosen))
            traj.ledger.record(t, "uplink", DenseVectorPayload(n), count=len(chosen))
            g = agg.aggregate_sum([pop.weights[i] * gi for i, gi in zip(chosen, grads)], t)
            delta = linear_maximize(M, np.maximum(g, 0.0))
            traj.decomposition.add_indicator(cfg.eta, delta)
        else:

            def task(item, x=x, t=t):
                slot, i = item
                return client_direction(pop.oracles[i], x, M, cfg.gradient_mode, cfg.m, derive(seed, "client", t, slot, i, 0))

            dirs = parallel_map(task, enumerate(chosen))
            traj.ledger.record(t, "uplink", BaseIndicatorPayload(r, n), count=len(chosen))
            if cfg.participation == "full":
                delta = agg.aggregate_sum([pop.weights[i] * v for i, v in zip(chosen, dirs)], t)
                for i, v in zip(chosen, dirs):
                    if pop.weights[i] > 0:
                        traj.decomposition.add_indicator(cfg.eta * pop.weights[i], v)
            else:
                delta = agg.aggregate_mean(dirs, t)
                for v in dirs:
                    traj.decomposition.add_indicator(cfg.eta / len(dirs), v)
        x = x + cfg.eta * delta
        traj.points.append(x)
        traj.rounds.append(RoundRecord(t, chosen, delta))

    if cfg.diagnostics:
        traj.diagnostics = _diagnostics(pop, traj.points[:-1], r)
        if traj.diagnostics is not None:
            for rec, gam in zip(traj.rounds, traj.diagnostics.gamma):
                rec.gamma = gam
    return traj


def fedcg_plus_run(pop: ClientPopulation, M: Matroid, cfg: FedCGPlusConfig, seed: int = 0) -> Trajectory:
    n, r = pop.n, M.rank
    if M.n != n:
        raise InputError("matroid and objective must share a ground set")
    m = cfg.samples(n)
    agg = make_aggregator(cfg.aggregator, seed=int(derive(seed, "secagg").integers(2**63)))
    x = np.zeros(n)
    traj = Trajectory(points=[x.copy()])
    for t in range(cfg.rounds):
        chosen = sample_clients(pop, cfg.K, derive(seed, "sampling", t), t).chosen
        traj.ledger.record(t, "downlink", ModelBroadcastPayload(n, cfg.bits_per_coord), count=len(chosen))

        def local_run(item, x=x, t=t):
            slot, i = item
            xi = x.copy()
            change = np.zeros(n)
            bases = []
            drift = 0.0
            for j in range(cfg.tau):
                v = client_direction(pop.oracles[i], xi, M, cfg.gradient_mode, m, derive(seed, "client", t, slot, i, j))
                bases.append(v)
                change = change + v / cfg.tau
                xi = xi + v / cfg.tau
                drift = max(drift, float(np.linalg.norm(xi - x)))
            return change, bases, drift

        results = parallel_map(local_run, enumerate(chosen))
        traj.ledger.record(t, "uplink", DenseVectorPayload(n, cfg.bits_per_coord), count=len(chosen))
        delta = agg.aggregate_mean([c for c, _, _ in results], t)
        for _, bases, _ in results:
            for v in bases:
                traj.decomposition.add_indicator(cfg.eta / (len(chosen) * cfg.tau), v)
        x = x + cfg.eta * delta
        traj.points.append(x)
        traj.rounds.append(RoundRecord(t, chosen, delta, max_drift=max(d for _, _, d in results)))

    if cfg.diagnostics:
        traj.diagnostics = _diagnostics(pop, traj.points[:-1], r)
        if traj.diagnostics is not None:
            for rec, gam in zip(traj.rounds, traj.diagnostics.gamma):
                rec.gamma = gam
    return traj


def final_value(pop: ClientPopulation, traj: Trajectory, weighted: bool = True) -> float:
    # summing eta T times can overshoot 1 by a few ulps
    return population_extension(pop, np.clip(traj.final, 0.0, 1.0), weighted)
