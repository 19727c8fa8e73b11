"""Experiment runner: build an instance from a config, dispatch, emit metrics."""

from __future__ import annotations

import math
import time
from typing import Iterator, Optional

import numpy as np

from . import continuous as cg
from . import discrete as dg
from .config import ExperimentConfig
from .errors import InputError
from .federated import CommLedger
from .matroid import Matroid, UniformMatroid, matroid_from_config
from .multilinear import estimate_extension
from .objectives import (
    ENUM_LIMIT,
    ClientPopulation,
    coverage_population,
    facility_population,
    read_coverage_groups,
    read_facility_csv,
)
from .kernels import subset_probabilities
from .rounding import normalize, swap_round
from .streams import derive


def generate_synthetic(kind: str, n: int, N: int, density: float = 0.3, score_range=(0.0, 1.0), seed: int = 0) -> ClientPopulation:
    """Desk-scale random instance with uniform client weights.

    coverage: client i joins group a independently with probability ``density``;
    facility: scores drawn uniformly from ``score_range``.
    """
    if n < 1 or N < 1:
        raise InputError("n and N must be >= 1")
    rng = derive(seed, "synthetic", kind)
    if kind == "coverage":
        member = rng.random((N, n)) < density
        groups = [np.flatnonzero(member[:, a]).tolist() for a in range(n)]
        return coverage_population(groups, N)
    if kind == "facility":
        lo, hi = score_range
        return facility_population(rng.uniform(lo, hi, size=(N, n)))
    raise InputError(f"unknown synthetic kind {kind!r}")


def build_population(cfg: ExperimentConfig) -> ClientPopulation:
    obj = cfg.objective
    weights = None if obj.weights == "uniform" else np.asarray(obj.weights, dtype=float)
    if obj.synthetic is not None:
        s = obj.synthetic
        seed = s.seed if s.seed is not None else cfg.seed
        pop = generate_synthetic(obj.kind, s.n, s.N, s.density, s.score_range, seed)
        return pop if weights is None else ClientPopulation(pop.oracles, weights)
    if obj.kind == "coverage":
        if obj.data is not None:
            groups, clients = read_coverage_groups(obj.data, num_clients=obj.num_clients)
        else:
            groups = obj.groups
            seen = [c for g in groups for c in g]
            clients = obj.num_clients if obj.num_clients is not None else max(seen, default=0) + 1
        return coverage_population(groups, clients, weights)
    scores = read_facility_csv(obj.data, num_clients=obj.num_clients) if obj.data is not None else np.asarray(obj.scores, dtype=float)
    return facility_population(scores, weights)


def build_instance(cfg: ExperimentConfig) -> tuple[ClientPopulation, Matroid]:
    pop = build_population(cfg)
    return pop, matroid_from_config(cfg.matroid.as_dict(), pop.n)


class _Evaluator:
    """F-hat at arbitrary points: exact below the enumeration limit, Monte Carlo above."""

    def __init__(self, pop: ClientPopulation, seed: int):
        self.pop = pop
        self.exact = pop.n <= ENUM_LIMIT
        self.table = pop.F().value_table() if self.exact else None
        self.seed = seed
        self._calls = 0

    def __call__(self, x) -> float:
        if self.exact:
            return float(subset_probabilities(np.clip(x, 0.0, 1.0)) @ self.table)
        self._calls += 1
        return estimate_extension(self.pop.F(), np.clip(x, 0.0, 1.0), 4000, derive(self.seed, "fhat", self._calls))


def _opt(pop, M, weighted=True):
    if pop.n > ENUM_LIMIT:
        return None, None
    return dg.brute_force_opt(pop, M, weighted)


def _continuous(cfg: ExperimentConfig, pop: ClientPopulation, M: Matroid, seed: int):
    p = cfg.params
    diagnostics = p.diagnostics and pop.n <= ENUM_LIMIT
    if cfg.algorithm == "fedcg-plus":
        run_cfg = cg.FedCGPlusConfig(
            T=p.T, tau=p.tau, eta=p.eta, K=p.K, sigma=p.sigma, delta=p.delta, m=p.m,
            gradient_mode="estimated" if p.m is not None or p.gradient_mode == "estimated" else "exact",
            aggregator=p.aggregator, bits_per_coord=p.bits_per_coord, diagnostics=diagnostics,
        )
        traj = cg.fedcg_plus_run(pop, M, run_cfg, seed)
        rounds = run_cfg.rounds
    else:
        participation, payload = p.participation, p.payload
        if cfg.algorithm == "central-cg":
            participation, payload = "full", "gradient"
        run_cfg = cg.FedCGConfig(
            T=p.T, eta=p.eta, K=p.K, participation=participation, payload=payload,
            gradient_mode=p.gradient_mode, m=p.m, aggregator=p.aggregator, diagnostics=diagnostics,
        )
        traj = cg.fedcg_run(pop, M, run_cfg, seed)
        rounds = run_cfg.T
    return run_cfg, traj, rounds


def _slack(cfg, run_cfg, pop, M, traj) -> Optional[float]:
    diag = traj.diagnostics
    if diag is None:
        return None
    r, m_F = M.rank, pop.F().max_singleton
    if isinstance(run_cfg, cg.FedCGPlusConfig):
        return cg.theoretical_bound_plus(run_cfg.T, run_cfg.eta, r, diag.D, m_F, run_cfg.K, run_cfg.delta, run_cfg.tau, run_cfg.sigma, diag.Q)
    if run_cfg.participation == "full":
        return cg.theoretical_bound_full(run_cfg.T, run_cfg.eta, r, diag.D, m_F)
    return cg.theoretical_bound_partial(run_cfg.T, run_cfg.eta, r, diag.D, m_F, run_cfg.K, cfg.params.delta)


def run_experiment(cfg: ExperimentConfig, seed: Optional[int] = None, timing: bool = False, ledger_out: Optional[list] = None) -> Iterator[dict]:
    """Yield per-round metric records followed by exactly one summary record."""
    seed = cfg.seed if seed is None else seed
    started = time.perf_counter()
    pop, M = build_instance(cfg)
    summary: dict = {"summary": True, "algorithm": cfg.algorithm, "seed": seed, "n": pop.n, "N": pop.N, "r": M.rank}
    ledger = CommLedger()

    if cfg.algorithm in ("fedcg", "fedcg-plus", "central-cg"):
        run_cfg, traj, rounds = _continuous(cfg, pop, M, seed)
        ledger = traj.ledger
        fhat = _Evaluator(pop, seed)
        for rec, x in zip(traj.rounds, traj.points[1:]):
            yield {"t": rec.t, "Fhat": fhat(x), "gamma": rec.gamma, "uplink_bits": ledger.entry(rec.t).uplink_bits}
        S = swap_round(normalize(traj.decomposition), M, derive(seed, "rounding"))
        S_opt, opt = _opt(pop, M)
        slack = _slack(cfg, run_cfg, pop, M, traj)
        final = fhat(traj.final)
        summary.update(
            Fhat=final,
            Fhat_exact=fhat.exact,
            S=S,
            F_rounded=pop.eval(S),
            OPT=opt,
            OPT_set=S_opt,
            slack=slack,
            guarantee_factor=cg.guarantee_factor(run_cfg.eta, rounds),
            D=traj.diagnostics.D if traj.diagnostics else None,
            decomposition_size=len(traj.decomposition),
        )
        if opt is not None and slack is not None:
            summary["bound_holds"] = bool(summary["guarantee_factor"] * opt <= final + slack + 1e-9)
    elif cfg.algorithm == "fed-discrete":
        p = cfg.params
        w = dg.importance_factors(pop)
        run = dg.fed_discrete_greedy(pop, M, w, p.epsilon, p.kappa_override, seed, p.aggregator)
        ledger = run.ledger
        yield from run.log
        S_opt, opt = _opt(pop, M, weighted=False)
        value = pop.eval(run.S, weighted=False)
        factor = (1 - 1 / math.e - p.epsilon) if isinstance(M, UniformMatroid) else (0.5 - p.epsilon)
        summary.update(
            S=run.S,
            F=value,
            F_weighted=pop.eval(run.S),
            OPT=opt,
            OPT_set=S_opt,
            guarantee=factor * opt if opt is not None else None,
            kappa=run.kappa,
            expected_participants=float(run.kappa_i.sum()),
            stopped_early=run.stopped_early,
        )
    elif cfg.algorithm == "central-greedy":
        S = dg.centralized_greedy(pop, M)
        S_opt, opt = _opt(pop, M, weighted=False)
        summary.update(S=S, F=pop.eval(S, weighted=False), F_weighted=pop.eval(S), OPT=opt, OPT_set=S_opt)
    elif cfg.algorithm == "brute":
        S_opt, opt = dg.brute_force_opt(pop, M, weighted=True)
        summary.update(S=S_opt, OPT=opt, OPT_unweighted=pop.eval(S_opt, weighted=False))
    else:  # pragma: no cover - config validation rejects other names
        raise InputError(f"unknown algorithm {cfg.algorithm!r}")

    summary["total_uplink_bits"] = ledger.uplink_bits
    summary["total_downlink_bits"] = ledger.downlink_bits
    if timing:
        summary["wall_clock"] = time.perf_counter() - started
    if ledger_out is not None:
        ledger_out.append(ledger)
    yield summary
