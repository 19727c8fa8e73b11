"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import reference as ref  # noqa: E402
from fedsubmax.continuous import (  # noqa: E402
    FedCGConfig,
    FedCGPlusConfig,
    fedcg_plus_run,
    fedcg_run,
    final_value,
    guarantee_factor,
    inner_product_samples,
    theoretical_bound_full,
    theoretical_bound_partial,
)
from fedsubmax.discrete import (  # noqa: E402
    brute_force_opt,
    centralized_greedy,
    fed_discrete_greedy,
    importance_coverage,
    importance_direct,
    importance_facility,
)
from fedsubmax.federated import MaskedAggregator, PlainAggregator  # noqa: E402
from fedsubmax.matroid import PartitionMatroid, UniformMatroid, linear_maximize  # noqa: E402
from fedsubmax.multilinear import estimate_gradient, exact_extension, exact_gradient, integral_point, sample_count  # noqa: E402
from fedsubmax.objectives import (  # noqa: E402
    WeightedSumObjective,
    coverage_population,
    facility_population,
)
from fedsubmax.rounding import normalize, swap_round  # noqa: E402

RESULTS: dict[int, str] = {}

COV3 = ([[0, 1], [1, 2], [3]], 4)


def report(cid: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {cid:2d}. {title}: {detail}"
    RESULTS[cid] = line
    print(line)
    return ok


def coverage(rng, n, N, density=0.4):
    member = rng.random((N, n)) < density
    return coverage_population([np.flatnonzero(member[:, a]).tolist() for a in range(n)], N)


def facility(rng, n, N):
    return facility_population(rng.random((N, n)))


def random_matroid(rng, n, kmax=3):
    if rng.random() < 0.5 or n < 2:
        return UniformMatroid(n, int(rng.integers(1, min(kmax, n) + 1)))
    cut = int(rng.integers(1, n))
    blocks = [list(range(cut)), list(range(cut, n))]
    caps = [int(rng.integers(1, min(len(b), kmax) + 1)) for b in blocks]
    while sum(caps) > kmax:
        caps[int(np.argmax(caps))] -= 1
    return PartitionMatroid(blocks, caps)


def test_c01_multilinear_consistency():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    h, worst_fd, exact_ok = 1e-4, 0.0, True
    for k in range(20):
        n = int(rng.integers(2, 9))
        N = int(rng.integers(1, 6))
        pop = coverage(rng, n, N) if k % 2 else facility(rng, n, N)
        f = WeightedSumObjective(pop.oracles, rng.random(N)) if k % 4 == 3 else pop.F()
        for r in range(n + 1):
            for S in combinations(range(n), r):
                exact_ok &= exact_extension(f, integral_point(S, n)) == f.eval(S)
        for _ in range(5):
            x = rng.uniform(h, 1 - h, n)
            g = exact_gradient(f, x)
            fd = np.empty(n)
            for e in range(n):
                up, dn = x.copy(), x.copy()
                up[e] += h
                dn[e] -= h
                fd[e] = (exact_extension(f, up) - exact_extension(f, dn)) / (2 * h)
            worst_fd = max(worst_fd, float(np.max(np.abs(g - fd))))
    elapsed = time.perf_counter() - start
    ok = exact_ok and worst_fd <= 1e-8 and elapsed < 10
    assert report(1, "multilinear consistency", ok, f"integral exact={exact_ok}, max |grad - FD| = {worst_fd:.2e} (tol 1e-8), {elapsed:.1f}s (< 10s)")


def test_c02_gradient_estimator():
    start = time.perf_counter()
    pop = coverage_population(*COV3)
    T, K = 100, 2
    m = sample_count(0.2, 0.05, T, K, pop.n)
    F = pop.F()
    rng = np.random.default_rng(202)
    hits = 0
    for trial in range(1000):
        x = rng.random(pop.n)
        est, _ = estimate_gradient(F, x, m, np.random.default_rng([202, trial]))
        hits += np.max(np.abs(est - exact_gradient(F, x))) <= 0.2 * F.max_singleton
    elapsed = time.perf_counter() - start
    ok = hits >= 950 and elapsed < 60
    assert report(2, "gradient estimator", ok, f"m={m}, within 0.2*m_F in {hits}/1000 trials (need >= 950), {elapsed:.1f}s (< 60s)")


def test_c03_linear_maximize():
    rng = np.random.default_rng(303)
    matches = 0
    for _ in range(100):
        n = int(rng.integers(1, 11))
        M = random_matroid(rng, n, kmax=n)
        # small integer weights force ties and keep sums exact
        w = rng.integers(0, 6, n).astype(float)
        got = float(linear_maximize(M, w) @ w)
        best = max(sum(w[e] for e in B) for B in ref.bases(n, M.is_independent))
        matches += got == best
    assert report(3, "matroid LP oracle", matches == 100, f"{matches}/100 instances equal brute-force base enumeration")


def test_c04_full_participation_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    T, worst, holds = 200, math.inf, 0
    for k in range(10):
        n = int(rng.integers(3, 9))
        N = int(rng.integers(2, 21))
        pop = coverage(rng, n, N) if k % 2 else facility(rng, n, N)
        M = random_matroid(rng, n, kmax=3)
        cfg = FedCGConfig(T=T, participation="full", diagnostics=True)
        traj = fedcg_run(pop, M, cfg, seed=k)
        opt = brute_force_opt(pop, M)[1]
        lhs = guarantee_factor(cfg.eta, T) * opt
        rhs = final_value(pop, traj) + theoretical_bound_full(T, cfg.eta, M.rank, traj.diagnostics.D, pop.F().max_singleton)
        holds += lhs <= rhs + 1e-9
        worst = min(worst, rhs - lhs)
    elapsed = time.perf_counter() - start
    ok = holds == 10 and elapsed < 300
    assert report(4, "full-participation bound", ok, f"holds on {holds}/10 instances, min margin {worst:.3g}, {elapsed:.1f}s (< 300s)")


def test_c05_unbiased_and_variance():
    start = time.perf_counter()
    pop = coverage_population([[0, 1], [1, 2], [3], [0, 3]], 4)
    M = UniformMatroid(4, 2)
    K, r = 2, M.rank
    x = np.array([0.1, 0.3, 0.2, 0.05])
    samples, expected, gamma = inner_product_samples(pop, M, x, K, 10_000, seed=505)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    bias = abs(samples.mean() - expected)
    var, cap = samples.var(ddof=1), 36 * r**2 * gamma**2 / K
    elapsed = time.perf_counter() - start
    ok = bias <= 3 * se and var <= cap and elapsed < 60
    assert report(5, "unbiased sampling / bounded variance", ok, f"|bias|={bias:.2e} <= 3SE={3 * se:.2e}, var={var:.3g} <= {cap:.3g}, {elapsed:.1f}s (< 60s)")


def test_c06_partial_participation_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    pop = coverage(rng, 6, 12)
    M = UniformMatroid(6, 2)
    opt = brute_force_opt(pop, M)[1]
    T, K, delta = 100, 2, 0.2
    holds = 0
    for run in range(200):
        traj = fedcg_run(pop, M, FedCGConfig(T=T, K=K, diagnostics=True), seed=run)
        slack = theoretical_bound_partial(T, 1 / T, M.rank, traj.diagnostics.D, pop.F().max_singleton, K, delta)
        holds += (1 - 1 / math.e) * opt <= final_value(pop, traj) + slack + 1e-9
    elapsed = time.perf_counter() - start
    ok = holds >= 160 and elapsed < 300
    assert report(6, "partial-participation bound", ok, f"holds in {holds}/200 runs (need >= 160), {elapsed:.1f}s (< 300s)")


def test_c07_local_step_degeneracy():
    rng = np.random.default_rng(707)
    identical, drift_ok, worst = 0, True, 0.0
    for k in range(6):
        n = int(rng.integers(3, 8))
        pop = coverage(rng, n, 8) if k % 2 else facility(rng, n, 8)
        M = random_matroid(rng, n)
        a = fedcg_run(pop, M, FedCGConfig(T=40, K=3), seed=k)
        b = fedcg_plus_run(pop, M, FedCGPlusConfig(T=40, tau=1, K=3, gradient_mode="exact"), seed=k)
        identical += all(np.array_equal(x, y) for x, y in zip(a.points, b.points)) and len(a.points) == len(b.points)
        for tau in (1, 4, 8):
            c = fedcg_plus_run(pop, M, FedCGPlusConfig(T=40, tau=tau, K=3, m=64), seed=k)
            for rec in c.rounds:
                worst = max(worst, rec.max_drift / math.sqrt(M.rank))
                drift_ok &= rec.max_drift <= math.sqrt(M.rank) + 1e-12
    ok = identical == 6 and drift_ok
    assert report(7, "local-step degeneracy and drift", ok, f"tau=1 bit-identical on {identical}/6, max drift/sqrt(r) = {worst:.3f} (<= 1)")


def test_c08_discrete_greedy():
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    eps, worst_rate, same, min_kappa = 0.2, 1.0, True, 1.0
    for k in range(5):
        n = int(rng.integers(4, 9))
        N = int(rng.integers(10, 41))
        pop = coverage(rng, n, N, density=0.25)
        M = UniformMatroid(n, int(rng.integers(2, 4)))
        opt = brute_force_opt(pop, M, weighted=False)[1]
        w = importance_coverage(pop)
        central = centralized_greedy(pop, M)
        good = 0
        for run in range(200):
            res = fed_discrete_greedy(pop, M, w, eps, seed=run)
            min_kappa = min(min_kappa, float(res.kappa_i[w.w > 0].min()))
            good += pop.eval(res.S, weighted=False) >= (1 - 1 / math.e - eps) * opt - 1e-12
            same &= fed_discrete_greedy(pop, M, np.ones(N), kappa_override=1.0, seed=run).S == central
        worst_rate = min(worst_rate, (good / 200) / (1 - 1 / n))
    elapsed = time.perf_counter() - start
    ok = worst_rate >= 1.0 and same and elapsed < 300
    assert report(8, "federated discrete greedy", ok, f"min success/(1-1/n) = {worst_rate:.3f} (>= 1), min kappa_i = {min_kappa:.2f}, kappa_i=1 equals centralized: {same}, {elapsed:.1f}s (< 300s)")


def test_c09_importance_protocols():
    rng = np.random.default_rng(909)
    equal = 0
    for k in range(50):
        n, N = int(rng.integers(1, 9)), int(rng.integers(1, 15))
        if k % 2:
            pop = coverage(rng, n, N)
            equal += np.array_equal(importance_coverage(pop).w, importance_direct(pop).w)
        else:
            pop = facility(rng, n, N)
            equal += np.array_equal(importance_facility(pop).w, importance_direct(pop).w)
    w = importance_coverage(coverage_population(*COV3)).w.tolist()
    ok = equal == 50 and w == [0.5, 0.5, 0.5, 1.0]
    assert report(9, "importance protocols", ok, f"{equal}/50 equal direct computation, COV-3 w = {w}")


def test_c10_swap_rounding():
    start = time.perf_counter()
    rng = np.random.default_rng(1010)
    pop = facility(rng, 7, 12)
    M = PartitionMatroid([[0, 1, 2], [3, 4], [5, 6]], [1, 1, 1])
    traj = fedcg_run(pop, M, FedCGConfig(T=20, K=3), seed=3)
    dec = normalize(traj.decomposition)
    x = np.clip(dec.point(pop.n), 0, 1)
    runs = 10_000
    counts = np.zeros(pop.n)
    values = np.empty(runs)
    valid = True
    table = pop.F().value_table()
    draw = np.random.default_rng(11)
    for k in range(runs):
        S = swap_round(dec, M, draw)
        valid &= M.is_base(S) and len(S) == M.rank
        counts[S] += 1
        values[k] = table[sum(1 << e for e in S)]
    band = 3 * np.sqrt(x * (1 - x) / runs)
    marg_ok = bool(np.all(np.abs(counts / runs - x) <= band + 1e-12))
    fhat = exact_extension(pop.F(), x)
    se = values.std(ddof=1) / math.sqrt(runs)
    value_ok = values.mean() >= fhat - 3 * se
    elapsed = time.perf_counter() - start
    ok = marg_ok and value_ok and valid
    assert report(
        10, "swap rounding", ok,
        f"{len(dec)} bases, marginals in 3-sigma bands: {marg_ok}, mean F(S)={values.mean():.4f} vs Fhat={fhat:.4f} - 3SE, all bases: {valid}, {elapsed:.1f}s",
    )


def test_c11_secure_aggregation():
    rng = np.random.default_rng(1111)
    exact = 0
    for trial in range(1000):
        K, n = int(rng.integers(1, 17)), int(rng.integers(1, 9))
        vectors = [rng.random(n) for _ in range(K)]
        agg = MaskedAggregator(seed=trial)
        plain = PlainAggregator().aggregate_sum([agg.fixed_point(v) for v in vectors])
        exact += np.array_equal(agg.aggregate_sum(vectors, t=trial), plain)
    assert report(11, "secure aggregation", exact == 1000, f"masked == plain (fixed-point inputs) bit-exactly on {exact}/1000 sets")


def test_c12_communication_accounting():
    rng = np.random.default_rng(1212)
    n, N = 64, 10
    pop = coverage(rng, n, N, density=0.1)
    traj = fedcg_run(pop, UniformMatroid(n, 3), FedCGConfig(T=100, K=4, gradient_mode="estimated", m=8), seed=12)
    bits = traj.ledger.uplink_bits
    assert report(12, "communication accounting", bits == 7200, f"uplink {bits} bits (expected 100*4*3*6 = 7200)")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_c")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
