"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 14] [--m 2000] [--repeat 5]

Both backends are imported directly, so no environment flag is needed.
The first numba call (compilation or cache load) is excluded.
"""

import argparse
import timeit

import numpy as np

from fedsubmax import _kernels_numba as nb
from fedsubmax import _kernels_numpy as npk


def cases(n, m, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    row = rng.random(n)
    table = npk.facility_table(row)
    tables = np.stack([npk.facility_table(rng.random(n)) for _ in range(8)])
    probs = npk.subset_probabilities(x)
    rows = rng.random((m, n)) < x
    masks = npk.masks_from_rows(rows)
    return {
        "subset_probabilities": lambda k: k.subset_probabilities(x),
        "extension_gradient": lambda k: k.extension_gradient(table, probs, n),
        "extension_gradients_stacked": lambda k: k.extension_gradients_stacked(tables, probs, n),
        "sampled_gradient": lambda k: k.sampled_gradient(table, masks, n),
        "facility_table": lambda k: k.facility_table(row),
        "masks_from_rows": lambda k: k.masks_from_rows(rows),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=14)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"n={args.n} (2^n={1 << args.n}), m={args.m}")
    print(f"{'kernel':30s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, call in cases(args.n, args.m).items():
        call(nb)  # warm-up
        t_np = min(timeit.repeat(lambda: call(npk), number=3, repeat=args.repeat)) / 3
        t_nb = min(timeit.repeat(lambda: call(nb), number=3, repeat=args.repeat)) / 3
        print(f"{name:30s} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
