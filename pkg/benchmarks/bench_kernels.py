"""Compare the compiled and numpy Monte Carlo kernels.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Prints trials per second for each backend and shape, the speedup, and the
largest relative disagreement between the two sets of accumulated sums.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mixedadc import _fallback, _rng, backend
from mixedadc.monte_carlo import block_size

SHAPES = [(8, 3, 3), (16, 4, 8), (40, 10, 20), (100, 20, 20)]  # (M, K, M_f)


def run(name, beta, m_full, n_trials):
    kernel = backend.get(name)[1]
    key = _rng.stream_key(1)
    step = block_size(*beta.shape)
    out = np.zeros((beta.shape[1], _fallback.N_STATS))
    t0 = time.perf_counter()
    for t in range(0, n_trials, step):
        kernel(beta, m_full, 0.88, 10.0, key, t, min(t + step, n_trials), out)
    return time.perf_counter() - t0, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = sorted(backend.AVAILABLE)
    print("M\tK\tM_f\t" + "\t".join(f"{n}_trials_per_s" for n in names) + "\tspeedup\tmax_rel_diff")
    rng = np.random.default_rng(0)
    for m, k, mf in SHAPES:
        beta = np.ascontiguousarray(np.exp(rng.standard_normal((m, k))))
        rates, sums = {}, {}
        for name in names:
            best = min(run(name, beta, mf, args.trials)[0] for _ in range(args.repeat))
            rates[name] = args.trials / best
            sums[name] = run(name, beta, mf, args.trials)[1]
        speed = rates.get("cython", np.nan) / rates["python"]
        if len(names) > 1:
            a, b = sums["python"], sums["cython"]
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        else:
            diff = float("nan")
        print(f"{m}\t{k}\t{mf}\t" + "\t".join(f"{rates[n]:.0f}" for n in names) + f"\t{speed:.2f}\t{diff:.1e}")


if __name__ == "__main__":
    main()
