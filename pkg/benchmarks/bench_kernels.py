"""Compare the JIT-compiled kernels against the pure-numpy fallback.

Runs the same workloads in two subprocesses — one with MUTPIPE_NO_NUMBA=1 —
and prints a timing table. Usage:

    python benchmarks/bench_kernels.py [--tests N] [--statements N] [--reps N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from mutpipe import kernels

params = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
counts = rng.integers(0, 5, size=(params["tests"], params["statements"])
                      ).astype(np.float64)

# warm-up triggers JIT compilation so timings measure steady state
kernels.distance_matrix(counts[:4], kernels.COSINE)
kernels.cp_bounds(3, 10, 0.05)

results = {"mode": "numpy" if not kernels.USE_NUMBA else "numba"}

t0 = time.perf_counter()
for _ in range(params["reps"]):
    for metric in (kernels.JACCARD, kernels.OCHIAI,
                   kernels.EUCLIDEAN, kernels.COSINE):
        kernels.distance_matrix(counts, metric)
results["distance_matrix"] = (time.perf_counter() - t0) / params["reps"]

t0 = time.perf_counter()
n_calls = 0
for _ in range(params["reps"]):
    for n in range(10, 2000, 25):
        kernels.cp_bounds(int(0.7 * n), n, 0.05)
        n_calls += 1
results["cp_bounds"] = (time.perf_counter() - t0) / n_calls

t0 = time.perf_counter()
h = kernels.correlated_binom_pmf_vec(50, 0.7, 0.0008)
p_grid = np.arange(0.65, 0.75, 0.002)
r2_grid = np.arange(-0.002, 0.002, 0.0001)
for _ in range(params["reps"]):
    kernels.grid_fit_ess(h, p_grid, r2_grid)
results["grid_fit_ess"] = (time.perf_counter() - t0) / params["reps"]

print(json.dumps(results))
"""


def run_mode(disable_numba: bool, params: dict) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["MUTPIPE_NO_NUMBA"] = "1"
    else:
        env.pop("MUTPIPE_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(params)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--tests", type=int, default=200)
    ap.add_argument("--statements", type=int, default=500)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    params = {"tests": args.tests, "statements": args.statements,
              "reps": args.reps}

    print(f"workload: {args.tests} tests x {args.statements} statements, "
          f"{args.reps} reps")
    jit = run_mode(False, params)
    plain = run_mode(True, params)
    print(f"{'kernel':<18}{jit['mode']:>12}{plain['mode']:>12}{'ratio':>9}")
    for key in ("distance_matrix", "cp_bounds", "grid_fit_ess"):
        a, b = jit[key], plain[key]
        print(f"{key:<18}{a * 1e3:>10.2f}ms{b * 1e3:>10.2f}ms"
              f"{b / a:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
