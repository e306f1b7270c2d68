"""Wall-clock comparison of the compiled and plain-numpy kernel backends.

Run without arguments: times every workload under the default backend,
then re-executes itself with CHEAPSVRG_DISABLE_JIT=1 and prints both
columns side by side.  The kernels are identical source either way, so
the table is purely a dispatch comparison.

    python3 benchmarks/bench_backends.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np

from cheapsvrg._backend import backend_name
from cheapsvrg.harness import InstanceSpec, generate_regression_instance
from cheapsvrg.objectives import LEAST_SQUARES
from cheapsvrg.optimizers import (
    EpochConfig,
    run_cheap_svrg,
    run_cheaper_svrg,
    run_minibatch,
    run_sgd,
    run_svrg,
)

N, P = 2000, 100


def _time(fn, repeats: int = 3) -> float:
    fn()  # warm (triggers compilation on the jit side)
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run_timings() -> dict[str, float]:
    data, w_star = generate_regression_instance(
        InstanceSpec(n=N, p=P, noise_norm=0.1, seed=0)
    )
    w0 = np.zeros(P)
    base = dict(eta=1e-4, K=200, T=5, seed=1)
    workloads = {
        "generate instance": lambda: generate_regression_instance(
            InstanceSpec(n=N, p=P, noise_norm=0.1, seed=0)
        ),
        "cheap s=45": lambda: run_cheap_svrg(
            LEAST_SQUARES, data, w0, EpochConfig(s=45, **base), w_star
        ),
        "svrg": lambda: run_svrg(LEAST_SQUARES, data, w0, EpochConfig(**base), w_star),
        "minibatch q=8": lambda: run_minibatch(
            LEAST_SQUARES, data, w0, EpochConfig(s=45, q=8, **base), w_star
        ),
        "cheaper b=10": lambda: run_cheaper_svrg(
            LEAST_SQUARES, data, w0, EpochConfig(s=45, b=10, **base), w_star
        ),
        "sgd 10k steps": lambda: run_sgd(
            LEAST_SQUARES, data, w0, 10_000, 0.1, 100.0, 1, w_star
        ),
    }
    return {name: _time(fn) for name, fn in workloads.items()}


def main() -> int:
    if "--json" in sys.argv:
        print(json.dumps({"backend": backend_name(), "timings": run_timings()}))
        return 0
    mine = run_timings()
    env = dict(os.environ, CHEAPSVRG_DISABLE_JIT="1")
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--json"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    other = json.loads(proc.stdout.strip().splitlines()[-1])
    left, right = backend_name(), other["backend"]
    if left == right:
        print(f"warning: both runs used the {left} backend (numba missing?)")
    width = max(len(k) for k in mine)
    print(f"{'workload':<{width}}  {left:>10}  {right:>10}  ratio")
    for name, secs in mine.items():
        theirs = other["timings"][name]
        ratio = theirs / secs if secs > 0 else float("inf")
        print(f"{name:<{width}}  {secs:>9.4f}s  {theirs:>9.4f}s  {ratio:>5.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
