#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times a representative slice of each hot path under the backend the current
process imported.  With --compare, the same workloads are rerun in a
subprocess with TRIPACK_BACKEND=python and printed side by side (the fallback
executes the identical source interpreted, and produces identical results).

    python benchmarks/backend_bench.py --compare
"""

import argparse
import json
import os
import subprocess
import sys
import time

import tripack
from tripack import concentration as C
from tripack import ode
from tripack import processes as P
from tripack.graph import complete_graph


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(scale: float):
    n_pack = max(40, int(600 * scale))
    n_tf = max(40, int(600 * scale))
    n_rtf = max(12, int(120 * scale))
    n_meas = max(32, int(250 * scale))

    def rk4():
        ode.tabulate("z", t_max=5.0, step=1e-4)

    def pack():
        P.run_packing(n_pack, c=1.0, seed=1, checkpoint_count=4)

    def tri_free():
        P.run_triangle_free(n_tf, c=1.0, seed=2, checkpoint_count=4)

    def reverse_tf():
        P.run_reverse_triangle_free(complete_graph(n_rtf), seed=3, checkpoint_count=4)

    def removal():
        P.run_random_triangle_removal(complete_graph(max(10, n_rtf // 2)), seed=4)

    def measure():
        C.run_concentration(n_meas, 0.5, seed=5, checkpoint_count=3, k_v=20, k_p=20)

    return {
        f"rk4 tabulate t=5 step=1e-4": rk4,
        f"k11s packing n={n_pack} c=1": pack,
        f"triangle-free n={n_tf} c=1": tri_free,
        f"reverse tf K_{n_rtf}": reverse_tf,
        f"triangle removal K_{max(10, n_rtf // 2)}": removal,
        f"concentration n={n_meas} c=0.5": measure,
    }


def run(scale: float) -> dict:
    results = {}
    for name, fn in workloads(scale).items():
        fn()  # warm (jit compile on the compiled backend)
        results[name] = _time(fn)
    return results


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=float, default=1.0,
                    help="size multiplier for the workloads (default 1.0)")
    ap.add_argument("--compare", action="store_true",
                    help="also run the pure-Python backend in a subprocess")
    ap.add_argument("--json", action="store_true", help="emit machine-readable results")
    args = ap.parse_args()

    mine = run(args.scale)
    if args.json and not args.compare:
        print(json.dumps({"backend": tripack.BACKEND, "seconds": mine}))
        return 0

    other = None
    if args.compare:
        env = dict(os.environ, TRIPACK_BACKEND="python")
        proc = subprocess.run(
            [sys.executable, __file__, "--scale", str(args.scale), "--json"],
            capture_output=True, text=True, env=env, timeout=3600,
        )
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return 1
        other = json.loads(proc.stdout)["seconds"]

    width = max(len(k) for k in mine)
    print(f"backend: {tripack.BACKEND}")
    header = f"{'workload':<{width}}  {tripack.BACKEND:>10}"
    if other:
        header += f"  {'python':>10}  {'speedup':>8}"
    print(header)
    for name, secs in mine.items():
        line = f"{name:<{width}}  {secs:>9.4f}s"
        if other:
            o = other[name]
            line += f"  {o:>9.4f}s  {o / secs:>7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
