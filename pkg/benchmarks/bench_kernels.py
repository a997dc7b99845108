"""Compare the compiled and pure-Python propagation kernels.

Runs the same basis propagation of the 2+2 test grid with each available
backend, checks the results agree, and prints wall times and the speedup.

    python3 benchmarks/bench_kernels.py --t 20 --repeat 3
"""

import argparse
import time

import numpy as np

from lingrid import _core
from lingrid.integrate import PropagationSettings, numeric_smatrix
from lingrid.model import section_v_model


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t", type=float, default=20.0, help="half-interval t' = t''")
    p.add_argument("--g0", type=float, default=5.0)
    p.add_argument("--dV", type=float, default=0.1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    grid = section_v_model(args.dV, args.g0, m=args.m, t=args.t)
    print(f"grid: 2+2, g0={args.g0}, dV={args.dV}, m={args.m}, t'=t''={args.t}, "
          f"rel_tol={args.rel_tol:g}")
    results = {}
    for name in sorted(_core.BACKENDS):
        settings = PropagationSettings(rel_tol=args.rel_tol, backend=name)
        sec, S = best_time(lambda: numeric_smatrix(grid, settings), args.repeat)
        results[name] = (sec, S)
        print(f"{name:>9}: {sec:9.4f} s  steps {S.info['steps']:7d}  "
              f"unitarity defect {S.info['unitarity_defect']:.2e}")
    if len(results) == 2:
        (tc, Sc), (tp, Sp) = results["compiled"], results["python"]
        diff = np.abs(Sc.matrix - Sp.matrix).max()
        print(f"max |S_compiled - S_python| = {diff:.2e}")
        print(f"speedup: {tp / tc:.1f}x")
    else:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
