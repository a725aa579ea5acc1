#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Runs the built-in scenarios and a batch of worst-case delay-inequality
integrations through both kernels, reporting wall time, speedup and the
largest deviation between backends.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from etcdelay.backend import available_backends
from etcdelay.halanay import HalanayParams, integrate_comparison
from etcdelay.scenarios import BUILTINS
from etcdelay.sim import simulate


def time_call(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_scenarios(repeats):
    rows = []
    for name in sorted(BUILTINS):
        system, sp, cfg, sim_cfg, mode, controller = BUILTINS[name].build()
        cfg = cfg.bound_to(controller, system.matrices.B)
        results = {}
        for backend_name in available_backends():
            dt, res = time_call(
                lambda b=backend_name: simulate(system, controller, cfg, sim_cfg,
                                                backend_name=b),
                repeats)
            results[backend_name] = (dt, res)
        rows.append((name, results))
    return rows


def bench_comparison(repeats):
    params = [HalanayParams(a=1.0 + 0.1 * i, b=0.3, alpha=0.2, beta=0.8, r=2.0)
              for i in range(10)]
    results = {}
    for backend_name in available_backends():
        def run(b=backend_name):
            return [integrate_comparison(p, step=0.01, horizon=40.0, backend_name=b)
                    for p in params]
        dt, out = time_call(run, repeats)
        results[backend_name] = (dt, out)
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled kernel missing; timing the fallback only\n")

    print(f"\n{'scenario':<22}{'python [ms]':>14}{'compiled [ms]':>16}"
          f"{'speedup':>10}{'max dev':>12}")
    for name, results in bench_scenarios(args.repeats):
        tp, rp = results["python"]
        line = f"{name:<22}{tp * 1e3:>14.2f}"
        if "compiled" in results:
            tc, rc = results["compiled"]
            dev = float(np.max(np.abs(rc.states - rp.states)))
            line += f"{tc * 1e3:>16.2f}{tp / tc:>10.1f}{dev:>12.2e}"
        print(line)

    results = bench_comparison(args.repeats)
    tp, op = results["python"]
    line = f"{'delay-inequality x10':<22}{tp * 1e3:>14.2f}"
    if "compiled" in results:
        tc, oc = results["compiled"]
        dev = max(float(np.max(np.abs(vc - vp)))
                  for (_, vc), (_, vp) in zip(oc, op))
        line += f"{tc * 1e3:>16.2f}{tp / tc:>10.1f}{dev:>12.2e}"
    print(line)


if __name__ == "__main__":
    main()
