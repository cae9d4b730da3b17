"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--paths N]

Times the Jack branching sweep and the path simulator on both backends and
checks that they agree.
"""

import argparse
import time

import numpy as np

from dunklhit import _backend
from dunklhit.partition_jack import get_context
from dunklhit.rootsys import build_root_system
from dunklhit.simulate import SimConfig, absorption_times


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_jack(kern, repeat):
    ctx = get_context(4 / 3, 3)
    plan = ctx.plan(40)
    x = np.random.default_rng(0).uniform(-1, 1, (3, 64))
    return best_of(lambda: kern.jack_levels(plan, x, 40), repeat)


def bench_sim(kern, repeat, paths):
    rs = build_root_system("B", 2)
    cfg = SimConfig(paths=paths, seed=1)
    return best_of(lambda: absorption_times(rs, [0.25] * 4, [2.0, 1.0], 1.0, cfg,
                                            nthreads=1, backend=kern)[0], repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--paths", type=int, default=2000)
    args = ap.parse_args()
    if _backend.compiled is None:
        print("compiled kernels unavailable; only the fallback can be timed")
    backends = [b for b in (_backend.compiled, _backend.fallback) if b is not None]
    rows = []
    for name, fn in (("jack_levels B3-plan P=40, 64 pts", lambda k: bench_jack(k, args.repeat)),
                     (f"simulate B2 {args.paths} paths", lambda k: bench_sim(k, args.repeat,
                                                                             args.paths))):
        res = {b.name: fn(b) for b in backends}
        line = {b: t for b, (t, _) in res.items()}
        agree = ""
        if len(res) == 2:
            a, b = (v for _, v in res.values())
            fin = np.isfinite(a) & np.isfinite(b)
            same = np.array_equal(np.isfinite(a), np.isfinite(b))
            diff = float(np.max(np.abs(a[fin] - b[fin]), initial=0.0))
            agree = f"max |diff| {diff:.1e}" + ("" if same else ", survivor sets differ")
        rows.append((name, line, agree))
    print(f"{'kernel':38s} {'cython s':>10s} {'python s':>10s} {'speed-up':>9s}  agreement")
    for name, line, agree in rows:
        c, p = line.get("cython"), line.get("python")
        sp = f"{p / c:8.1f}x" if c and p else "       -"
        print(f"{name:38s} {c or float('nan'):10.4f} {p:10.4f} {sp}  {agree}")


if __name__ == "__main__":
    main()
