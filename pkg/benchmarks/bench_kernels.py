"""Timing comparison of the compiled and pure-numpy group kernels.

Run as a script: ``python benchmarks/bench_kernels.py [--n 200000] [--J 20000]``.
"""

import argparse
import time

import numpy as np

from sgslasso.backend import available_backends
from sgslasso.prox import GroupPartition


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--J", type=int, default=20_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    groups = GroupPartition.contiguous(args.n, args.J)
    v = rng.standard_normal(args.n)
    d = rng.standard_normal(args.n)
    thr = 0.5 * np.abs(rng.standard_normal(groups.num_groups)) + 0.1

    backends = available_backends()
    print(f"n={args.n} J={args.J} backends={sorted(backends)}")
    results = {}
    for name, mod in sorted(backends.items()):
        gn = mod.group_norms(v, groups.ptr, groups.idx)
        res, norms = mod.group_soft_threshold(v, groups.ptr, groups.idx, thr)
        outside = (norms > thr).astype(np.uint8)
        coef = np.where(outside.astype(bool), thr / np.maximum(norms, 1e-300), 0.0)
        theta = (np.abs(v) > 0.1).astype(float)
        timings = {
            "group_norms": time_call(
                mod.group_norms, v, groups.ptr, groups.idx, repeats=args.repeats
            ),
            "group_soft_threshold": time_call(
                mod.group_soft_threshold, v, groups.ptr, groups.idx, thr,
                repeats=args.repeats,
            ),
            "jacobian_group_apply": time_call(
                mod.jacobian_group_apply, d, theta, res, norms, coef, outside,
                groups.ptr, groups.idx, repeats=args.repeats,
            ),
        }
        results[name] = (timings, gn, res)
        for op, sec in timings.items():
            print(f"{name:10s} {op:22s} {sec * 1e3:9.3f} ms")

    if len(results) == 2:
        (t1, gn1, res1), (t2, gn2, res2) = results.values()
        err = max(
            float(np.max(np.abs(gn1 - gn2))), float(np.max(np.abs(res1 - res2)))
        )
        print(f"cross-backend max abs difference: {err:.3e}")
        for op in t1:
            ratio = t2[op] / t1[op]
            print(f"{op:22s} speed ratio (second/first): {ratio:6.2f}x")


if __name__ == "__main__":
    main()
