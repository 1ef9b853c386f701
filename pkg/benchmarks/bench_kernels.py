"""Time the numba and numpy kernel backends on the WordSim-sized problem.

    python benchmarks/bench_kernels.py [--repeat 20] [--n 437] [--d 100] [--c 50]

Reports the best-of-``repeat`` time per kernel call and for a whole FCM
fit, then the largest difference between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from fuzzyembed import _kernels
from fuzzyembed.fcm import FcmConfig, fcm_fit


def best_of(fn, repeat):
    fn()  # warm-up, includes numba compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=437)
    ap.add_argument("--d", type=int, default=100)
    ap.add_argument("--c", type=int, default=50)
    ap.add_argument("--m", type=float, default=1.1)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.n, args.d))
    V = rng.standard_normal((args.c, args.d))
    impls = {"numpy": _kernels.numpy_kernels, "numba": _kernels.numba_kernels}
    if impls["numba"] is None:
        print("numba not installed; only the numpy backend is timed")
        del impls["numba"]

    outputs = {}
    print(f"N={args.n} d={args.d} c={args.c} m={args.m}, best of {args.repeat}")
    print(f"{'kernel':<30}" + "".join(f"{k:>12}" for k in impls))
    rows = {}
    for name, k in impls.items():
        D2 = k.sq_distances(X, V)
        U = k.memberships_from_sq_distances(D2, args.m)
        outputs[name] = (D2, U, k.weighted_centers(X, U, args.m)[0])
        rows.setdefault("sq_distances", []).append(best_of(lambda: k.sq_distances(X, V), args.repeat))
        rows.setdefault("memberships", []).append(
            best_of(lambda: k.memberships_from_sq_distances(D2, args.m), args.repeat))
        rows.setdefault("weighted_centers", []).append(
            best_of(lambda: k.weighted_centers(X, U, args.m), args.repeat))
        rows.setdefault("weighted_objective", []).append(
            best_of(lambda: k.weighted_objective(U, D2, args.m), args.repeat))

    saved = _kernels._active
    try:
        for name, k in impls.items():
            _kernels._active = k
            rows.setdefault("fcm_fit (seed 0)", []).append(
                best_of(lambda: fcm_fit(X, FcmConfig(c=args.c, m=args.m, seed=0)), max(1, args.repeat // 10)))
    finally:
        _kernels._active = saved

    for label, times in rows.items():
        print(f"{label:<30}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times))

    if len(outputs) == 2:
        gaps = [np.max(np.abs(a - b)) for a, b in zip(outputs["numpy"], outputs["numba"])]
        print("max |numpy - numba|: distances %.2e, memberships %.2e, center sums %.2e" % tuple(gaps))


if __name__ == "__main__":
    main()
