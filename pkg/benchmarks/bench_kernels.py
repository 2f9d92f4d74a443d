"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call includes compilation (or a cache load); it is reported
separately and excluded from the steady-state figures.
"""

import argparse
import time

import numpy as np

from bispectral import _accel


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    t = rng.uniform(-20.0, 20.0, 200_000)
    state = np.concatenate([np.linspace(-6.0, 6.0, 8), rng.normal(size=8)])
    exps = rng.integers(0, 4, size=(60, 6))
    coeffs = rng.normal(size=60)
    pts = rng.uniform(-1.0, 1.0, size=(20_000, 6))
    return {
        "airy (200k points)": (
            lambda k: k[0](t, _accel.U_COEF, _accel.V_COEF),
        ),
        "cm_rhs n=8 (x2000)": (
            lambda k: [k[1](state, 8) for _ in range(2000)],
        ),
        "dopri_step n=8 (x2000)": (
            lambda k: [k[2](state, 8, 1e-3, _accel._A, _accel._E) for _ in range(2000)],
        ),
        "poly_eval 60 terms x 20k points": (
            lambda k: k[3](exps, coeffs, pts),
        ),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _accel.NUMBA_KERNELS is None:
        print("numba backend disabled (BISPECTRAL_NUMBA=0 or numba missing); numpy only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':34s} {'numpy':>10s} {'numba':>10s} {'first':>10s} {'speedup':>8s}")
    for name, (run,) in cases(rng).items():
        t_np = _best(lambda: run(_accel.NUMPY_KERNELS), args.repeat)
        if _accel.NUMBA_KERNELS is None:
            print(f"{name:34s} {t_np:10.4f} {'-':>10s} {'-':>10s} {'-':>8s}")
            continue
        t0 = time.perf_counter()
        run(_accel.NUMBA_KERNELS)
        first = time.perf_counter() - t0
        t_nb = _best(lambda: run(_accel.NUMBA_KERNELS), args.repeat)
        print(f"{name:34s} {t_np:10.4f} {t_nb:10.4f} {first:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
