"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Times the three kernels on Ensemble-Projection-sized inputs and a full EP fit
with each backend swapped in, and checks that both backends agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from curl_cotrain import _kernels_py, kernels
from curl_cotrain.ensemble_projection import EpConfig, fit


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick):
    rng = np.random.default_rng(0)
    # one EP member: r*n prototype rows, r classes, input dim d
    r, n, d = (10, 3, 60) if quick else (30, 6, 180)
    X = rng.normal(size=(r * n, d))
    y = np.repeat(np.arange(r, dtype=np.int64), n)
    params = rng.normal(size=r * (d + 1)) * 0.01
    pool = rng.normal(size=(600 if quick else 3000, d))
    seeds = rng.choice(len(pool), size=r, replace=False).astype(np.int64)
    return {
        "softmax_loss_grad": lambda b: b.softmax_loss_grad(params, X, y, r, 1 / 15),
        "seed_diversity": lambda b: b.seed_diversity(pool, seeds),
        "expand_prototypes": lambda b: b.expand_prototypes(pool, seeds, n),
    }, pool


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, atol=1e-12)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="smaller inputs")
    args = p.parse_args(argv)

    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled extension not built; only the fallback is available")
        return 1
    py = _kernels_py
    kernel_cases, pool = cases(args.quick)

    print(f"{'kernel':<20} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}  agree")
    for name, call in kernel_cases.items():
        t_py = best_of(lambda: call(py), args.repeat)
        t_cy = best_of(lambda: call(cy), args.repeat)
        print(f"{name:<20} {1e3 * t_py:11.3f} {1e3 * t_cy:12.3f} {t_py / t_cy:8.2f}x  {agree(call(py), call(cy))}")

    cfg = EpConfig(T=10, r=10, n=3, m=20) if args.quick else EpConfig(T=30, r=30, n=6, m=50)
    timings, outputs = {}, {}
    saved = kernels._impl
    try:
        for label, backend in (("numpy", py), ("cython", cy)):
            kernels._impl = backend
            t0 = time.perf_counter()
            ens = fit(pool, cfg)
            timings[label] = time.perf_counter() - t0
            outputs[label] = ens.project(pool[:50])
    finally:
        kernels._impl = saved
    print(
        f"{'EP fit (T=%d)' % cfg.T:<20} {1e3 * timings['numpy']:11.1f} {1e3 * timings['cython']:12.1f} "
        f"{timings['numpy'] / timings['cython']:8.2f}x  {np.allclose(outputs['numpy'], outputs['cython'], atol=1e-8)}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
