"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both implementations are imported directly, so CARE2VEC_NUMBA does not
matter here. The first numba call (compilation) is excluded from timings.
"""
import argparse
import timeit

import numpy as np

from care2vec import kernels
from care2vec._accel import HAVE_NUMBA
from care2vec.dataset import make_scadi_like
from care2vec.numerics import make_rng


def _split_case(n_rows):
    d = make_scadi_like(seed=0)
    rows = make_rng(1).integers(0, d.n_rows, size=n_rows)
    return d.features[rows], d.labels[rows]


def _adam_case(size):
    rng = make_rng(2)
    return [rng.normal(size=size) for _ in range(3)] + [rng.uniform(size=size)]


def bench(fn, repeat):
    fn()  # warm-up
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy timings are meaningful")

    rows = []
    for n in (63, 200, 1000):
        x, y = _split_case(n)
        for name, fn in (("numba", kernels.split_gains_numba), ("numpy", kernels.split_gains_numpy)):
            if name == "numba" and not HAVE_NUMBA:
                continue
            t = bench(lambda: fn(x, y, 7, kernels.GINI), args.repeat)
            rows.append((f"split_gains {n}x205", name, t))
    for size in (10_000, 66_000, 140_000):
        for name, fn in (("numba", kernels.adam_update_numba), ("numpy", kernels.adam_update_numpy)):
            if name == "numba" and not HAVE_NUMBA:
                continue
            p, g, m, v = _adam_case(size)
            t = bench(lambda: fn(p, g, m, v, 1e-3, 0.9, 0.999, 1e-8, 10), args.repeat)
            rows.append((f"adam_update {size}", name, t))

    print(f"{'kernel':24s} {'backend':8s} {'time':>12s}  speedup")
    base = {k: t for k, b, t in rows if b == "numpy"}
    for kernel, backend, t in rows:
        print(f"{kernel:24s} {backend:8s} {t * 1e6:10.1f}us  {base[kernel] / t:6.2f}x")


if __name__ == "__main__":
    main()
