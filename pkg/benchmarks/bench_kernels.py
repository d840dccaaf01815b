"""Time the numba and numpy ring kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Both backend modules are imported directly, so the SECLOGREG_BACKEND flag
does not matter here.  Results are checked for equality before timing.
"""
import argparse
import timeit

import numpy as np

from seclogreg import _kernels_numba as nb
from seclogreg import _kernels_numpy as npk

MLO = np.uint64(2 ** 64 - 1)
MHI = np.uint64(2 ** 64 - 1)
F = 24
BITS = 128


def cases(a, b, rows):
    return {
        "add": lambda k: k.add(a, b, MLO, MHI),
        "mul": lambda k: k.mul(a, b, MLO, MHI),
        "sar": lambda k: k.sar(a, F, BITS, MLO, MHI),
        "sum_rows": lambda k: k.sum_rows(rows, MLO, MHI),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    a = rng.integers(0, 2 ** 64, size=(args.size, 2), dtype=np.uint64, endpoint=False)
    b = rng.integers(0, 2 ** 64, size=(args.size, 2), dtype=np.uint64, endpoint=False)
    rows = a.reshape(1000, -1, 2)

    print(f"{'kernel':<10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fn in cases(a, b, rows).items():
        assert np.array_equal(fn(npk), fn(nb)), name  # also warms up the jit
        t_np = min(timeit.repeat(lambda: fn(npk), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn(nb), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<10}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()
