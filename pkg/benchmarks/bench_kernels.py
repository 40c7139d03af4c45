"""Compare the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat R]

Both paths are imported side by side (the env flag only picks the default),
checked for bitwise agreement, then timed. The compiled path is warmed up
once so JIT time is not counted.
"""

import argparse
import math
import timeit

import numpy as np

from voltlab import _kernels
from voltlab._accel import HAVE_NUMBA


def bench(label, fn_np, fn_nb, args, repeat):
    r_np = fn_np(*args)
    if fn_nb is None:
        t = min(timeit.repeat(lambda: fn_np(*args), number=1, repeat=repeat))
        print(f"{label:38s} numpy {t * 1e3:9.2f} ms   numba   n/a")
        return
    r_nb = fn_nb(*args)
    same = np.array_equal(np.asarray(r_np), np.asarray(r_nb))
    t_np = min(timeit.repeat(lambda: fn_np(*args), number=1, repeat=repeat))
    t_nb = min(timeit.repeat(lambda: fn_nb(*args), number=1, repeat=repeat))
    print(f"{label:38s} numpy {t_np * 1e3:9.2f} ms   numba {t_nb * 1e3:9.2f} ms"
          f"   speedup {t_np / t_nb:6.1f}x   identical={same}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    nb = HAVE_NUMBA
    print(f"default backend: {_kernels.BACKEND}")
    for n in (256, 1024, 4096):
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        bench(f"sym_convolve N={n}", _kernels.sym_convolve_np,
              _kernels.sym_convolve_nb if nb else None, (a, b), args.repeat)
    th = np.array([2 * math.pi * (math.sqrt(2) - 1), 2 * math.pi * (math.sqrt(3) - 1)])
    for delta in (0.05, 0.01):
        tg = rng.uniform(-math.pi, math.pi, 2)
        bench(f"first_hit delta={delta}", _kernels.first_hit_np,
              _kernels.first_hit_nb if nb else None, (th, tg, delta, 0, 10 ** 7), args.repeat)


if __name__ == "__main__":
    main()
