"""Hot loops.

Each kernel exists twice: a compiled version (``*_nb``) and a numpy version
(``*_np``). The public names at the bottom dispatch on
:data:`voltlab._accel.USE_NUMBA`. Both versions accumulate in the same
order, so their outputs are bitwise identical.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# symmetric discrete convolution
# ---------------------------------------------------------------------------
#
# c_i = sum_{k<=i} a_k b_{i-k}, but summed as pairs (a_k b_{i-k} + a_{i-k} b_k)
# for k < i/2 in increasing k, then the middle term a_{i/2} b_{i/2}. Swapping
# a and b swaps the two addends of every pair, which IEEE addition does not
# see, so sym_convolve(a, b) == sym_convolve(b, a) exactly.


def _sym_convolve_py(a, b, out):
    n = a.shape[0]
    for i in range(n):
        s = out[i] * 0
        half = i // 2
        stop = half if i % 2 == 0 else half + 1
        for k in range(stop):
            s += a[k] * b[i - k] + a[i - k] * b[k]
        if i % 2 == 0:
            s += a[half] * b[half]
        out[i] = s
    return out


_sym_convolve_nb = njit(_sym_convolve_py)


def sym_convolve_np(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[0]
    out = np.zeros(n, dtype=np.result_type(a, b))
    for k in range((n + 1) // 2):
        out[2 * k] += a[k] * b[k]
        if 2 * k + 1 < n:
            out[2 * k + 1:] += a[k] * b[k + 1:n - k] + a[k + 1:n - k] * b[k]
    return out


def sym_convolve_nb(a, b):
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    dtype = np.result_type(a, b)
    out = np.zeros(a.shape[0], dtype=dtype)
    return _sym_convolve_nb(a.astype(dtype, copy=False), b.astype(dtype, copy=False), out)


# ---------------------------------------------------------------------------
# first hit of an irrational rotation in a polydisc neighbourhood
# ---------------------------------------------------------------------------


def _first_hit_py(angles, target_args, delta, n_start, n_max):
    m = angles.shape[0]
    for n in range(n_start, n_max + 1):
        ok = True
        for j in range(m):
            d = 2.0 * abs(np.sin(0.5 * (n * angles[j] - target_args[j])))
            if d >= delta:
                ok = False
                break
        if ok:
            return n
    return -1


_first_hit_nb = njit(_first_hit_py)


def first_hit_nb(angles, target_args, delta, n_start, n_max):
    return int(_first_hit_nb(np.ascontiguousarray(angles, dtype=np.float64),
                             np.ascontiguousarray(target_args, dtype=np.float64),
                             float(delta), int(n_start), int(n_max)))


def first_hit_np(angles, target_args, delta, n_start, n_max, chunk=1 << 16):
    angles = np.asarray(angles, dtype=np.float64)
    target_args = np.asarray(target_args, dtype=np.float64)
    for lo in range(int(n_start), int(n_max) + 1, chunk):
        n = np.arange(lo, min(lo + chunk, int(n_max) + 1), dtype=np.int64)
        d = 2.0 * np.abs(np.sin(0.5 * (n[:, None] * angles[None, :] - target_args[None, :])))
        hit = np.flatnonzero(np.all(d < delta, axis=1))
        if hit.size:
            return int(n[hit[0]])
    return -1


if USE_NUMBA:
    sym_convolve = sym_convolve_nb
    first_hit = first_hit_nb
else:
    sym_convolve = sym_convolve_np
    first_hit = first_hit_np

BACKEND = "numba" if USE_NUMBA else "numpy"
