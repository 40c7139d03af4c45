"""Acceptance suite: twelve criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``. Tolerances are pinned below and are not
to be loosened to make a criterion pass.
"""

import math
import sys
import time

import numpy as np
import pytest

from voltlab import algebra as alg
from voltlab import checks
from voltlab import dynamics as dyn
from voltlab.fnspace import DualFunctional, Grid

# pinned tolerances
C1_N, C1_TOL, C1_BAND = 4096, 5e-3, 0.20
C2_NS, C2_EXACT, C2_FACTOR = (256, 512, 1024), 1e-13, 1.5
C3_N, C3_NMAX, C3_TOL = 256, 10, 1e-11
C4_COUNT, C4_N, C4_NMAX, C4_MARGIN, C4_CHAIN = 100, 256, 100, 1e-9, 1e-10
C5_N, C5_TOL = 2048, 0.02
C6_COUNT, C6_DEGREE, C6_FACTOR = 20, 5, 0.1
C7_NS, C7_GAP = (8, 16), 1e3
C8_POINTS, C8_K, C8_SEED, C8_TRIALS, C8_MC = 200, 4, 42, 5, 100_000
C9_TARGETS, C9_DELTA, C9_NMAX, C9_OBS, C9_OBS_TOL, C9_TWO, C9_TWO_TOL = (
    20, 0.15, 1_000_000, 10_000, 1e-12, 10, 0.2)
C10_N, C10_n, C10_TOL = 1024, 30, 0.15
C11_NS, C11_STABILITY = (512, 1024, 2048), 1.25
C12_N, C12_NMAX, C12_SOBOLEV = 512, 60, 10


def _line(idx, title, result):
    verdict = "PASS" if result.passed else "FAIL"
    parts = "; ".join(f"{a.name} = {a.measured:.4g} ({a.tolerance})"
                      if isinstance(a.measured, float) else f"{a.name} ({a.tolerance})"
                      for a in result.assertions)
    return f"[{verdict}] criterion {idx:2d} {title}: {parts}"


def c01():
    return checks.volterra_calculus(C1_N, 8, 0.1, C1_TOL, C1_BAND)


def c02():
    return checks.commutator_identity(C2_NS, C2_EXACT, C2_FACTOR)


def c03():
    return checks.der_identity(C3_N, C3_NMAX, C3_TOL)


def c04():
    return checks.g1_random_witnesses(C4_COUNT, C4_N, C4_NMAX, seed=0,
                                      margin_tol=C4_MARGIN, chain_tol=C4_CHAIN)


def c05():
    return checks.angle_statistic(C5_N, (1.0, 2.0), 5, 40, C5_TOL)


def c06():
    return checks.weak_null(C6_COUNT, C6_DEGREE, 1024, 10, 100, C6_FACTOR, seed=0)


def c07():
    return checks.commutant(C7_NS, C7_GAP)


def c08():
    return checks.certify(C8_POINTS, C8_K, C8_SEED, C8_TRIALS, 2.0, 1.5, 0.1, C8_MC,
                          (0, 10, 50, 199))


def c09():
    return checks.kronecker(C9_TARGETS, C9_DELTA, C9_NMAX, C9_OBS, C9_OBS_TOL, C9_TWO,
                            C9_TWO_TOL, seed=0)


def c10():
    return checks.quasinilpotency(C10_N, C10_n, C10_TOL)


def c11():
    return checks.intertwining(C11_NS, 5, 1.0, C11_STABILITY, "2*x")


def c12():
    res = checks.pipeline(C12_N, C12_NMAX, seed=0, sobolev_samples=C12_SOBOLEV)
    # same pipeline with witnesses that satisfy C M R x = B R x exactly
    g = Grid(C12_N)
    T = alg.volterra(g)
    one = g.constant(1.0)
    W = alg.witness_for_vector(T, one)
    hf = DualFunctional(g, np.random.default_rng(1).standard_normal(C12_N), 2.0)
    rep = alg.g1_margin(W, one, hf, C12_NMAX)
    gs = alg.adjoint(W.C.compose(W.S)).apply(hf.samples)
    pts, cur = [], W.R.apply(one)
    for _ in range(C12_NMAX + 1):
        pts.append(cur)
        cur = T.apply(cur)
    le3 = dyn.le3_pipeline(pts, gs, one, c_bound=rep.constant, seed=1)
    res.assertions.append(checks.Assertion(
        "hypothesis-exact witnesses: measured c", "orbit bound", le3.c,
        f"<= {rep.constant:.6g}", le3.decay_ok and le3.certified))
    return res


CRITERIA = [
    (1, "Volterra calculus", c01),
    (2, "commutator identity", c02),
    (3, "der identity", c03),
    (4, "orbit inequality, random witnesses", c04),
    (5, "angle statistic", c05),
    (6, "weak-null probe", c06),
    (7, "joint commutant", c07),
    (8, "Gaussian certification", c08),
    (9, "Kronecker density", c09),
    (10, "quasinilpotency", c10),
    (11, "intertwining", c11),
    (12, "end-to-end pipeline", c12),
]


@pytest.mark.parametrize("idx,title,fn", CRITERIA, ids=[f"c{i:02d}" for i, _, _ in CRITERIA])
def test_criterion(idx, title, fn, capsys):
    result = fn()
    with capsys.disabled():
        print("\n" + _line(idx, title, result))
    failed = [a for a in result.assertions if not a.passed]
    assert not failed, "; ".join(f"{a.name}: {a.measured} vs {a.tolerance}" for a in failed)


if __name__ == "__main__":
    t0 = time.time()
    ok = True
    for idx, title, fn in CRITERIA:
        r = fn()
        ok &= r.passed
        print(_line(idx, title, r), flush=True)
    print(f"{sum(1 for _ in CRITERIA)} criteria in {time.time() - t0:.1f}s")
    sys.exit(0 if ok else 1)
