"""Orbits, angle statistics and density searches.

Orbit norms are carried in log form: ``||V^n 1||`` is ``~1/n!`` and
underflows double precision near n = 170.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .fnspace import DualFunctional, GridFunction, conjugate_exponent, weighted_norm
from .operators import LinOp, SeqVector

__all__ = [
    "OrbitRecord",
    "Orbit",
    "orbit",
    "angle_statistic",
    "WeakNullReport",
    "weak_null_test",
    "projective_obstruction",
    "obstruction_violation",
    "DensityResult",
    "kronecker_density_search",
    "two_term_decomposition",
    "TwoTermResult",
    "Le3Result",
    "le3_pipeline",
    "write_orbit_csv",
    "write_density_json",
]


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    n: int
    log_norm: float
    unit: np.ndarray
    functional_values: tuple = ()


@dataclass(eq=False)
class Orbit:
    """Normalised orbit ``T^n x = exp(log_norm) * unit`` for n = 0..len-1.

    ``terminated`` is set when some iterate was exactly zero; the records
    stop at the last nonzero iterate.
    """

    records: list
    p: float
    terminated: bool = False

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def log_norms(self) -> np.ndarray:
        return np.array([r.log_norm for r in self.records])

    @property
    def units(self) -> np.ndarray:
        return np.array([r.unit for r in self.records])

    def functional_matrix(self) -> np.ndarray:
        return np.array([r.functional_values for r in self.records])


def _unpack(x):
    """(samples, weight, p) for GridFunction / SeqVector / ndarray."""
    if isinstance(x, GridFunction):
        return x.samples, x.grid.h, x.p
    if isinstance(x, SeqVector):
        return x.entries, 1.0, x.p
    return np.asarray(x), 1.0, 2.0


def _functional_samples(g):
    if isinstance(g, DualFunctional):
        return g.samples
    if isinstance(g, GridFunction):
        return g.samples
    if isinstance(g, SeqVector):
        return g.entries
    return np.asarray(g)


def orbit(T: LinOp, x, n_max: int, functionals: Sequence = (), p: float | None = None) -> Orbit:
    """Iterate ``u <- T u`` with renormalisation after every step.

    ``functional_values[j]`` of record n is ``pair(g_j, T^n x) / ||T^n x||_p``.
    """
    v, w, p0 = _unpack(x)
    p = p0 if p is None else p
    nrm = weighted_norm(v, p, w)
    if nrm == 0:
        raise ValueError("orbit of the zero vector")
    gs = [np.asarray(_functional_samples(g)) for g in functionals]
    u = v / nrm
    log_norm = math.log(nrm)
    records = []
    terminated = False

    def rec(n):
        vals = tuple(w * np.vdot(g, u) for g in gs)
        if all(np.isrealobj(g) for g in gs) and np.isrealobj(u):
            vals = tuple(float(c.real) for c in vals)
        uu = u.copy()
        uu.setflags(write=False)
        records.append(OrbitRecord(n, log_norm, uu, vals))

    rec(0)
    for n in range(1, n_max + 1):
        u = T.apply(u)
        s = weighted_norm(u, p, w)
        if s == 0 or not math.isfinite(s):
            terminated = True
            break
        u = u / s
        log_norm += math.log(s)
        rec(n)
    return Orbit(records, p, terminated)


def angle_statistic(T: LinOp, x, f, n_max: int, p: float | None = None) -> np.ndarray:
    """``a_n = |pair(f, T^n x)| / (||f||_q ||T^n x||_p)`` for n = 0..n_max."""
    fs = _functional_samples(f)
    _, w, p0 = _unpack(x)
    p = p0 if p is None else p
    fn = weighted_norm(fs, conjugate_exponent(p), w)
    if fn == 0:
        raise ValueError("zero functional")
    orb = orbit(T, x, n_max, [fs], p)
    if orb.terminated:
        raise ValueError(f"orbit vanished after {len(orb) - 1} steps")
    return np.abs(orb.functional_matrix()[:, 0]) / fn


@dataclass(eq=False)
class WeakNullReport:
    """Normalised functional values along an orbit.

    ``ratios[n, j] = |pair(g_j, T^n x)| / ||T^n x||_p``.
    """

    ratios: np.ndarray
    n_ref: int

    @property
    def final(self) -> float:
        """sup over functionals at the last step."""
        return float(self.ratios[-1].max())

    @property
    def decay(self) -> np.ndarray:
        """Per-functional ratio (value at n_max) / (value at n_ref)."""
        ref = self.ratios[self.n_ref]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(ref > 0, self.ratios[-1] / ref, 0.0)

    def is_null(self, threshold: float) -> bool:
        return self.final <= threshold


def weak_null_test(T: LinOp, x, test_functionals: Sequence, n_max: int, n_ref: int = 10,
                   p: float | None = None) -> WeakNullReport:
    """Probe ``T^n x / ||T^n x|| -> 0`` weakly against finitely many functionals.

    This can only falsify, never certify, weak convergence.
    """
    if not 0 <= n_ref <= n_max:
        raise ValueError("need 0 <= n_ref <= n_max")
    orb = orbit(T, x, n_max, test_functionals, p)
    if orb.terminated:
        raise ValueError(f"orbit vanished after {len(orb) - 1} steps")
    return WeakNullReport(np.abs(orb.functional_matrix()), n_ref)


# ---------------------------------------------------------------------------
# Kronecker sets
# ---------------------------------------------------------------------------


def obstruction_violation(f, g, s: int | None = None, t: int | None = None) -> float:
    """``max | |g_t f_s| - |g_s f_t| |`` over index pairs (or one given pair)."""
    f = np.asarray(f)
    g = np.asarray(g)
    if s is not None and t is not None:
        return float(abs(abs(g[t] * f[s]) - abs(g[s] * f[t])))
    af, ag = np.abs(f), np.abs(g)
    return float(np.max(np.abs(np.outer(af, ag) - np.outer(ag, af))))


def projective_obstruction(f, angles, samples) -> float:
    """Largest violation of ``|g_t f_s| = |g_s f_t|`` over ``g = z T^n f``.

    ``samples`` is an iterable of ``(z, n)`` pairs. For the unimodular
    diagonal ``T`` the invariant is exact, so the result sits at rounding
    level.
    """
    f = np.asarray(f, dtype=complex)
    if not np.any(f):
        raise ValueError("f is identically zero")
    th = np.asarray(angles, dtype=float)
    if f.shape != th.shape:
        raise ValueError("f and angles differ in length")
    samples = list(samples)
    zs, ns = zip(*samples) if samples else ((), ())
    z = np.asarray(zs, dtype=complex)
    n = np.asarray(ns, dtype=np.int64)
    if z.size == 0:
        return 0.0
    g = z[:, None] * np.exp(1j * (n[:, None] * th[None, :])) * f[None, :]
    af = np.abs(f)
    ag = np.abs(g)
    # |g_t| |f_s| - |g_s| |f_t| for all (s, t)
    viol = np.abs(ag[:, None, :] * af[None, :, None] - ag[:, :, None] * af[None, None, :])
    return float(viol.max())


@dataclass
class DensityResult:
    angles: list
    target: list
    delta: float
    n_found: int | None
    elapsed_steps: int

    @property
    def found(self) -> bool:
        return self.n_found is not None

    def to_json(self) -> dict:
        return {"angles": self.angles,
                "target": [[float(c.real), float(c.imag)] for c in self.target],
                "delta": self.delta, "n_found": self.n_found,
                "elapsed_steps": self.elapsed_steps}


def kronecker_density_search(angles, target, delta: float, n_max: int,
                             n_start: int = 0) -> DensityResult:
    """Least ``n`` in [n_start, n_max] with ``max_j |e^{i n theta_j} - target_j| < delta``.

    Plain linear scan with early exit. A hit is re-checked in numpy before
    it is returned.
    """
    th = np.asarray(angles, dtype=float)
    tg = np.asarray(target, dtype=complex)
    if th.shape != tg.shape:
        raise ValueError("angles and target differ in length")
    if np.any(np.abs(np.abs(tg) - 1) > 1e-9):
        raise ValueError("target must be unimodular")
    n = n_start
    args = np.angle(tg)
    while True:
        hit = _kernels.first_hit(th, args, delta, n, n_max)
        if hit < 0:
            return DensityResult(th.tolist(), tg.tolist(), delta, None, n_max - n_start + 1)
        if np.max(np.abs(np.exp(1j * hit * th) - tg)) < delta:
            return DensityResult(th.tolist(), tg.tolist(), delta, hit, hit - n_start + 1)
        n = hit + 1  # borderline rounding disagreement; keep scanning


@dataclass
class TwoTermResult:
    k: int | None
    m: int | None
    r: float
    error: float


def two_term_decomposition(angles, g, delta: float, n_max: int) -> TwoTermResult:
    """Approximate ``g`` (with ``max|g| <= 2``) by ``r (T^k 1 + T^m 1)``.

    Uses ``r = max|g| / 2`` and splits each ``g_j / r`` into two unimodular
    numbers ``e^{i(a +- b)}``, ``cos b = |g_j| / (2r)``; each factor is then
    found by :func:`kronecker_density_search` to accuracy ``delta / 2``.
    """
    g = np.asarray(g, dtype=complex)
    th = np.asarray(angles, dtype=float)
    norm = float(np.max(np.abs(g)))
    if norm > 2 + 1e-12:
        raise ValueError("need max|g| <= 2")
    if norm == 0:
        return TwoTermResult(0, 0, 0.0, 0.0)
    r = norm / 2
    w = g / r
    a = np.angle(w)
    b = np.arccos(np.clip(np.abs(w) / 2, 0.0, 1.0))
    g1, g2 = np.exp(1j * (a + b)), np.exp(1j * (a - b))
    hk = kronecker_density_search(th, g1, delta / 2, n_max)
    hm = kronecker_density_search(th, g2, delta / 2, n_max)
    if not (hk.found and hm.found):
        return TwoTermResult(hk.n_found, hm.n_found, r, math.inf)
    approx = r * (np.exp(1j * hk.n_found * th) + np.exp(1j * hm.n_found * th))
    return TwoTermResult(hk.n_found, hm.n_found, r, float(np.max(np.abs(approx - g))))


# ---------------------------------------------------------------------------
# scaled-set pipeline
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Le3Result:
    """Outcome of :func:`le3_pipeline`.

    ``refused`` holds a reason string when no certificate request was made
    or the certifier failed.
    """

    b: complex
    decay_constants: np.ndarray
    c: float
    decay_ok: bool
    failing_n: int | None
    scaled_norms: np.ndarray
    growth_ok: bool
    certificate: object = None
    refused: str | None = None

    @property
    def certified(self) -> bool:
        return self.refused is None and self.certificate is not None


def le3_pipeline(points: Sequence, u, y, c_bound: float | None = None, *, k: int = 4,
                 trials: int = 5, seed: int = 0, type_p: float = 2.0, decay_q: float = 1.5,
                 norm_p: float | None = None) -> Le3Result:
    """Check the scaled-set hypotheses for ``x_n`` and certify ``y`` is isolated.

    1. ``b = pair(u, y)`` must be nonzero; ``f = u / conj(b)`` has ``pair(f, y) = 1``.
    2. Decay: ``|pair(u, x_n)| <= c (n+1)^{-1} ||x_n||``. The measured
       ``c = max_n (n+1) |pair(u, x_n)| / ||x_n||`` is reported and compared
       with ``c_bound`` when one is given.
    3. ``y_n = x_n / pair(f, x_n)`` then satisfies ``||y_n|| >= |b| (n+1) / c``.
    4. ``{y_n - y}`` goes to :func:`voltlab.weakclosure.gaussian_certificate`.
    """
    from .weakclosure import CertificateFailure, gaussian_certificate

    us = np.asarray(_functional_samples(u))
    ys, w, p0 = _unpack(y)
    p = p0 if norm_p is None else norm_p
    b = w * np.vdot(us, ys)
    if b == 0:
        raise ValueError("pair(u, y) = 0: y is not on the affine hyperplane f = 1")
    fs = us / np.conj(b)
    xs = [np.asarray(_unpack(x)[0]) for x in points]
    nx = np.array([weighted_norm(x, p, w) for x in xs])
    ux = np.array([w * np.vdot(us, x) for x in xs])
    idx = np.arange(len(xs))
    with np.errstate(divide="ignore", invalid="ignore"):
        cn = np.where(nx > 0, (idx + 1) * np.abs(ux) / nx, 0.0)
    c = float(cn.max()) if len(cn) else 0.0
    failing = None
    if c_bound is not None:
        bad = np.flatnonzero(cn > c_bound * (1 + 1e-9))
        failing = int(bad[0]) if bad.size else None
    decay_ok = failing is None
    fx = w * np.array([np.vdot(fs, x) for x in xs])
    keep = np.flatnonzero(np.abs(fx) > 0)
    ysc = [xs[i] / fx[i] for i in keep]
    scaled_norms = np.array([weighted_norm(v, p, w) for v in ysc])
    growth_ok = bool(np.all(scaled_norms * (1 + 1e-9) >= abs(b) * (keep + 1) / c)) if c > 0 else True
    res = Le3Result(complex(b) if np.iscomplexobj(b) else float(np.real(b)), cn, c, decay_ok,
                    failing, scaled_norms, growth_ok)
    if not decay_ok:
        res.refused = f"decay hypothesis fails at n = {failing}"
        return res
    if not len(ysc):
        res.refused = "no point with pair(f, x_n) != 0"
        return res
    cert = gaussian_certificate([v for v in ysc], ys, k=k, trials=trials, seed=seed,
                                weight=w, norm_p=p, type_p=type_p, decay_q=decay_q)
    res.certificate = cert
    if isinstance(cert, CertificateFailure):
        res.refused = f"certifier failed: {cert.reason}"
    return res


# ---------------------------------------------------------------------------
# dumps
# ---------------------------------------------------------------------------


def write_orbit_csv(orb: Orbit, path) -> Path:
    """CSV rows (n, log_norm, functional_1, ...); complex values get _re/_im pairs."""
    path = Path(path)
    fm = orb.functional_matrix() if orb.records and orb.records[0].functional_values else None
    cplx = fm is not None and np.iscomplexobj(fm)
    m = 0 if fm is None else fm.shape[1]
    header = ["n", "log_norm"]
    for j in range(m):
        header += [f"functional_{j + 1}_re", f"functional_{j + 1}_im"] if cplx else [f"functional_{j + 1}"]
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in orb.records:
            row = [r.n, repr(float(r.log_norm))]
            for v in r.functional_values:
                row += [repr(float(np.real(v))), repr(float(np.imag(v)))] if cplx else [repr(float(v))]
            wr.writerow(row)
    return path


def write_density_json(result: DensityResult, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(result.to_json(), indent=2, sort_keys=True))
    return path
