"""Gaussian certificates that a point is not in the weak closure of a set.

Given points ``x_n`` and a target ``y``, draw ``k`` random functionals
``u_j = sum_n gamma_n^(j) f_n`` from a family of rescaled norming
functionals ``f_n`` of ``x_n - y``. If every ``x_n`` has
``max_j |u_j(x_n - y)| >= eps`` then the weakly open set
``{z : max_j |u_j(z - y)| < eps}`` contains ``y`` and no ``x_n``.

Scalars are real here: complex inputs are rejected.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import erf

from .fnspace import GridFunction, conjugate_exponent, weighted_norm
from .operators import SeqVector

__all__ = [
    "NormingFamily",
    "build_norming_family",
    "WeakClosureCertificate",
    "CertificateFailure",
    "gaussian_certificate",
    "trial_rng",
    "SmallBallRow",
    "small_ball_bound_check",
]

MAX_STORED_DRAWS = 10_000


def _as_rows(points, y, weight, norm_p):
    """Stack points as rows; infer weight and norm exponent from the types."""
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    first = pts[0]
    if isinstance(first, GridFunction):
        weight = first.grid.h if weight is None else weight
        norm_p = first.p if norm_p is None else norm_p
    elif isinstance(first, SeqVector):
        norm_p = first.p if norm_p is None else norm_p
    X = np.array([_raw(p) for p in pts])
    yy = np.asarray(_raw(y)) if y is not None else np.zeros(X.shape[1])
    if yy.ndim == 0:
        yy = np.full(X.shape[1], float(yy))
    if np.iscomplexobj(X) or np.iscomplexobj(yy):
        raise ValueError("only real scalars are supported")
    return X.astype(float), yy.astype(float), (1.0 if weight is None else weight), (2.0 if norm_p is None else norm_p)


def _raw(v):
    if isinstance(v, GridFunction):
        return v.samples
    if isinstance(v, SeqVector):
        return v.entries
    return np.asarray(v)


@dataclass(eq=False)
class NormingFamily:
    """Rows ``f_n`` with ``||f_n|| = ||x_n - y||^{-q/p}`` and
    ``pair(f_n, x_n - y) = ||x_n - y||^{(p-q)/p}``.

    ``sum_sq_norms`` is the truncated ``sum ||f_n||^2``; ``ell_r_sum`` is the
    truncated ``sum |pair(f_n, x_n - y)|^{-r}`` with ``r = pq/(p-q)``.
    ``tail_exponent`` is the fitted decay rate ``s`` of
    ``|pair(f_n, x_n - y)|^{-1} ~ n^{-s}`` over the second half of the
    indices; ``in_ell_r`` means ``s * r > 1``. ``flags`` lists caveats.
    """

    functionals: np.ndarray
    weight: float
    norm_p: float
    type_p: float
    decay_q: float
    point_norms: np.ndarray
    pair_values: np.ndarray
    functional_norms: np.ndarray
    sum_sq_norms: float
    r: float
    ell_r_sum: float
    tail_exponent: float
    in_ell_r: bool
    flags: list = field(default_factory=list)

    def __len__(self):
        return self.functionals.shape[0]


def _norming_rows(D, weight, norm_p, type_p, decay_q, strict):
    if not 1 < norm_p < math.inf:
        raise ValueError(f"norming needs 1 < p < inf, got {norm_p}")
    norms = np.array([weighted_norm(d, norm_p, weight) for d in D])
    if strict and np.any(norms == 0):
        i = int(np.flatnonzero(norms == 0)[0])
        raise ValueError(f"point {i} coincides with the target")
    F = np.zeros_like(D)
    ok = norms > 0
    mag = np.abs(D[ok]) / norms[ok, None]
    F[ok] = np.sign(D[ok]) * mag ** (norm_p - 1) * (norms[ok] ** (-decay_q / type_p))[:, None]
    return F, norms


def build_norming_family(points: Sequence, y=None, type_p: float = 2.0, decay_q: float = 1.5,
                         *, weight: float | None = None, norm_p: float | None = None,
                         _strict: bool = True) -> NormingFamily:
    """Rescaled norming functionals of ``x_n - y``.

    ``type_p`` is the type exponent of the dual space and ``decay_q`` the
    exponent with ``sum ||x_n - y||^{-q} < inf``; the classical regime is
    ``1 <= q < p <= 2``. ``q == p`` (e.g. the bare Hilbert-space condition
    ``sum ||x_n||^{-2} < inf``) is accepted but flagged, since the pair
    values are then constant and not in any l_r.
    """
    if not 1 <= decay_q <= type_p <= 2:
        raise ValueError(f"need 1 <= q <= p <= 2, got p={type_p}, q={decay_q}")
    X, yy, w, np_ = _as_rows(points, y, weight, norm_p)
    D = X - yy[None, :]
    F, norms = _norming_rows(D, w, np_, type_p, decay_q, _strict)
    pairs = w * np.einsum("ij,ij->i", F, D)
    fnorms = np.array([weighted_norm(f, conjugate_exponent(np_), w) for f in F])
    flags = []
    if decay_q == type_p:
        r = math.inf
        ell = math.inf
        flags.append("outside l_r summability: q == p, pair values do not decay")
    else:
        r = type_p * decay_q / (type_p - decay_q)
        with np.errstate(divide="ignore"):
            ell = float(np.sum(np.where(pairs > 0, pairs, np.nan) ** (-r)))
    s = _tail_exponent(pairs)
    in_ell = bool(math.isfinite(r) and s * r > 1)
    if math.isfinite(r) and not in_ell:
        flags.append(f"outside l_r summability at truncation: fitted decay {s:.3g}, r = {r:.3g}")
    return NormingFamily(F, w, np_, type_p, decay_q, norms, pairs, fnorms,
                         float(np.sum(fnorms ** 2)), r, ell, s, in_ell, flags)


def _tail_exponent(pairs: np.ndarray) -> float:
    """Least-squares slope ``s`` of ``log(1/pair_n) ~ -s log(n+1)``, second half."""
    n = np.arange(1, len(pairs) + 1)
    lo = len(pairs) // 2
    sel = slice(lo, None)
    pv = pairs[sel]
    if len(pv) < 2 or np.any(pv <= 0):
        return 0.0
    slope = np.polyfit(np.log(n[sel]), np.log(pv), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Philox generator for ``(seed, trial)``; standard normals via numpy's ziggurat."""
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def _draw(seed: int, trial: int, truncation: int, k: int) -> np.ndarray:
    # drawn point-major so a prefix of points sees the same coefficients
    return trial_rng(seed, trial).standard_normal((truncation, k)).T


@dataclass(eq=False)
class WeakClosureCertificate:
    k: int
    functionals: np.ndarray
    epsilon: float
    margins: np.ndarray
    seed: int
    trial: int
    theory_bound: float
    a_priori_epsilon: float
    weight: float
    draws: np.ndarray | None = None
    flags: list = field(default_factory=list)

    def is_valid(self) -> bool:
        return bool(np.all(self.margins >= self.epsilon) and self.epsilon > 0)

    def margins_for(self, points, y=None) -> np.ndarray:
        """Recompute ``max_j |pair(u_j, x_n - y)|`` for arbitrary points."""
        X, yy, _, _ = _as_rows(points, y, self.weight, None)
        return np.max(np.abs(self.weight * (X - yy) @ self.functionals.T), axis=1)

    def revalidate(self, points, y=None) -> bool:
        """Recompute margins from the stored functionals and re-check them."""
        m = self.margins_for(points, y)
        return bool(self.epsilon > 0 and np.all(m >= self.epsilon)
                    and np.allclose(m, self.margins, rtol=1e-12, atol=0))

    def to_json(self, functionals_ref: str | None = None) -> dict:
        out = {"k": self.k, "epsilon": self.epsilon, "seed": self.seed, "trial": self.trial,
               "margins": [float(m) for m in self.margins], "bound": self.theory_bound,
               "a_priori_epsilon": self.a_priori_epsilon,
               "functionals_ref": functionals_ref, "flags": list(self.flags)}
        if self.draws is not None:
            out["draws"] = self.draws.tolist()
        return out

    def write(self, path, functionals_csv: bool = True) -> Path:
        """Write JSON; functionals go to a CSV next to it when small."""
        path = Path(path)
        ref = None
        if functionals_csv and self.functionals.size <= MAX_STORED_DRAWS:
            fpath = path.with_name(path.stem + "_functionals.csv")
            with fpath.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["j"] + [f"c{i}" for i in range(self.functionals.shape[1])])
                for j, row in enumerate(self.functionals):
                    wr.writerow([j] + [repr(float(v)) for v in row])
            ref = fpath.name
        path.write_text(json.dumps(self.to_json(ref), indent=1, sort_keys=True))
        return path


@dataclass(eq=False)
class CertificateFailure:
    reason: str
    seed: int
    trials: int
    worst: list  # per trial: (point index, margin)

    def to_json(self) -> dict:
        return {"reason": self.reason, "seed": self.seed, "trials": self.trials,
                "worst": [[int(i), float(m)] for i, m in self.worst]}


def gaussian_certificate(points: Sequence, y=None, k: int = 4, trials: int = 5, seed: int = 0,
                         truncation: int | None = None, family: NormingFamily | None = None, *,
                         weight: float | None = None, norm_p: float | None = None,
                         type_p: float = 2.0, decay_q: float = 1.5):
    """Search for ``k`` Gaussian functionals separating ``y`` from ``points``.

    Trial ``t`` draws ``gamma`` from :func:`trial_rng` ``(seed, t)`` and forms
    ``u_j = sum_{n < truncation} gamma_n^(j) f_n``. The first trial with
    ``eps* = min_n max_j |u_j(x_n - y)| > 0`` wins and ``epsilon = eps*/2``.

    Returns a :class:`WeakClosureCertificate` or a :class:`CertificateFailure`
    (also when a point equals ``y``: its margin is identically zero).
    """
    if k < 1 or trials < 1:
        raise ValueError("need k >= 1 and trials >= 1")
    X, yy, w, np_ = _as_rows(points, y, weight, norm_p)
    if family is None:
        family = build_norming_family(list(X), yy, type_p, decay_q, weight=w, norm_p=np_,
                                      _strict=False)
    T = len(X) if truncation is None else int(truncation)
    if T < len(X):
        raise ValueError(f"truncation {T} is smaller than the point count {len(X)}")
    if T > len(family):
        raise ValueError(f"truncation {T} exceeds the family size {len(family)}")
    F = family.functionals[:T]
    D = X - yy[None, :]
    A = w * D @ F.T  # A[n, m] = pair(f_m, x_n - y)
    pair_diag = np.abs(np.diag(A))
    with np.errstate(divide="ignore"):
        inv = np.where(pair_diag > 0, pair_diag, np.nan) ** (-float(k))
    sum_inv = float(np.nansum(inv)) if np.all(pair_diag > 0) else math.inf
    a_priori = (0.5 / sum_inv) ** (1.0 / k) if 0 < sum_inv < math.inf else 0.0
    worst = []
    for t in range(trials):
        G = _draw(seed, t, T, k)
        values = A @ G.T  # [n, j] = pair(u_j, x_n - y)
        margins = np.max(np.abs(values), axis=1)
        i = int(np.argmin(margins))
        worst.append((i, float(margins[i])))
        if margins[i] > 0:
            eps = float(margins[i]) / 2
            draws = G if G.size <= MAX_STORED_DRAWS else None
            return WeakClosureCertificate(k, G @ F, eps, margins, int(seed), t,
                                          eps ** k * sum_inv, a_priori, w, draws,
                                          list(family.flags))
    reason = ("a point coincides with the target" if np.any(family.point_norms == 0)
              else "some point had zero margin in every trial")
    return CertificateFailure(reason, int(seed), trials, worst)


# ---------------------------------------------------------------------------
# small-ball estimate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmallBallRow:
    n: int
    empirical: float
    exact: float
    bound: float
    sigma: float
    a_n: float
    pair: float
    within_bound: bool
    within_exact: bool


def small_ball_bound_check(family: NormingFamily, points: Sequence, y=None, epsilon: float = 0.1,
                           mc_samples: int = 100_000, seed: int = 0,
                           indices: Sequence[int] | None = None, chunk: int = 10_000) -> list:
    """Monte Carlo check of ``P(|u(x_n - y)| < eps) <= eps / |pair(f_n, x_n - y)|``.

    ``u = sum_m gamma_m f_m`` with fresh standard normals. The exact value is
    ``erf(eps / (a_n sqrt 2))`` with ``a_n^2 = sum_m pair(f_m, x_n - y)^2``.
    ``sigma`` is the relative Monte Carlo standard error
    ``sqrt((1 - P) / (mc_samples P))`` at the exact ``P``; a row passes when
    ``empirical <= bound (1 + 3 sigma)``.
    """
    if mc_samples < 10_000:
        raise ValueError("mc_samples must be >= 1e4")
    X, yy, w, _ = _as_rows(points, y, family.weight, family.norm_p)
    idx = list(range(len(X))) if indices is None else list(indices)
    F = family.functionals
    A = w * (X[idx] - yy) @ F.T  # rows: coefficients of eta_n in the gammas
    a = np.sqrt(np.sum(A ** 2, axis=1))
    pv = np.abs(w * np.einsum("ij,ij->i", F[idx], X[idx] - yy))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    hits = np.zeros(len(idx), dtype=np.int64)
    done = 0
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        G = rng.standard_normal((m, F.shape[0]))
        hits += np.sum(np.abs(G @ A.T) < epsilon, axis=0)
        done += m
    rows = []
    for r, n in enumerate(idx):
        emp = hits[r] / mc_samples
        exact = float(erf(epsilon / (a[r] * math.sqrt(2)))) if a[r] > 0 else 1.0
        bound = float(epsilon / pv[r]) if pv[r] > 0 else math.inf
        if epsilon == 0:
            bound = 0.0
        sig = math.sqrt((1 - exact) / (mc_samples * exact)) if 0 < exact < 1 else 0.0
        abs_sig = math.sqrt(exact * (1 - exact) / mc_samples)
        rows.append(SmallBallRow(n, float(emp), exact, bound, sig, float(a[r]), float(pv[r]),
                                 bool(emp <= bound * (1 + 3 * sig)),
                                 bool(abs(emp - exact) <= 3 * abs_sig + 1.0 / mc_samples)))
    return rows
