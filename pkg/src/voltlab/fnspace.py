"""Discretized L_p[0,1].

Functions are sampled at the left endpoints ``x_i = i*h`` of a uniform grid
and integrated with the rectangle rule, weight ``h`` per node. The rule is
only first order, but it turns the discrete convolution algebra into an exact
matrix algebra (see :mod:`voltlab.algebra`).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "DualFunctional",
    "conjugate_exponent",
    "weighted_norm",
    "lp_norm",
    "dual_norm",
    "pair",
    "norming_functional",
    "scaled_norming_functional",
    "derivative_l2_norm",
    "save_grid_function",
    "load_grid_function",
]


def conjugate_exponent(p: float) -> float:
    """Return q with 1/p + 1/q = 1 (``inf`` for p = 1, 1 for p = inf)."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, 1) with ``n_points`` left-endpoint nodes."""

    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise ValueError(f"n_points must be a positive integer, got {self.n_points}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * self.h

    def sample(self, fn: Callable[[np.ndarray], np.ndarray], p: float = 2.0) -> "GridFunction":
        """Sample a vectorized callable at the nodes."""
        values = np.broadcast_to(np.asarray(fn(self.nodes)), (self.n_points,))
        return GridFunction(self, np.array(values), p)

    def constant(self, c: complex = 1.0, p: float = 2.0) -> "GridFunction":
        return GridFunction(self, np.full(self.n_points, c), p)


def _frozen(samples) -> np.ndarray:
    arr = np.array(samples)
    if arr.dtype.kind not in "fc":
        arr = arr.astype(np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on a :class:`Grid`, tagged with an exponent p."""

    grid: Grid
    samples: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples))
        if self.samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {self.samples.shape}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.grid, samples, self.p)

    def norm(self, p: float | None = None) -> float:
        return lp_norm(self, p)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, c) -> "GridFunction":
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """Element of the dual of L_p acting through :func:`pair`."""

    grid: Grid
    samples: np.ndarray
    q: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples))
        if self.samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {self.samples.shape}")

    def norm(self) -> float:
        return dual_norm(self)

    def __mul__(self, c) -> "DualFunctional":
        return DualFunctional(self.grid, self.samples * c, self.q)

    __rmul__ = __mul__


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a.n_points} vs {b.n_points} points")


def weighted_norm(samples, p: float, weight: float = 1.0) -> float:
    """``(weight * sum |s_i|^p)^(1/p)``; max norm for p = inf.

    Computed after scaling by ``max|s_i|``, so it neither overflows nor
    underflows for vectors whose entries are representable.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(np.asarray(samples))
    if a.size == 0:
        raise ValueError("empty sample vector")
    peak = float(a.max())
    if math.isinf(p) or peak == 0.0:
        return peak
    s = np.sum((a / peak) ** p)
    return peak * float(weight * s) ** (1.0 / p)


def lp_norm(f: GridFunction, p: float | None = None) -> float:
    """L_p norm by the rectangle rule; ``p`` defaults to ``f.p``."""
    p = f.p if p is None else p
    return weighted_norm(f.samples, p, f.grid.h)


def dual_norm(g: DualFunctional) -> float:
    return weighted_norm(g.samples, g.q, g.grid.h)


def pair(g: DualFunctional, f: GridFunction) -> complex | float:
    """``h * sum(conj(g_i) f_i)``; conjugate-linear in ``g``."""
    _same_grid(g.grid, f.grid)
    val = g.grid.h * np.vdot(g.samples, f.samples)
    return float(val.real) if np.isrealobj(g.samples) and np.isrealobj(f.samples) else complex(val)


def norming_functional(f: GridFunction, p: float | None = None) -> DualFunctional:
    """Unit-norm g in L_q with ``pair(g, f) == ||f||_p`` (1 < p < inf).

    ``g_i = sign(f_i) |f_i|^(p-1) / ||f||_p^(p-1)``, with ``sign`` the complex
    phase for complex samples.
    """
    p = f.p if p is None else p
    if not 1 < p < math.inf:
        raise ValueError(f"norming functional needs 1 < p < inf, got {p}")
    nrm = lp_norm(f, p)
    if nrm == 0:
        raise ValueError("cannot norm the zero function")
    s = f.samples
    mag = np.abs(s) / nrm
    phase = np.where(mag > 0, s / np.where(np.abs(s) > 0, np.abs(s), 1.0), 0.0)
    g = phase * mag ** (p - 1)
    if np.isrealobj(s):
        g = g.real
    return DualFunctional(f.grid, g, conjugate_exponent(p))


def scaled_norming_functional(f: GridFunction, decay_q: float, type_p: float = 2.0,
                              p: float | None = None) -> DualFunctional:
    """Norming functional rescaled to dual norm ``||f||^(-decay_q/type_p)``.

    Then ``pair(g, f) = ||f||^((type_p - decay_q)/type_p)``. ``type_p`` is the
    type exponent of the dual space and ``decay_q`` the summability exponent
    of the point norms; they are unrelated to the Lebesgue exponent ``p``.
    """
    g = norming_functional(f, p)
    nrm = lp_norm(f, f.p if p is None else p)
    return g * nrm ** (-decay_q / type_p)


def derivative_l2_norm(f: GridFunction) -> float:
    """L_2 norm of the difference quotient of ``f`` with f(0-) = 0.

    The quotient ``(f_i - f_{i-1})/h`` with ``f_{-1} = 0`` is the exact left
    inverse of the discrete Volterra operator, so for ``f = V g`` this
    returns ``||g||_2``; it is the discrete norm of W^{1,2}_0.
    """
    if f.grid.n_points < 2:
        raise ValueError("need at least 2 grid points")
    d = np.diff(f.samples, prepend=0.0) / f.grid.h
    return weighted_norm(d, 2.0, f.grid.h)


def save_grid_function(f: GridFunction, path) -> Path:
    """Write ``path`` (CSV: index,node,value_re,value_im) plus ``path.json``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "node", "value_re", "value_im"])
        s = f.samples.astype(np.complex128)
        for i, (x, v) in enumerate(zip(f.grid.nodes, s)):
            w.writerow([i, repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps({"p": f.p, "n_points": f.grid.n_points,
                                   "complex": bool(np.iscomplexobj(f.samples))}))
    return path


def load_grid_function(path) -> GridFunction:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    re = np.array([float(r["value_re"]) for r in rows])
    im = np.array([float(r["value_im"]) for r in rows])
    if len(rows) != meta["n_points"]:
        raise ValueError(f"{path}: {len(rows)} rows but sidecar says {meta['n_points']}")
    samples = re + 1j * im if meta.get("complex") else re
    return GridFunction(Grid(meta["n_points"]), samples, meta["p"])
