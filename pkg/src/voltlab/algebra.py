"""The discrete Volterra convolution algebra and commutator calculus.

A kernel ``a`` sampled at the nodes acts by ``M_a = h * sum_k a_k J^k`` with
``J`` the down-shift. These are the lower-triangular Toeplitz matrices; they
form a commutative algebra with ``M_a M_b = M_{a*b}`` and ``M_1 = V``. On a
dyadic grid (N a power of two) every identity below that holds in exact
arithmetic also holds bit for bit in floating point whenever the kernels are
dyadic; for general kernels the Toeplitz products still commute exactly
because the convolution is summed symmetrically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .dynamics import orbit
from .fnspace import DualFunctional, Grid, GridFunction, conjugate_exponent, weighted_norm
from .operators import LinOp, adjoint, mult_by_x, volterra

__all__ = [
    "ConvElement",
    "star",
    "commutator",
    "PreconditionError",
    "WitnessError",
    "der_identity_residual",
    "WitnessSet",
    "witness_builder",
    "witness_for_vector",
    "G1Row",
    "G1Report",
    "g1_margin",
    "CommutantProbe",
    "joint_commutant_dimension",
    "quasinilpotency_probe",
    "leibniz_check",
]


class PreconditionError(ValueError):
    """An identity was asked for outside the hypotheses that make it true."""


class WitnessError(ValueError):
    """A witness set fails one of its defining relations."""


@dataclass(frozen=True, eq=False)
class ConvElement:
    """Kernel samples ``a`` on a grid, acting by discrete convolution."""

    coeffs: np.ndarray
    grid: Grid

    def __post_init__(self):
        c = np.array(self.coeffs)
        if c.dtype.kind not in "fc":
            c = c.astype(np.float64)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_function(cls, f: GridFunction) -> "ConvElement":
        return cls(f.samples, f.grid)

    @property
    def op(self) -> LinOp:
        """The multiplication operator ``M_a`` (lower Toeplitz)."""
        return LinOp.toeplitz(self.coeffs, self.grid.h, self.grid)

    def as_function(self, p: float = 2.0) -> GridFunction:
        return GridFunction(self.grid, self.coeffs, p)

    def __add__(self, other: "ConvElement") -> "ConvElement":
        _same(self, other)
        return ConvElement(self.coeffs + other.coeffs, self.grid)

    def __mul__(self, c) -> "ConvElement":
        return ConvElement(self.coeffs * c, self.grid)

    __rmul__ = __mul__


def _same(a: ConvElement, b: ConvElement) -> None:
    if a.grid != b.grid:
        raise ValueError(f"length mismatch: {a.grid.n_points} vs {b.grid.n_points}")


def star(a: ConvElement, b: ConvElement) -> ConvElement:
    """``(a*b)_i = h * sum_{k<=i} a_k b_{i-k}``; symmetric in a and b bit for bit."""
    _same(a, b)
    return ConvElement(a.grid.h * _kernels.sym_convolve(a.coeffs, b.coeffs), a.grid)


def commutator(A: LinOp, B: LinOp) -> LinOp:
    """``[A, B] = AB - BA``."""
    if A.dim != B.dim:
        raise ValueError(f"shape mismatch: {A.dim} vs {B.dim}")
    return A.compose(B) - B.compose(A)


def _opnorm(A: LinOp) -> float:
    return float(np.linalg.norm(A.matrix, 2)) if A.dim else 0.0


def der_identity_residual(T: LinOp, M: LinOp, n: int, rtol: float = 1e-12) -> float:
    """Spectral norm of ``T^n M - M T^n - n S T^{n-1}`` with ``S = [T, M]``.

    The identity needs ``[T, S] = 0``; if ``||[T,S]|| > rtol ||T|| ||S||``
    :class:`PreconditionError` is raised instead of returning a residual.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    S = commutator(T, M)
    TS = commutator(T, S)
    bound = rtol * _opnorm(T) * _opnorm(S)
    if _opnorm(TS) > bound:
        raise PreconditionError(f"[T, [T, M]] has norm {_opnorm(TS):.3e} > {bound:.3e}")
    Tn1 = T.power(n - 1)
    Tn = T.compose(Tn1)
    R = Tn.compose(M) - M.compose(Tn) - S.compose(Tn1) * n
    return _opnorm(R)


# ---------------------------------------------------------------------------
# witnesses and the orbit inequality
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class WitnessSet:
    """Operators ``B = M_v``, ``C = M_u``, ``S = [T, M]``, ``R`` for a given T."""

    T: LinOp
    M: LinOp
    B: LinOp
    C: LinOp
    S: LinOp
    R: LinOp
    u: GridFunction
    v: GridFunction

    def residuals(self) -> dict:
        """Norms of ``Cv - Bu`` and of the four commutators with T."""
        out = {"Cv-Bu": float(np.max(np.abs(self.C.apply(self.v.samples) - self.B.apply(self.u.samples))))}
        for name in ("B", "C", "R", "S"):
            out[f"[T,{name}]"] = float(np.max(np.abs(commutator(self.T, getattr(self, name)).matrix)))
        return out


def witness_builder(T: LinOp, u: GridFunction, v: GridFunction, M: LinOp | None = None,
                    R: LinOp | None = None, rtol: float = 1e-12) -> WitnessSet:
    """``C = M_u``, ``B = M_v``, ``S = [T, M]``, ``R = V^2`` for T in the convolution algebra.

    ``M`` defaults to multiplication by x. ``Cv = Bu`` and the commutation of
    T with B, C, R hold with zero residual; ``[T, S]`` is zero on dyadic
    grids and is checked to ``rtol`` relative otherwise.
    """
    if T.tag != "lower_toeplitz" or not isinstance(T.domain, Grid):
        raise WitnessError("T must be a convolution operator on a grid")
    grid = T.domain
    if u.grid != grid or v.grid != grid:
        raise WitnessError("u, v live on a different grid")
    if not np.any(u.samples):
        raise WitnessError("u = 0 gives a non-injective C")
    M = mult_by_x(grid) if M is None else M
    R = volterra(grid).power(2) if R is None else R
    C = ConvElement(u.samples, grid).op
    B = ConvElement(v.samples, grid).op
    S = commutator(T, M)
    W = WitnessSet(T, M, B, C, S, R, u, v)
    if not np.array_equal(C.apply(v.samples), B.apply(u.samples)):
        raise WitnessError("Cv != Bu")
    for name in ("B", "C", "R"):
        if np.any(commutator(T, getattr(W, name)).matrix):
            raise WitnessError(f"[T, {name}] != 0")
    ts = _opnorm(commutator(T, S))
    if ts > rtol * _opnorm(T) * _opnorm(S):
        raise WitnessError(f"[T, S] has norm {ts:.3e}")
    return W


def witness_for_vector(T: LinOp, x: GridFunction, M: LinOp | None = None,
                       R: LinOp | None = None, w: GridFunction | None = None) -> WitnessSet:
    """Witness with ``C M y = B y`` for ``y = R x``.

    Takes ``u = w*y`` and ``v = w*(My)`` (``w`` defaults to the unit of the
    algebra, i.e. ``u = y``, ``v = My``). Then ``CMy = w*y*My = By``, which
    is the hypothesis the orbit inequality needs.
    """
    grid = T.domain
    M = mult_by_x(grid) if M is None else M
    R = volterra(grid).power(2) if R is None else R
    y = R.apply(x)
    My = M.apply(y)
    if w is None:
        u, v = y, My
    else:
        we = ConvElement(w.samples, grid)
        u = star(we, ConvElement(y.samples, grid)).as_function(x.p)
        v = star(we, ConvElement(My.samples, grid)).as_function(x.p)
    return witness_builder(T, u, v, M, R)


@dataclass(frozen=True)
class G1Row:
    n: int
    log_lhs: float
    log_rhs: float
    margin: float
    chain_residual: float

    def to_json(self) -> dict:
        fin = lambda t: t if math.isfinite(t) else None  # noqa: E731
        return {"n": self.n, "log_lhs": fin(self.log_lhs), "log_rhs": fin(self.log_rhs),
                "margin": self.margin}


@dataclass(eq=False)
class G1Report:
    rows: list
    constant: float
    hypothesis_residual: float

    @property
    def min_margin(self) -> float:
        return min(r.margin for r in self.rows)

    @property
    def max_chain_residual(self) -> float:
        return max(r.chain_residual for r in self.rows)

    def holds(self, rtol: float = 1e-9) -> bool:
        return all(r.log_lhs <= r.log_rhs + math.log1p(rtol) or r.log_lhs == -math.inf
                   for r in self.rows)

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps([r.to_json() for r in self.rows], indent=1))
        return path


def _log_abs(z) -> float:
    a = abs(z)
    return math.log(a) if a > 0 else -math.inf


def g1_margin(W: WitnessSet, x: GridFunction, hfun: DualFunctional, n_max: int,
              p: float | None = None, strict: bool = True, hyp_rtol: float = 1e-10) -> G1Report:
    """Evaluate ``|g(R T^n x)| <= ||(B - CM)^* h||_q (n+1)^{-1} ||R T^n x||_p``.

    ``g = S^* C^* h``, so ``g(z) = pair(h, C S z)``. Everything is computed
    from the normalised orbit of ``y = R x`` (``T^n y = R T^n x``), in log
    form. Each row also carries the residual of the exact identity

        (n+1) pair(h, C S T^n y) = pair(h, (B - CM) T^{n+1} y),

    relative to the Holder bound of its right-hand side. The identity (and
    the inequality, given ``||T|| <= 1``) needs ``C M y = B y``; with
    ``strict`` a violation beyond ``hyp_rtol`` raises :class:`WitnessError`.
    """
    T, M, B, C, S, R = W.T, W.M, W.B, W.C, W.S, W.R
    p = x.p if p is None else p
    q = conjugate_exponent(p)
    hgt = x.grid.h
    res = W.residuals()
    if res["Cv-Bu"] != 0 or res["[T,B]"] != 0 or res["[T,C]"] != 0 or res["[T,R]"] != 0:
        raise WitnessError(f"witness relations violated: {res}")
    y = R.apply(x)
    CMy, By = C.apply(M.apply(y.samples)), B.apply(y.samples)
    scale = max(np.max(np.abs(By)), np.max(np.abs(CMy)), 1e-300)
    hyp = float(np.max(np.abs(CMy - By)) / scale)
    if strict and hyp > hyp_rtol:
        raise WitnessError(f"C M R x != B R x (relative residual {hyp:.3e})")
    CS = C.compose(S)
    D = B - C.compose(M)
    h = hfun.samples
    Dh = adjoint(D).apply(h)
    const = weighted_norm(Dh, q, hgt)
    log_const = _log_abs(const)
    orb = orbit(T, y, n_max + 1, (), p)
    if orb.terminated:
        raise ValueError("orbit of R x vanished")
    rows = []
    for n in range(n_max + 1):
        un, L = orb[n].unit, orb[n].log_norm
        a = (n + 1) * hgt * np.vdot(h, CS.apply(un))
        tn1 = T.apply(un)  # = T^{n+1} y / ||T^n y||
        b = hgt * np.vdot(h, D.apply(tn1))
        bound = const * weighted_norm(tn1, p, hgt) + abs(a)
        chain = float(abs(a - b) / bound) if bound > 0 else 0.0
        log_lhs = _log_abs(a) - math.log(n + 1) + L
        log_rhs = log_const - math.log(n + 1) + L
        margin = 1.0 - math.exp(log_lhs - log_rhs) if log_rhs > -math.inf else 0.0
        rows.append(G1Row(n, log_lhs, log_rhs, margin, chain))
    return G1Report(rows, const, hyp)


# ---------------------------------------------------------------------------
# structural probes
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class CommutantProbe:
    """Nullity of the stacked Sylvester system and its singular-value gap.

    ``gap`` is (smallest nonzero sigma) / (largest zero sigma): ``inf`` when
    the zero singular values are exactly zero, ``nan`` when there are none.
    """

    dimension: int
    gap: float
    singular_values: np.ndarray
    threshold: float


def joint_commutant_dimension(A: LinOp, B: LinOp, rtol: float = 1e-10,
                              max_dim: int = 64) -> CommutantProbe:
    """Dimension of ``{X : XA = AX, XB = BX}`` from a dense SVD.

    Column-major ``vec``: ``vec(AX - XA) = (I (x) A - A^T (x) I) vec X``.
    """
    n = A.dim
    if B.dim != n:
        raise ValueError("shape mismatch")
    if n > max_dim:
        raise ValueError(f"N = {n} exceeds {max_dim}: dense N^2 x N^2 solve is too large")
    I = np.eye(n)
    rows = [np.kron(I, op.matrix) - np.kron(op.matrix.T, I) for op in (A, B)]
    K = np.vstack(rows)
    sv = np.linalg.svd(K, compute_uv=False)
    smax = float(sv[0]) if sv.size else 0.0
    thr = rtol * smax
    zero = sv <= thr
    dim = int(zero.sum())
    if dim == 0:
        gap = math.nan
    else:
        last_zero = float(sv[zero].max())
        nonzero = sv[~zero]
        first_nonzero = float(nonzero.min()) if nonzero.size else math.inf
        gap = math.inf if last_zero == 0 else first_nonzero / last_zero
    return CommutantProbe(dim, gap, sv, thr)


def quasinilpotency_probe(A: LinOp, x, n_max: int, p: float | None = None) -> np.ndarray:
    """``r_n = ||A^n x||^{1/n}`` for n = 1..n_max (index 0 holds n = 1)."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    orb = orbit(A, x, n_max, (), p)
    L = orb.log_norms
    n = np.arange(1, len(L))
    r = np.exp(L[1:] / n)
    if orb.terminated:
        r = np.concatenate([r, np.zeros(n_max - len(r))])
    return r


def leibniz_check(M: LinOp, a: ConvElement, b: ConvElement, p: float = 2.0) -> float:
    """``||M(a*b) - (Ma)*b - a*(Mb)||_p`` for the multiplication-by-x derivation.

    With left-endpoint nodes ``x_k + x_{i-k} = x_i``, so the identity is exact
    on the grid and the residual is rounding only.
    """
    _same(a, b)
    g = a.grid
    lhs = M.apply(star(a, b).coeffs)
    Ma = ConvElement(M.apply(a.coeffs), g)
    Mb = ConvElement(M.apply(b.coeffs), g)
    rhs = star(Ma, b).coeffs + star(a, Mb).coeffs
    return weighted_norm(lhs - rhs, p, g.h)
