"""Concrete operators as matrices on sample vectors.

Lower-triangular Toeplitz operators are stored by kernel: the matrix is
``scale * a[i - j]`` for ``i >= j``. Composition of two such operators is the
symmetric discrete convolution of the kernels, and application to a vector
uses the same kernel, so products inside the convolution algebra commute with
zero residual rather than within rounding.
"""

from __future__ import annotations

import ast
import math
import operator as _op
from functools import cached_property

import numpy as np

from . import _kernels
from .fnspace import Grid, GridFunction, DualFunctional

__all__ = [
    "LinOp",
    "SeqVector",
    "TAGS",
    "identity",
    "volterra",
    "mult_by_x",
    "multiplication",
    "cesaro",
    "weighted_volterra_T",
    "weighted_volterra_S",
    "power_weight_volterra",
    "intertwiner_J",
    "shift_example_pair",
    "weighted_backward_shift",
    "hs_left_mult",
    "hs_kernel_range_basis",
    "kronecker_mult",
    "adjoint",
    "apply_adjoint",
    "eval_expr",
    "parse_operator",
]

TAGS = ("general", "lower_toeplitz", "diagonal")


class LinOp:
    """Square operator on C^N with a structural tag.

    ``domain`` is a :class:`Grid` for operators on sampled functions or a
    plain ``int`` dimension for truncated sequence spaces.
    """

    def __init__(self, matrix, tag: str = "general", domain=None):
        m = np.array(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if tag not in TAGS:
            raise ValueError(f"unknown tag {tag!r}")
        if m.dtype.kind not in "fc":
            m = m.astype(np.float64)
        m.setflags(write=False)
        self._dense = m
        self.tag = tag
        self.domain = m.shape[0] if domain is None else domain
        self.kernel = m[:, 0] / 1.0 if tag == "lower_toeplitz" else None
        self.scale = 1.0 if tag == "lower_toeplitz" else None
        self.diag = np.diag(m).copy() if tag == "diagonal" else None
        if _dim(self.domain) != m.shape[0]:
            raise ValueError("domain size does not match matrix")

    @classmethod
    def toeplitz(cls, kernel, scale: float = 1.0, domain=None) -> "LinOp":
        """Lower-triangular Toeplitz operator ``scale * kernel[i - j]``."""
        k = np.array(kernel)
        if k.dtype.kind not in "fc":
            k = k.astype(np.float64)
        k.setflags(write=False)
        op = cls.__new__(cls)
        op._dense = None
        op.tag = "lower_toeplitz"
        op.domain = k.shape[0] if domain is None else domain
        op.kernel = k
        op.scale = float(scale)
        op.diag = None
        if _dim(op.domain) != k.shape[0]:
            raise ValueError("domain size does not match kernel")
        return op

    @classmethod
    def diagonal(cls, diag, domain=None) -> "LinOp":
        d = np.array(diag)
        if d.dtype.kind not in "fc":
            d = d.astype(np.float64)
        d.setflags(write=False)
        op = cls.__new__(cls)
        op._dense = None
        op.tag = "diagonal"
        op.domain = d.shape[0] if domain is None else domain
        op.kernel = None
        op.scale = None
        op.diag = d
        if _dim(op.domain) != d.shape[0]:
            raise ValueError("domain size does not match diagonal")
        return op

    # -- structure -------------------------------------------------------

    @property
    def dim(self) -> int:
        return _dim(self.domain)

    @cached_property
    def matrix(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        n = self.dim
        if self.tag == "diagonal":
            m = np.diag(self.diag)
        else:
            idx = np.subtract.outer(np.arange(n), np.arange(n))
            m = np.where(idx >= 0, self.scale * self.kernel[np.clip(idx, 0, None)], 0)
            m = m.astype(self.kernel.dtype, copy=False)
        m.setflags(write=False)
        return m

    @property
    def dtype(self):
        if self._dense is not None:
            return self._dense.dtype
        return (self.kernel if self.tag == "lower_toeplitz" else self.diag).dtype

    def check_tag(self) -> bool:
        """Verify the declared structure on the dense matrix."""
        m = self.matrix
        if self.tag == "diagonal":
            return not np.any(m - np.diag(np.diag(m)))
        if self.tag == "lower_toeplitz":
            if np.any(np.triu(m, 1)):
                return False
            first = m[:, 0]
            return all(np.array_equal(np.diagonal(m, -k), np.full(m.shape[0] - k, first[k]))
                       for k in range(m.shape[0]))
        return True

    # -- algebra ---------------------------------------------------------

    def apply(self, v):
        """Apply to an ndarray, a GridFunction or a SeqVector."""
        if isinstance(v, GridFunction):
            _check_grid(self.domain, v.grid)
            return v.with_samples(self._apply_array(v.samples))
        if isinstance(v, SeqVector):
            return SeqVector(self._apply_array(v.entries), v.p)
        return self._apply_array(np.asarray(v))

    def _apply_array(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dim,):
            raise ValueError(f"vector of shape {v.shape} does not fit dimension {self.dim}")
        if self.tag == "diagonal":
            return self.diag * v
        if self.tag == "lower_toeplitz":
            return self.scale * _kernels.sym_convolve(self.kernel, v)
        return self.matrix @ v

    def compose(self, other: "LinOp") -> "LinOp":
        """``self @ other`` as operators."""
        _check_compatible(self, other)
        if self.tag == "lower_toeplitz" and other.tag == "lower_toeplitz" and self.scale == other.scale:
            k = self.scale * _kernels.sym_convolve(self.kernel, other.kernel)
            return LinOp.toeplitz(k, self.scale, self.domain)
        if self.tag == "diagonal" and other.tag == "diagonal":
            return LinOp.diagonal(self.diag * other.diag, self.domain)
        if self.tag == "diagonal":
            return LinOp(self.diag[:, None] * other.matrix, "general", self.domain)
        if other.tag == "diagonal":
            return LinOp(self.matrix * other.diag[None, :], "general", self.domain)
        return LinOp(self.matrix @ other.matrix, "general", self.domain)

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            return self.compose(other)
        return self.apply(other)

    def _combine(self, other: "LinOp", fn) -> "LinOp":
        _check_compatible(self, other)
        if self.tag == other.tag == "lower_toeplitz" and self.scale == other.scale:
            return LinOp.toeplitz(fn(self.kernel, other.kernel), self.scale, self.domain)
        if self.tag == other.tag == "diagonal":
            return LinOp.diagonal(fn(self.diag, other.diag), self.domain)
        return LinOp(fn(self.matrix, other.matrix), "general", self.domain)

    def __add__(self, other: "LinOp") -> "LinOp":
        return self._combine(other, _op.add)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return self._combine(other, _op.sub)

    def __neg__(self) -> "LinOp":
        return self * -1

    def __mul__(self, c) -> "LinOp":
        if not np.isscalar(c):
            return NotImplemented
        if self.tag == "lower_toeplitz":
            return LinOp.toeplitz(self.kernel * c, self.scale, self.domain)
        if self.tag == "diagonal":
            return LinOp.diagonal(self.diag * c, self.domain)
        return LinOp(self.matrix * c, "general", self.domain)

    __rmul__ = __mul__

    def power(self, n: int) -> "LinOp":
        if n < 0:
            raise ValueError("negative power")
        result = identity(self.domain, like=self)
        base = self
        while n:
            if n & 1:
                result = result.compose(base)
            n >>= 1
            if n:
                base = base.compose(base)
        return result

    def norm(self, ord=2) -> float:
        """Matrix norm of the dense representation (spectral by default)."""
        return float(np.linalg.norm(self.matrix, ord))

    @property
    def H(self) -> "LinOp":
        return adjoint(self)

    def __repr__(self):
        return f"LinOp(dim={self.dim}, tag={self.tag!r})"


class SeqVector:
    """Vector in a truncated sequence space l_p (unit weight per entry)."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p: float = 2.0):
        e = np.array(entries)
        if e.dtype.kind not in "fc":
            e = e.astype(np.float64)
        e.setflags(write=False)
        if e.ndim != 1:
            raise ValueError("entries must be one-dimensional")
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        self.entries = e
        self.p = p

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def basis(cls, n: int, dim: int, p: float = 2.0) -> "SeqVector":
        e = np.zeros(dim)
        e[n] = 1.0
        return cls(e, p)


def _dim(domain) -> int:
    return domain.n_points if isinstance(domain, Grid) else int(domain)


def _check_grid(domain, grid: Grid) -> None:
    if isinstance(domain, Grid) and domain != grid:
        raise ValueError(f"grid mismatch: operator on {domain.n_points} points, "
                         f"function on {grid.n_points}")
    if _dim(domain) != grid.n_points:
        raise ValueError("dimension mismatch")


def _check_compatible(a: LinOp, b: LinOp) -> None:
    if a.dim != b.dim:
        raise ValueError(f"shape mismatch: {a.dim} vs {b.dim}")


def _samples(alpha, grid: Grid) -> np.ndarray:
    if isinstance(alpha, GridFunction):
        if alpha.grid != grid:
            raise ValueError("weight sampled on a different grid")
        return alpha.samples
    if callable(alpha):
        return np.broadcast_to(np.asarray(alpha(grid.nodes), dtype=float), (grid.n_points,)).copy()
    a = np.asarray(alpha)
    if a.shape != (grid.n_points,):
        raise ValueError("weight has the wrong length")
    return a


# ---------------------------------------------------------------------------
# constructors on L_p[0,1]
# ---------------------------------------------------------------------------


def identity(domain, like: LinOp | None = None) -> LinOp:
    n = _dim(domain)
    dtype = like.dtype if like is not None else np.float64
    if like is not None and like.tag == "lower_toeplitz":
        k = np.zeros(n, dtype=dtype)
        k[0] = 1.0 / like.scale
        if k[0] * like.scale == 1.0:
            return LinOp.toeplitz(k, like.scale, domain)
    return LinOp.diagonal(np.ones(n, dtype=dtype), domain)


def volterra(grid: Grid) -> LinOp:
    """``(Vf)_i = h * sum_{k <= i} f_k``: integration from 0, diagonal included."""
    return LinOp.toeplitz(np.ones(grid.n_points), grid.h, grid)


def mult_by_x(grid: Grid) -> LinOp:
    return LinOp.diagonal(grid.nodes, grid)


def multiplication(grid: Grid, alpha) -> LinOp:
    """Pointwise multiplication by a weight."""
    return LinOp.diagonal(_samples(alpha, grid), grid)


def cesaro(grid: Grid) -> LinOp:
    """``Cf(x) = (1/x) int_0^x f``, with row 0 set to ``Cf(0) = f(0)``.

    Realised as ``diag(1/max(x_i, h)) @ V``; at ``x_0 = 0`` this gives
    ``h*f_0/h = f_0``.
    """
    d = 1.0 / np.maximum(grid.nodes, grid.h)
    return LinOp(d[:, None] * volterra(grid).matrix, "general", grid)


def weighted_volterra_T(grid: Grid, alpha) -> LinOp:
    """``T_alpha f(x) = alpha(x) int_0^x f``."""
    a = _samples(alpha, grid)
    return LinOp(a[:, None] * volterra(grid).matrix, "general", grid)


def weighted_volterra_S(grid: Grid, alpha) -> LinOp:
    """``S_alpha f(x) = int_0^x alpha f``."""
    a = _samples(alpha, grid)
    return LinOp(volterra(grid).matrix * a[None, :], "general", grid)


def power_weight_volterra(grid: Grid, s: float) -> LinOp:
    """``R_s f(x) = x^s int_0^x f``, with x clamped to h as in :func:`cesaro`."""
    return weighted_volterra_T(grid, np.maximum(grid.nodes, grid.h) ** s)


def intertwiner_J(grid: Grid, alpha) -> LinOp:
    """Discrete ``Jf(x) = f(phi(x)) / alpha(phi(x))`` with ``phi = H^{-1}``.

    ``H(x) = int_0^x alpha`` is normalised so ``H(1) = 1``; the intertwining
    ``J T_alpha = V J`` then holds for the normalised weight ``alpha / H(1)``.

    Row i is the average of ``Jf`` over the cell ``[x_i, x_{i+1}]``. After
    the substitution ``s = phi(t)`` the weight cancels and the row becomes
    ``(1/h) int_{phi(x_i)}^{phi(x_{i+1})} f(s) ds``, integrating the
    piecewise-constant reconstruction of ``f``. This stays bounded when
    ``alpha`` vanishes at 0 (where the pointwise formula is singular) and
    reduces to the identity matrix for ``alpha = 1``.

    ``alpha`` must be nonnegative and strictly positive at every node except
    possibly ``x_0 = 0``, which keeps ``H`` strictly increasing on (0, 1].
    """
    a = np.asarray(_samples(alpha, grid), dtype=float)
    if np.any(a < 0) or np.any(~np.isfinite(a)):
        raise ValueError("weight must be finite and nonnegative")
    if np.any(a[1:] <= 0):
        raise ValueError("weight vanishes at an interior node: H is not strictly increasing")
    n, h = grid.n_points, grid.h
    H = np.concatenate([[0.0], h * np.cumsum(a)])
    if H[-1] <= 0:
        raise ValueError("weight has zero integral")
    H = H / H[-1]
    t = np.arange(n + 1) * h
    t[-1] = 1.0
    # phi(t): lower node on ties (flat cells), linear inside each rising cell
    k = np.clip(np.searchsorted(H, t, side="left") - 1, 0, n - 1)
    rise = H[k + 1] - H[k]
    frac = np.where(rise > 0, (t - H[k]) / np.where(rise > 0, rise, 1.0), 0.0)
    phi = np.clip((k + np.clip(frac, 0.0, 1.0)) * h, 0.0, 1.0)
    phi[0] = 0.0
    phi[-1] = 1.0
    # E[r, j]: weights of G(phi_r) = int_0^{phi_r} f for piecewise-constant f
    m = np.minimum(np.floor(phi / h).astype(np.int64), n - 1)
    cols = np.arange(n)
    E = np.where(cols[None, :] < m[:, None], h, 0.0)
    E[np.arange(n + 1), m] += phi - m * h
    return LinOp((E[1:] - E[:-1]) / h, "general", grid)


# ---------------------------------------------------------------------------
# sequence-space examples
# ---------------------------------------------------------------------------


def weighted_backward_shift(N: int) -> np.ndarray:
    """Matrix of ``e_0 -> 0, e_n -> e_{n-1}/n``."""
    S = np.zeros((N, N))
    n = np.arange(1, N)
    S[n - 1, n] = 1.0 / n
    return S


def shift_example_pair(N: int) -> tuple[LinOp, LinOp]:
    """``T = I + (weighted backward shift)``, ``M = backward shift`` on C^N.

    Backward shifts leave span{e_0..e_{N-1}} invariant, so the truncations
    compose without leakage.
    """
    if N < 3:
        raise ValueError("N must be at least 3")
    T = np.eye(N) + weighted_backward_shift(N)
    M = np.eye(N, k=1)
    return LinOp(T, "general", N), LinOp(M, "general", N)


def hs_left_mult(N: int) -> LinOp:
    """Left multiplication ``A -> S A`` on N x N matrices (row-major vec).

    ``S`` is the weighted backward shift; with the Frobenius norm the
    truncated Hilbert-Schmidt class is C^(N*N) with the Euclidean norm.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    return LinOp(np.kron(weighted_backward_shift(N), np.eye(N)), "general", N * N)


def _orth(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, s > rtol * s[0]]


def _null(m: np.ndarray, rtol: float = 1e-10, scale: float | None = None) -> np.ndarray:
    # scale: size of the underlying operator; m itself may be zero up to rounding
    _, s, vh = np.linalg.svd(m)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    rank = int(np.sum(s > rtol * ref)) if ref > 0 else 0
    return vh[rank:].conj().T


def hs_kernel_range_basis(N: int, n: int) -> np.ndarray:
    """Orthonormal basis (columns, row-major vec) of ``ker Phi^n ∩ ran Phi^n``.

    Computed by brute force from the N^2 x N^2 matrix: the intersection is
    the set of ``x = R c`` (R spanning the range) with ``Phi^n x = 0``.
    """
    P = hs_left_mult(N).power(n).matrix
    R = _orth(P)
    if R.shape[1] == 0:
        return R
    c = _null(P @ R, scale=float(np.linalg.norm(P, 2)))
    if c.shape[1] == 0:
        return R[:, :0]
    return _orth(R @ c)


def kronecker_mult(angles) -> LinOp:
    """``Tf(z) = z f(z)`` on C(K) for the finite set K = {exp(i theta_j)}."""
    th = np.asarray(angles, dtype=float)
    if th.ndim != 1 or th.size == 0:
        raise ValueError("need a nonempty list of angles")
    z = np.exp(1j * th)
    if len(th) > 1:
        d = np.abs(z[:, None] - z[None, :]) + np.eye(len(th))
        if np.any(d < 1e-12):
            raise ValueError("duplicate angles (mod 2*pi)")
    return LinOp.diagonal(z, len(th))


def adjoint(A: LinOp) -> LinOp:
    """Conjugate transpose; the pairing has uniform weights, so no reweighting."""
    if A.tag == "diagonal":
        return LinOp.diagonal(np.conj(A.diag), A.domain)
    return LinOp(A.matrix.conj().T, "general", A.domain)


# ---------------------------------------------------------------------------
# operator spec strings
# ---------------------------------------------------------------------------

_FUNCS = {
    "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
    "tan": np.tan, "abs": np.abs, "sinh": np.sinh, "cosh": np.cosh,
    "maximum": np.maximum, "minimum": np.minimum,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: _op.add, ast.Sub: _op.sub, ast.Mult: _op.mul, ast.Div: _op.truediv,
           ast.Pow: _op.pow}
_UNOPS = {ast.USub: _op.neg, ast.UAdd: _op.pos}


def eval_expr(expr: str, x: np.ndarray) -> np.ndarray:
    """Evaluate a small arithmetic expression in ``x`` (no names beyond math)."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"bad expression {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id == "x":
                return x
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ValueError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ValueError(f"unsupported syntax in {expr!r}")

    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.broadcast_to(np.asarray(ev(tree), dtype=float), x.shape).copy()
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{expr!r} is not finite at every node")
    return out


def parse_operator(spec: str, grid: Grid) -> LinOp:
    """Build an operator from a spec string.

    ``V``, ``M``, ``cesaro``, ``T_alpha:<expr>``, ``S_alpha:<expr>``,
    ``R_s:<s>``, ``conv:<expr>``, ``shift_example:<N>``,
    ``kronecker:<t1,t2,...>``.
    """
    head, _, arg = spec.strip().partition(":")
    head = head.strip()
    if head == "V" and not arg:
        return volterra(grid)
    if head == "M" and not arg:
        return mult_by_x(grid)
    if head == "cesaro" and not arg:
        return cesaro(grid)
    if head == "T_alpha" and arg:
        return weighted_volterra_T(grid, eval_expr(arg, grid.nodes))
    if head == "S_alpha" and arg:
        return weighted_volterra_S(grid, eval_expr(arg, grid.nodes))
    if head == "R_s" and arg:
        return power_weight_volterra(grid, float(arg))
    if head == "conv" and arg:
        from .algebra import ConvElement

        return ConvElement(eval_expr(arg, grid.nodes), grid).op
    if head == "shift_example" and arg:
        return shift_example_pair(int(arg))[0]
    if head == "kronecker" and arg:
        return kronecker_mult([float(t) for t in arg.split(",")])
    raise ValueError(f"unknown operator spec {spec!r}")


def apply_adjoint(A: LinOp, g: DualFunctional) -> DualFunctional:
    """``A^* g`` as a functional: ``pair(A^* g, f) == pair(g, A f)``."""
    _check_grid(A.domain, g.grid)
    return DualFunctional(g.grid, adjoint(A).apply(g.samples), g.q)
