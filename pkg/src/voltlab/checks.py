"""Named numerical checks.

Each check computes a handful of measured quantities, compares them with
fixed tolerances and returns :class:`Assertion` rows plus free-form metrics.
The CLI scenarios and the acceptance suite both run these.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra as alg
from . import dynamics as dyn
from . import weakclosure as wc
from .fnspace import (DualFunctional, Grid, GridFunction, derivative_l2_norm, lp_norm,
                      weighted_norm)
from .operators import (SeqVector, adjoint, eval_expr, intertwiner_J, mult_by_x,
                        multiplication, parse_operator, volterra, weighted_volterra_S,
                        weighted_volterra_T)


@dataclass
class Assertion:
    name: str
    anchor: str
    measured: float
    tolerance: str
    passed: bool

    def to_json(self) -> dict:
        m = self.measured
        return {"name": self.name, "anchor": self.anchor,
                "measured": m if isinstance(m, (int, str)) or m is None or math.isfinite(m) else repr(m),
                "tolerance": self.tolerance, "passed": bool(self.passed)}


@dataclass
class CheckResult:
    assertions: list
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.assertions) and all(a.passed for a in self.assertions)


def _le(name, anchor, measured, tol, fmt="<= {:g}"):
    return Assertion(name, anchor, float(measured), fmt.format(tol), bool(measured <= tol))


def _ge(name, anchor, measured, tol, fmt=">= {:g}"):
    return Assertion(name, anchor, float(measured), fmt.format(tol), bool(measured >= tol))


def _write_rows(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _smooth(grid: Grid, rng: np.random.Generator, positive: bool = False, terms: int = 4):
    c = rng.standard_normal(terms)
    x = grid.nodes
    s = sum(c[k] * np.cos(k * math.pi * x) for k in range(terms))
    if positive:
        s = np.exp(0.5 * s)
    return s


# ---------------------------------------------------------------------------
# operator identities
# ---------------------------------------------------------------------------


def volterra_powers(grid: Grid, n_max: int) -> list:
    one = np.ones(grid.n_points)
    V = volterra(grid)
    out = [one]
    for _ in range(n_max):
        out.append(V.apply(out[-1]))
    return out


def volterra_calculus(N: int = 4096, n_max: int = 8, x_min: float = 0.1, tol: float = 5e-3,
                      band: float = 0.2, out: Path | None = None, seed: int = 0) -> CheckResult:
    """Relative error of V^n 1 against x^n/n! on x >= x_min, at N and 2N."""
    errs = {}
    for M in (N, 2 * N):
        g = Grid(M)
        sel = g.nodes >= x_min
        xs = g.nodes[sel]
        pw = volterra_powers(g, n_max)
        errs[M] = [float(np.max(np.abs(pw[n][sel] / (xs ** n / math.factorial(n)) - 1)))
                   for n in range(1, n_max + 1)]
    worst = max(errs[N])
    ratios = [b / a for a, b in zip(errs[N], errs[2 * N])]
    off = max(abs(r - 0.5) / 0.5 for r in ratios)
    if out is not None:
        _write_rows(out / "volterra_calculus.csv", ["n", f"err_N{N}", f"err_N{2 * N}", "ratio"],
                    [(n + 1, errs[N][n], errs[2 * N][n], ratios[n]) for n in range(n_max)])
    return CheckResult([
        _le(f"max rel error of V^n 1, n <= {n_max}, N = {N}", "V^n 1 = x^n/n!", worst, tol),
        _le("error halves when N doubles (max deviation of ratio from 1/2)",
            "first-order rectangle rule", off, band, "<= {:g} relative"),
    ], {"errors": errs, "halving_ratios": ratios})


def commutator_identity(Ns=(256, 512, 1024), tol: float = 1e-13, factor: float = 1.5,
                        out: Path | None = None, seed: int = 0) -> CheckResult:
    """[M, V] against the convolution by x (exact) and against V^2 (O(h))."""
    rows, exact, cont = [], [], []
    for N in Ns:
        g = Grid(N)
        V, M = volterra(g), mult_by_x(g)
        C = alg.commutator(M, V).matrix
        Mx = alg.ConvElement(g.nodes, g).op.matrix
        e = float(np.linalg.norm(C - Mx, 2))
        V2 = V.power(2).matrix
        c = float(np.linalg.norm(C - V2, 2)) / (g.h * float(np.linalg.norm(V.matrix, 2)))
        exact.append(e)
        cont.append(c)
        rows.append((N, e, c))
    if out is not None:
        _write_rows(out / "commutator.csv", ["N", "exact_residual", "continuum_ratio"], rows)
    return CheckResult([
        _le("||[M,V] - M_x||_2 (exact discrete identity)", "MV - VM = V^2", max(exact), tol),
        _le("||[M,V] - V^2|| / (h ||V||)", "MV - VM = V^2", max(cont), factor),
    ], {"N": list(Ns), "exact_residual": exact, "continuum_ratio": cont})


def der_identity(N: int = 256, n_max: int = 10, tol: float = 1e-11,
                 out: Path | None = None, seed: int = 0) -> CheckResult:
    """Relative residual of T^n M - M T^n = n S T^{n-1} for T = V."""
    g = Grid(N)
    T, M = volterra(g), mult_by_x(g)
    rel = []
    for n in range(1, n_max + 1):
        r = alg.der_identity_residual(T, M, n)
        Tn = T.power(n)
        scale = float(np.linalg.norm(Tn.compose(M).matrix, 2) + np.linalg.norm(M.compose(Tn).matrix, 2))
        rel.append(r / scale)
    if out is not None:
        _write_rows(out / "der.csv", ["n", "relative_residual"], list(zip(range(1, n_max + 1), rel)))
    return CheckResult([_le(f"relative residual, n <= {n_max}, N = {N}",
                            "T^n M - M T^n = n S T^(n-1)", max(rel), tol)],
                       {"relative_residual": rel})


def leibniz(N: int = 512, samples: int = 10, tol: float = 1e-12, seed: int = 0,
            out: Path | None = None) -> CheckResult:
    """M_x is a derivation of the convolution algebra."""
    g = Grid(N)
    M = mult_by_x(g)
    rng = np.random.default_rng(seed)
    rel = []
    for _ in range(samples):
        a = alg.ConvElement(_smooth(g, rng), g)
        b = alg.ConvElement(_smooth(g, rng), g)
        r = alg.leibniz_check(M, a, b)
        rel.append(r / max(lp_norm(alg.star(a, b).as_function()), 1e-300))
    return CheckResult([_le("relative Leibniz residual", "x(a*b) = (xa)*b + a*(xb)", max(rel), tol)],
                       {"relative_residual": rel})


def quasinilpotency(N: int = 1024, n: int = 30, tol: float = 0.15,
                    out: Path | None = None, seed: int = 0) -> CheckResult:
    """(||V^n 1||_inf)^(1/n) at a single n."""
    g = Grid(N)
    r = alg.quasinilpotency_probe(volterra(g), g.constant(1.0, math.inf), n, math.inf)
    if out is not None:
        _write_rows(out / "quasinilpotency.csv", ["n", "root"], list(zip(range(1, n + 1), r)))
    oracle = math.exp(-math.lgamma(n + 1) / n)
    return CheckResult([_le(f"(||V^n 1||_inf)^(1/n) at n = {n}, N = {N}",
                            "V is quasinilpotent", r[n - 1], tol)],
                       {"root": float(r[n - 1]), "closed_form": oracle})


def intertwining(Ns=(512, 1024, 2048), degree: int = 5, p: float = 1.0, stability: float = 1.25,
                 alpha: str = "2*x", out: Path | None = None, seed: int = 0) -> CheckResult:
    """J T_alpha - V J on monomials is O(h) with a stable constant; M S = T M exactly."""
    consts, exact, rows = [], [], []
    for N in Ns:
        g = Grid(N)
        a = eval_expr(alpha, g.nodes) * np.ones(N)
        J = intertwiner_J(g, a)
        T = weighted_volterra_T(g, a)
        R = J.compose(T) - volterra(g).compose(J)
        errs = [weighted_norm(R.apply(g.nodes ** d), p, g.h) for d in range(degree + 1)]
        consts.append(max(errs) / g.h)
        Ma = multiplication(g, a)
        S = weighted_volterra_S(g, a)
        exact.append(float(np.max(np.abs(Ma.compose(S).matrix - T.compose(Ma).matrix))))
        rows.append((N, consts[-1], exact[-1]))
    if out is not None:
        _write_rows(out / "intertwining.csv", ["N", "C", "MS_minus_TM"], rows)
    spread = max(consts) / min(consts)
    return CheckResult([
        _le("max/min over N of C = max_d ||(J T - V J) x^d||_1 / h",
            "J T_alpha = V J (similarity to V)", spread, stability),
        _le("max |M_alpha S_alpha - T_alpha M_alpha|", "M_alpha S_alpha = T_alpha M_alpha",
            max(exact), 0.0, "== {:g}"),
    ], {"C": consts, "exact_residual": exact})


def sobolev(N: int = 1024, samples: int = 10, seed: int = 0,
            out: Path | None = None) -> CheckResult:
    """derivative_l2_norm(V^2 f) against ||V f||_2, tolerance h."""
    g = Grid(N)
    V = volterra(g)
    rng = np.random.default_rng(seed)
    diffs = []
    for _ in range(samples):
        f = GridFunction(g, _smooth(g, rng) + 0.1 * rng.standard_normal(N))
        diffs.append(abs(derivative_l2_norm(V.apply(V.apply(f))) - lp_norm(V.apply(f), 2)))
    return CheckResult([_le(f"| ||D V^2 f||_2 - ||V f||_2 | for {samples} random f",
                            "V^2 maps L_2 onto W^(1,2)_0", max(diffs), g.h, "<= h = {:g}")],
                       {"differences": diffs})


# ---------------------------------------------------------------------------
# witnesses and the orbit inequality
# ---------------------------------------------------------------------------


def g1_random_witnesses(count: int = 100, N: int = 256, n_max: int = 100, seed: int = 0,
                        margin_tol: float = 1e-9, chain_tol: float = 1e-10,
                        out: Path | None = None) -> CheckResult:
    """Orbit inequality for seeded random witnesses built for x = 1."""
    g = Grid(N)
    T = volterra(g)
    one = g.constant(1.0)
    rng = np.random.default_rng(seed)
    margins, chains, consts, rows = [], [], [], []
    for i in range(count):
        w = GridFunction(g, _smooth(g, rng, positive=True))
        W = alg.witness_for_vector(T, one, w=w)
        hf = DualFunctional(g, rng.standard_normal(N), 2.0)
        rep = alg.g1_margin(W, one, hf, n_max)
        margins.append(rep.min_margin)
        chains.append(rep.max_chain_residual)
        consts.append(rep.constant)
        rows.append((i, rep.constant, rep.min_margin, rep.max_chain_residual,
                     rep.hypothesis_residual))
    if out is not None:
        _write_rows(out / "g1_witnesses.csv",
                    ["witness", "constant", "min_margin", "max_chain_residual",
                     "hypothesis_residual"], rows)
    anchor = "orbit bound |g(R T^n x)| <= C (n+1)^-1 ||R T^n x||"
    return CheckResult([
        _ge(f"min margin (rhs - lhs)/rhs over {count} witnesses, n <= {n_max}", anchor,
            min(margins), -margin_tol),
        _le("max relative residual of the equality chain", anchor, max(chains), chain_tol),
    ], {"min_margin": min(margins), "max_chain_residual": max(chains),
        "constants": [float(c) for c in consts]})


def pipeline(N: int = 512, n_max: int = 60, seed: int = 0, k: int = 4, trials: int = 5,
             sobolev_samples: int = 10, out: Path | None = None) -> CheckResult:
    """Scaled-set pipeline for the Volterra orbit with witnesses u = v = 1, R = V^2."""
    g = Grid(N)
    T = volterra(g)
    one = g.constant(1.0)
    rng = np.random.default_rng(seed)
    W = alg.witness_builder(T, one, one)
    hf = DualFunctional(g, rng.standard_normal(N), 2.0)
    rep = alg.g1_margin(W, one, hf, n_max, strict=False)
    gfun = DualFunctional(g, adjoint(W.C.compose(W.S)).apply(hf.samples), 2.0)
    pts, cur = [], W.R.apply(one)
    for _ in range(n_max + 1):
        pts.append(cur)
        cur = T.apply(cur)
    res = dyn.le3_pipeline(pts, gfun, one, c_bound=rep.constant, k=k, trials=trials, seed=seed)
    if out is not None:
        _write_rows(out / "pipeline.csv", ["n", "decay_constant", "scaled_norm"],
                    [(n, res.decay_constants[n], res.scaled_norms[n]) for n in range(len(pts))])
    sob = sobolev(N, sobolev_samples, seed + 1)
    anchor = "orbit bound |g(R T^n x)| <= C (n+1)^-1 ||R T^n x||"
    return CheckResult([
        _le(f"measured c = max (n+1)|g(R V^n 1)|/||R V^n 1||_2, n <= {n_max}", anchor,
            res.c, rep.constant, "<= ||(B-CM)*h||_2 = {:.6g}"),
        Assertion("||y_n|| >= |b|(n+1)/c after normalisation", "scaled set grows linearly",
                  float(res.scaled_norms.min()), "all n", res.growth_ok),
        Assertion("Gaussian certificate for {y_n - y}", "y outside the weak closure",
                  float(res.certificate.epsilon) if res.certified else 0.0, "epsilon > 0",
                  res.certified),
    ] + sob.assertions, {"c": res.c, "constant": rep.constant,
                         "hypothesis_residual": rep.hypothesis_residual,
                         "refused": res.refused, "sobolev": sob.metrics})


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------


def angle_statistic(N: int = 2048, ps=(1.0, 2.0), n_min: int = 5, n_max: int = 40,
                    tol: float = 0.02, out: Path | None = None, seed: int = 0) -> CheckResult:
    """a_n for T = V, x = f = 1 against (np+1)^(1/p)/(n+1)."""
    g = Grid(N)
    V = volterra(g)
    res, rows = [], []
    for p in ps:
        a = dyn.angle_statistic(V, g.constant(1.0, p), np.ones(N), n_max, p)
        n = np.arange(n_max + 1)
        ref = (n * p + 1) ** (1 / p) / (n + 1)
        rel = np.abs(a / ref - 1)
        res.append(float(rel[n_min:].max()))
        rows += [(p, int(i), a[i], ref[i]) for i in n]
    if out is not None:
        _write_rows(out / "angle.csv", ["p", "n", "measured", "closed_form"], rows)
    return CheckResult([_le(f"max relative deviation from (np+1)^(1/p)/(n+1), "
                            f"{n_min} <= n <= {n_max}, N = {N}",
                            "angle between V^n 1 and 1", max(res), tol)],
                       {"per_p": dict(zip([str(p) for p in ps], res))})


def weak_null(count: int = 20, degree: int = 5, N: int = 1024, n_ref: int = 10, n_max: int = 100,
              factor: float = 0.1, seed: int = 0, out: Path | None = None) -> CheckResult:
    """|<x^j, V^n x>| / ||V^n x|| at n_max against n_ref, random smooth x."""
    g = Grid(N)
    V = volterra(g)
    funcs = [g.nodes ** j for j in range(degree + 1)]
    rng = np.random.default_rng(seed)
    worst, rows = 0.0, []
    for i in range(count):
        x = GridFunction(g, _smooth(g, rng) + 0.5 * rng.standard_normal())
        rep = dyn.weak_null_test(V, x, funcs, n_max, n_ref, 2.0)
        d = rep.decay
        worst = max(worst, float(d.max()))
        rows += [(i, j, rep.ratios[n_ref, j], rep.ratios[-1, j], d[j]) for j in range(len(funcs))]
    if out is not None:
        _write_rows(out / "weak_null.csv", ["x", "degree", f"ratio_n{n_ref}", f"ratio_n{n_max}",
                                            "decay"], rows)
    return CheckResult([_le(f"max over pairs of ratio(n={n_max}) / ratio(n={n_ref})",
                            "V^n x / ||V^n x|| -> 0 weakly", worst, factor)],
                       {"worst_decay": worst, "n^-1/2 prediction": math.sqrt((n_ref + 1) / (n_max + 1))})


def orbit_dump(operator: str = "V", x: str = "1", functionals=("1",), N: int = 512,
               n_max: int = 50, p: float = 2.0, out: Path | None = None,
               seed: int = 0) -> CheckResult:
    """Plain orbit of an operator spec, dumped to orbit.csv."""
    g = Grid(N)
    T = parse_operator(operator, g)
    xs = GridFunction(g, eval_expr(x, g.nodes) * np.ones(N), p)
    fs = [eval_expr(f, g.nodes) * np.ones(N) for f in functionals]
    orb = dyn.orbit(T, xs, n_max, fs, p)
    if out is not None:
        dyn.write_orbit_csv(orb, out / "orbit.csv")
    L = orb.log_norms
    return CheckResult([Assertion("orbit computed without vanishing", operator,
                                  float(len(orb) - 1), f"== {n_max} steps",
                                  not orb.terminated and bool(np.all(np.isfinite(L))))],
                       {"log_norm_last": float(L[-1])})


# ---------------------------------------------------------------------------
# structure, certificates, Kronecker sets
# ---------------------------------------------------------------------------


def commutant(Ns=(8, 16), gap: float = 1e3, out: Path | None = None, seed: int = 0) -> CheckResult:
    """Nullity and singular gap of the Sylvester system for (V, M_x)."""
    dims, gaps = [], []
    for N in Ns:
        g = Grid(N)
        pr = alg.joint_commutant_dimension(volterra(g), mult_by_x(g))
        dims.append(pr.dimension)
        gaps.append(pr.gap)
        if out is not None:
            _write_rows(out / f"commutant_sv_N{N}.csv", ["index", "sigma"],
                        list(enumerate(pr.singular_values)))
    anchor = "the joint commutant of V and M_x is trivial"
    return CheckResult([
        Assertion(f"nullity at N = {list(Ns)}", anchor, max(dims), "== 1 at every N",
                  all(d == 1 for d in dims)),
        _ge("singular value gap", anchor, min(gaps), gap),
    ], {"dimension": dims, "gap": [g if math.isfinite(g) else repr(g) for g in gaps]})


def certify(n_points: int = 200, k: int = 4, seed: int = 42, trials: int = 5,
            type_p: float = 2.0, decay_q: float = 1.5, epsilon: float = 0.1,
            mc_samples: int = 100_000, check_indices=(0, 10, 50, 199),
            out: Path | None = None) -> CheckResult:
    """Certificate for x_n = (n+1) e_n, y = 0, plus the small-ball estimate."""
    pts = [SeqVector((n + 1) * np.eye(1, n_points, n)[0]) for n in range(n_points)]
    cert = wc.gaussian_certificate(pts, None, k=k, trials=trials, seed=seed,
                                   type_p=type_p, decay_q=decay_q)
    ok = isinstance(cert, wc.WeakClosureCertificate)
    anchor = "0 is not in the weak closure"
    rows = [Assertion(f"certificate within {trials} trials", anchor,
                      float(cert.trial + 1) if ok else math.inf, f"<= {trials} trials", ok)]
    metrics = {}
    if ok:
        again = wc.gaussian_certificate(pts, None, k=k, trials=trials, seed=seed,
                                        type_p=type_p, decay_q=decay_q)
        same = (isinstance(again, wc.WeakClosureCertificate)
                and np.array_equal(again.margins, cert.margins) and again.epsilon == cert.epsilon)
        rows.append(Assertion("stored-seed rerun reproduces margins bit for bit", anchor,
                              float(cert.epsilon), "identical", same))
        rows.append(Assertion("certificate re-validates", anchor, float(cert.margins.min()),
                              f">= epsilon = {cert.epsilon:.6g}", cert.revalidate(pts)))
        metrics.update(epsilon=cert.epsilon, trial=cert.trial, theory_bound=cert.theory_bound)
        if out is not None:
            cert.write(out / "certificate.json")
    else:
        metrics["failure"] = cert.to_json()
    fam = wc.build_norming_family(pts, None, type_p, decay_q)
    sb = wc.small_ball_bound_check(fam, pts, None, epsilon, mc_samples, seed,
                                   [i for i in check_indices if i < n_points])
    worst = max(r.empirical / (r.bound * (1 + 3 * r.sigma)) for r in sb)
    rows.append(_le(f"max empirical / (bound (1 + 3 sigma_MC)), eps = {epsilon}, "
                    f"n in {list(check_indices)}", "small-ball estimate eps/|f_n(x_n)|", worst, 1.0))
    metrics["small_ball"] = [{"n": r.n, "empirical": r.empirical, "exact": r.exact,
                              "bound": r.bound, "sigma": r.sigma} for r in sb]
    metrics["flags"] = list(fam.flags)
    if out is not None:
        _write_rows(out / "small_ball.csv", ["n", "empirical", "exact", "bound", "sigma", "a_n", "pair"],
                    [(r.n, r.empirical, r.exact, r.bound, r.sigma, r.a_n, r.pair) for r in sb])
    return CheckResult(rows, metrics)


GOLDEN_ANGLES = (2 * math.pi * (math.sqrt(2) - 1), 2 * math.pi * (math.sqrt(3) - 1))


def kronecker(targets: int = 20, delta: float = 0.15, n_max: int = 1_000_000,
              obstruction_samples: int = 10_000, obstruction_tol: float = 1e-12,
              two_term_targets: int = 10, two_term_tol: float = 0.2, seed: int = 0,
              angles=GOLDEN_ANGLES, out: Path | None = None) -> CheckResult:
    """Density of a unimodular diagonal orbit and its projective obstruction."""
    th = np.asarray(angles, dtype=float)
    rng = np.random.default_rng(seed)
    found = []
    results = []
    for _ in range(targets):
        tg = np.exp(1j * rng.uniform(0, 2 * math.pi, th.size))
        r = dyn.kronecker_density_search(th, tg, delta, n_max)
        results.append(r.to_json())
        found.append(r.n_found)
    hit = [n for n in found if n is not None]
    f = rng.standard_normal(th.size) + 1j * rng.standard_normal(th.size)
    z = rng.standard_normal(obstruction_samples) + 1j * rng.standard_normal(obstruction_samples)
    ns = rng.integers(0, n_max + 1, obstruction_samples)
    viol = dyn.projective_obstruction(f, th, zip(z, ns))
    errs = []
    for _ in range(two_term_targets):
        g = rng.uniform(0, 1, th.size) * np.exp(1j * rng.uniform(0, 2 * math.pi, th.size))
        g *= rng.uniform(0, 2) / np.max(np.abs(g))
        errs.append(dyn.two_term_decomposition(th, g, two_term_tol, n_max).error)
    if out is not None:
        import json
        (out / "density.json").write_text(json.dumps(results, indent=1, sort_keys=True))
    return CheckResult([
        Assertion(f"{targets} random targets found with delta = {delta}",
                  "orbit of a Kronecker diagonal is dense in the torus",
                  float(max(hit)) if len(hit) == targets else math.inf, f"n <= {n_max}",
                  len(hit) == targets),
        _le(f"projective obstruction over {obstruction_samples} orbit elements",
            "|g_t f_s| = |g_s f_t| on the projective orbit", viol, obstruction_tol),
        _le(f"two-term error ||r(T^k 1 + T^m 1) - g||_inf, {two_term_targets} targets",
            "g = r(g_1 + g_2) with unimodular g_i", max(errs), two_term_tol, "< {:g}"),
    ], {"n_found": found, "obstruction": viol, "two_term_errors": errs})


def g1_chain(N: int = 256, count: int = 5, n_max: int = 60, seed: int = 0,
             out: Path | None = None) -> CheckResult:
    """Short run of :func:`g1_random_witnesses` for the identity suite."""
    return g1_random_witnesses(count, N, n_max, seed, out=out)


# registry: kind -> check name -> callable
REGISTRY = {
    "verify": {"volterra_calculus": volterra_calculus, "commutator": commutator_identity,
               "der": der_identity, "leibniz": leibniz, "quasinilpotency": quasinilpotency,
               "intertwining": intertwining, "sobolev": sobolev, "g1_chain": g1_chain},
    "orbit": {"angle": angle_statistic, "weak_null": weak_null, "dump": orbit_dump},
    "certify": {"certificate": certify},
    "kronecker": {"density": kronecker},
    "commutant": {"sylvester": commutant},
    "witness": {"g1": g1_random_witnesses, "pipeline": pipeline},
}

DEFAULTS = {
    "verify": ["commutator", "der", "leibniz", "g1_chain"],
    "orbit": ["angle"],
    "certify": ["certificate"],
    "kronecker": ["density"],
    "commutant": ["sylvester"],
    "witness": ["g1"],
}
