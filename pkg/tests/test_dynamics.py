import csv
import json
import math

import numpy as np
import pytest

from voltlab.dynamics import (angle_statistic, kronecker_density_search, le3_pipeline,
                              obstruction_violation, orbit, projective_obstruction,
                              two_term_decomposition, weak_null_test, write_density_json,
                              write_orbit_csv)
from voltlab.fnspace import DualFunctional, Grid, GridFunction, weighted_norm
from voltlab.operators import LinOp, SeqVector, identity, shift_example_pair, volterra

ANGLES = np.array([2 * math.pi * (math.sqrt(2) - 1), 2 * math.pi * (math.sqrt(3) - 1)])


def test_identity_orbit_is_constant():
    g = Grid(32)
    x = g.sample(lambda t: 1 + t)
    orb = orbit(identity(g), x, 5)
    assert np.all(orb.log_norms == orb.log_norms[0])
    assert all(np.array_equal(r.unit, orb[0].unit) for r in orb)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_volterra_orbit_log_norm(p):
    g = Grid(2048)
    orb = orbit(volterra(g), g.constant(1.0, p), 40)
    n = np.arange(41)
    closed = -np.array([math.lgamma(k + 1) for k in n]) - np.log(n * p + 1) / p
    # the 2% is relative on the log scale; the norm itself drifts like n^2 h / 2
    assert np.max(np.abs(orb.log_norms[1:] / closed[1:] - 1)) <= 0.02
    assert abs(np.exp(orb.log_norms[5] - closed[5]) - 1) <= 0.02


def test_units_have_unit_norm():
    g = Grid(256)
    orb = orbit(volterra(g), g.sample(np.cos, 1.5), 60)
    for r in orb:
        assert abs(weighted_norm(r.unit, 1.5, g.h) - 1) <= 1e-12
        assert math.isfinite(r.log_norm)


def test_orbit_reconstruction_against_long_double(rng):
    N = 512
    g = Grid(N)
    x = np.cos(3 * g.nodes) + 0.3 * rng.standard_normal(N)
    orb = orbit(volterra(g), GridFunction(g, x), 30)
    L = np.tril(np.ones((N, N), dtype=np.longdouble)) / np.longdouble(N)
    v = x.astype(np.longdouble)
    for n in range(31):
        rec = np.exp(orb[n].log_norm) * orb[n].unit
        rel = np.max(np.abs(rec - v)) / np.max(np.abs(v))
        assert float(rel) <= 1e-8, n
        v = L @ v


def test_functional_values_obey_holder(rng):
    g = Grid(128)
    fs = [rng.standard_normal(128) for _ in range(3)]
    orb = orbit(volterra(g), g.sample(np.exp), 30, fs, 2.0)
    bounds = [weighted_norm(f, 2.0, g.h) for f in fs]
    assert np.all(np.abs(orb.functional_matrix()) <= np.array(bounds) * (1 + 1e-12))


def test_nilpotent_orbit_terminates():
    S = LinOp(np.eye(4, k=-1))
    orb = orbit(S, SeqVector(np.eye(4)[0]), 10)
    assert orb.terminated and len(orb) == 4


def test_angle_statistic_volterra():
    g = Grid(2048)
    a = angle_statistic(volterra(g), g.constant(1.0), np.ones(2048), 40, 2.0)
    n = np.arange(41)
    np.testing.assert_allclose(a, np.sqrt(2 * n + 1) / (n + 1), rtol=0.02)


def test_angle_statistic_orthogonal():
    g = Grid(64)
    x = g.sample(lambda t: np.where(t < 0.5, 1.0, 0.0))
    f = np.where(g.nodes < 0.5, 0.0, 1.0)
    assert not np.any(angle_statistic(identity(g), x, f, 5))


def test_angle_statistic_shift_example_stays_away_from_zero():
    T, _ = shift_example_pair(64)
    e0 = np.eye(64)[0]
    a = angle_statistic(T, SeqVector(np.ones(64)), e0, 200)
    assert a[-1] > 0.9 and a[100:].min() > 0.9
    with pytest.raises(ValueError):
        angle_statistic(T, SeqVector(np.ones(64)), np.zeros(64), 3)


def test_weak_null_rate_is_inverse_square_root(rng):
    g = Grid(2048)
    x = GridFunction(g, 1 + 0.5 * np.sin(3 * g.nodes))
    rep = weak_null_test(volterra(g), x, [np.ones(2048)], 200, 10, 2.0)
    n = np.arange(20, 201)
    slope = np.polyfit(np.log(n), np.log(rep.ratios[20:, 0]), 1)[0]
    assert -0.6 <= slope <= -0.4
    assert rep.final < rep.ratios[10, 0]


def test_weak_null_polynomials_decrease():
    g = Grid(1024)
    funcs = [g.nodes ** j for j in range(6)]
    rep = weak_null_test(volterra(g), g.sample(lambda t: 2 + np.cos(t)), funcs, 100, 10)
    assert np.all(rep.decay < 1)


def test_weak_null_identity_is_not_null():
    g = Grid(32)
    rep = weak_null_test(identity(g), g.constant(1.0), [np.ones(32)], 20)
    assert np.allclose(rep.ratios, rep.ratios[0])
    assert not rep.is_null(1e-3)


def test_obstruction_trivial_and_sampled(rng):
    f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert projective_obstruction(f, ANGLES, [(1.0, 0)]) == 0
    z = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
    ns = rng.integers(0, 10_001, 1000)
    assert projective_obstruction(f, ANGLES, zip(z, ns)) <= 1e-12
    with pytest.raises(ValueError):
        projective_obstruction(np.zeros(2), ANGLES, [(1.0, 1)])


def test_obstruction_negative_control(rng):
    f = np.array([1.0 + 1j, 2.0 - 0.5j])
    g = 3j * f
    g[1] *= 1.01
    v = obstruction_violation(f, g, 0, 1)
    assert v == pytest.approx(0.01 * abs(f[0]) * abs(g[1]) / 1.01, rel=1e-9)


def test_density_search_trivial_target():
    r = kronecker_density_search(ANGLES, np.exp(1j * ANGLES), 1e-9, 10)
    assert r.n_found == 1 or r.n_found == 0 and np.allclose(np.exp(1j * ANGLES), 1)


def test_density_search_one_dimensional_bound(rng):
    th = ANGLES[:1]
    bound = math.ceil(2 * math.pi / 0.1)
    for _ in range(200):
        tg = np.exp(1j * rng.uniform(0, 2 * math.pi, 1))
        r = kronecker_density_search(th, tg, 0.1, 10 ** 5)
        assert r.found and r.n_found <= bound
        assert abs(np.exp(1j * r.n_found * th[0]) - tg[0]) < 0.1


def test_density_search_hits_satisfy_condition(rng):
    for _ in range(10):
        tg = np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
        r = kronecker_density_search(ANGLES, tg, 0.15, 10 ** 6)
        assert r.found
        assert np.max(np.abs(np.exp(1j * r.n_found * ANGLES) - tg)) < 0.15
        assert r.elapsed_steps == r.n_found + 1


def test_density_search_not_found_is_reported():
    r = kronecker_density_search([0.0], [-1.0 + 0j], 0.5, 1000)
    assert not r.found and r.n_found is None and r.elapsed_steps == 1001
    with pytest.raises(ValueError):
        kronecker_density_search([0.1], [2.0], 0.1, 10)


def test_two_term_decomposition(rng):
    for _ in range(5):
        g = rng.uniform(0, 1, 2) * np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
        res = two_term_decomposition(ANGLES, g, 0.2, 10 ** 6)
        approx = res.r * (np.exp(1j * res.k * ANGLES) + np.exp(1j * res.m * ANGLES))
        assert res.error == pytest.approx(np.max(np.abs(approx - g)))
        assert res.error < 0.2
    assert two_term_decomposition(ANGLES, np.zeros(2), 0.2, 10).error == 0
    with pytest.raises(ValueError):
        two_term_decomposition(ANGLES, np.array([3.0, 0]), 0.2, 10)


def _volterra_points(g, n_max):
    V = volterra(g)
    cur = V.apply(V.apply(g.constant(1.0)))
    pts = []
    for _ in range(n_max + 1):
        pts.append(cur)
        cur = V.apply(cur)
    return pts


def test_le3_ray_is_refused():
    g = Grid(64)
    y = g.sample(lambda t: 1 + t)
    pts = [y * (n + 2.0) for n in range(10)]
    res = le3_pipeline(pts, np.ones(64), y)
    assert not res.certified and "certifier failed" in res.refused


def test_le3_needs_nonzero_b():
    g = Grid(16)
    u = np.where(g.nodes < 0.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        le3_pipeline([g.constant(1.0)], u, g.constant(1.0))


def test_le3_decay_failure_reports_index():
    g = Grid(64)
    pts = _volterra_points(g, 10)
    res = le3_pipeline(pts, np.ones(64), g.constant(1.0), c_bound=1e-6)
    assert not res.decay_ok and res.failing_n == 0 and "n = 0" in res.refused


def test_le3_volterra_orbit(rng):
    g = Grid(256)
    pts = _volterra_points(g, 40)
    u = DualFunctional(g, rng.standard_normal(256))
    y = g.constant(1.0)
    res = le3_pipeline(pts, u, y, seed=3)
    assert res.decay_ok and res.growth_ok and res.certified
    b = abs(res.b)
    assert np.all(res.scaled_norms * (1 + 1e-9) >= b * (np.arange(41) + 1) / res.c)


def test_orbit_csv(tmp_path):
    g = Grid(16)
    orb = orbit(volterra(g), g.constant(1.0), 4, [np.ones(16), g.nodes])
    path = write_orbit_csv(orb, tmp_path / "o.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["n", "log_norm", "functional_1", "functional_2"]
    assert len(rows) == 6 and float(rows[3][1]) == orb[2].log_norm


def test_density_json(tmp_path):
    r = kronecker_density_search(ANGLES, np.exp(1j * ANGLES), 1e-6, 5)
    d = json.loads(write_density_json(r, tmp_path / "d.json").read_text())
    assert set(d) == {"angles", "target", "delta", "n_found", "elapsed_steps"}
