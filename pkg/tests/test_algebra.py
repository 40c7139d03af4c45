import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voltlab.algebra import (ConvElement, PreconditionError, WitnessError, commutator,
                             der_identity_residual, g1_margin, joint_commutant_dimension,
                             leibniz_check, quasinilpotency_probe, star, witness_builder,
                             witness_for_vector)
from voltlab.fnspace import DualFunctional, Grid, GridFunction
from voltlab.operators import LinOp, cesaro, identity, mult_by_x, volterra


def test_unit_star_unit():
    g = Grid(64)
    one = ConvElement(np.ones(64), g)
    np.testing.assert_array_equal(star(one, one).coeffs, g.h * np.arange(1, 65))


def test_unit_kernel_is_volterra():
    g = Grid(32)
    assert np.array_equal(ConvElement(np.ones(32), g).op.matrix, volterra(g).matrix)


def test_star_matches_matrix_product(rng):
    g = Grid(128)
    a = ConvElement(rng.standard_normal(128), g)
    b = ConvElement(rng.standard_normal(128), g)
    np.testing.assert_allclose(star(a, b).op.matrix, a.op.matrix @ b.op.matrix, atol=1e-14)
    assert np.array_equal(star(a, b).coeffs, star(b, a).coeffs)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_star_associative_on_dyadic_grid(seed):
    r = np.random.default_rng(seed)
    g = Grid(64)
    a, b, c = (ConvElement(r.integers(-4, 5, 64).astype(float), g) for _ in range(3))
    assert np.array_equal(star(star(a, b), c).coeffs, star(a, star(b, c)).coeffs)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([16, 37, 100]))
def test_convolution_operators_commute_exactly(seed, N):
    r = np.random.default_rng(seed)
    g = Grid(N)
    A = ConvElement(r.standard_normal(N), g).op
    B = ConvElement(r.standard_normal(N), g).op
    assert not np.any(commutator(A, B).matrix)


def test_conv_element_linear_and_injective(rng):
    g = Grid(16)
    a = ConvElement(rng.standard_normal(16), g)
    b = ConvElement(rng.standard_normal(16), g)
    np.testing.assert_allclose((a + 2 * b).op.matrix, a.op.matrix + 2 * b.op.matrix, atol=1e-15)
    assert np.any(a.op.matrix)
    with pytest.raises(ValueError):
        ConvElement(np.ones(3), g)


def test_commutator_examples():
    g = Grid(256)
    V, M = volterra(g), mult_by_x(g)
    assert not np.any(commutator(V, V.power(2)).matrix)
    C = commutator(M, V).matrix
    assert np.array_equal(C, ConvElement(g.nodes, g).op.matrix)
    assert np.array_equal(C, (V.power(2) - V * g.h).matrix)
    with pytest.raises(ValueError):
        commutator(V, volterra(Grid(8)))


def test_der_identity():
    g = Grid(128)
    V, M = volterra(g), mult_by_x(g)
    assert der_identity_residual(V, M, 1) == 0
    assert der_identity_residual(V, M, 2) <= 1e-12 * V.norm() ** 2
    for n in range(1, 8):
        assert der_identity_residual(V, M, n) <= 1e-12 * V.norm() ** n


def test_der_continuum_cross_check():
    g = Grid(2048)
    V, M = volterra(g), mult_by_x(g)
    one = np.ones(2048)
    lhs = V.power(2).apply(M.apply(one)) - M.apply(V.power(2).apply(one))
    assert np.max(np.abs(lhs + g.nodes ** 3 / 3)) <= 2 * g.h


def test_der_precondition_is_reported():
    g = Grid(32)
    with pytest.raises(PreconditionError):
        der_identity_residual(cesaro(g), mult_by_x(g), 2)


def test_witness_unit_kernels():
    g = Grid(64)
    one = g.constant(1.0)
    W = witness_builder(volterra(g), one, one)
    assert np.array_equal(W.B.matrix, volterra(g).matrix)
    assert np.array_equal(W.C.matrix, volterra(g).matrix)
    assert all(v == 0 for v in W.residuals().values())
    assert np.linalg.norm(W.C.compose(W.S).matrix) > 0


def test_witness_u1_vx():
    g = Grid(1024)
    W = witness_builder(volterra(g), g.constant(1.0), g.sample(lambda x: x))
    Cv = W.C.apply(W.v.samples)
    assert np.array_equal(Cv, W.B.apply(W.u.samples))
    assert np.max(np.abs(Cv - g.nodes ** 2 / 2)) <= 2 * g.h


def test_witness_rejects():
    g = Grid(16)
    with pytest.raises(WitnessError):
        witness_builder(volterra(g), g.constant(0.0), g.constant(1.0))
    with pytest.raises(WitnessError):
        witness_builder(cesaro(g), g.constant(1.0), g.constant(1.0))


def test_g1_zero_functional():
    g = Grid(64)
    one = g.constant(1.0)
    W = witness_for_vector(volterra(g), one)
    rep = g1_margin(W, one, DualFunctional(g, np.zeros(64)), 20)
    assert rep.constant == 0
    assert all(r.log_lhs == -math.inf and r.log_rhs == -math.inf for r in rep.rows)
    assert rep.holds()


def test_g1_unit_witness_needs_nonstrict(rng):
    g = Grid(256)
    one = g.constant(1.0)
    W = witness_builder(volterra(g), one, one)
    hf = DualFunctional(g, rng.standard_normal(256))
    with pytest.raises(WitnessError):
        g1_margin(W, one, hf, 100)
    rep = g1_margin(W, one, hf, 100, strict=False)
    assert rep.holds(1e-9)
    assert rep.hypothesis_residual > 1e-3


def test_g1_chain_for_random_pairs(rng):
    g = Grid(128)
    V = volterra(g)
    worst = 0.0
    for _ in range(50):
        x = GridFunction(g, np.cos(rng.uniform(0, 4) * g.nodes) + rng.standard_normal())
        W = witness_for_vector(V, x)
        rep = g1_margin(W, x, DualFunctional(g, rng.standard_normal(128)), 40)
        assert rep.holds(1e-9)
        worst = max(worst, rep.max_chain_residual)
    assert worst <= 1e-10


def test_g1_report_json(tmp_path, rng):
    g = Grid(64)
    one = g.constant(1.0)
    rep = g1_margin(witness_for_vector(volterra(g), one), one,
                    DualFunctional(g, rng.standard_normal(64)), 10)
    rows = json.loads(rep.write_json(tmp_path / "g1.json").read_text())
    assert [r["n"] for r in rows] == list(range(11))
    assert set(rows[0]) == {"n", "log_lhs", "log_rhs", "margin"}


def test_joint_commutant_examples():
    g = Grid(8)
    V, M = volterra(g), mult_by_x(g)
    pr = joint_commutant_dimension(V, M)
    assert pr.dimension == 1 and pr.gap >= 1e3
    assert joint_commutant_dimension(M, identity(g)).dimension == 8
    assert joint_commutant_dimension(identity(g), identity(g)).dimension == 64
    with pytest.raises(ValueError):
        joint_commutant_dimension(volterra(Grid(65)), mult_by_x(Grid(65)))


def test_quasinilpotency_identity():
    g = Grid(32)
    x = g.constant(3.0)
    r = quasinilpotency_probe(identity(g), x, 10)
    np.testing.assert_allclose(r, 3.0 ** (1 / np.arange(1, 11)), rtol=1e-12)


def test_quasinilpotency_volterra():
    g = Grid(1024)
    r = quasinilpotency_probe(volterra(g), g.constant(1.0), 30, 2.0)
    n = np.arange(1, 31)
    closed = np.exp(-np.array([math.lgamma(k + 1) for k in n]) / n) * (2 * n + 1) ** (-1 / (2 * n))
    np.testing.assert_allclose(r, closed, rtol=0.02)
    assert r[-1] < 0.15
    assert np.all(np.diff(r) < 0)


def test_quasinilpotency_conv_by_x():
    g = Grid(512)
    A = ConvElement(g.nodes, g).op
    r = quasinilpotency_probe(A, g.constant(1.0), 25)
    assert r[-1] < 0.5 * r[4]


def test_leibniz():
    g = Grid(256)
    M = mult_by_x(g)
    zero = ConvElement(np.zeros(256), g)
    assert leibniz_check(M, zero, zero) == 0
    one = ConvElement(np.ones(256), g)
    assert leibniz_check(M, one, one) < 1e-15


def test_leibniz_random_kernels(rng):
    g = Grid(300)
    M = mult_by_x(g)
    for _ in range(20):
        a = ConvElement(np.polyval(rng.standard_normal(4), g.nodes), g)
        b = ConvElement(np.sin(rng.uniform(1, 5) * g.nodes), g)
        assert leibniz_check(M, a, b) <= 1e-13


def test_linop_rejects_non_square():
    with pytest.raises(ValueError):
        LinOp(np.ones((2, 3)))
