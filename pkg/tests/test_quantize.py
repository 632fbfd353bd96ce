import math

import numpy as np
import pytest

from garding.groups import SU2Group, TorusGroup
from garding.harmonic import basis_labels, forward_transform
from garding.quantize import (
    AliasingError,
    GridAmplitude,
    adjoint,
    aop_from_amplitude,
    compose,
    expansion_check,
    hermitian_part,
    interior_block,
    interior_indices,
    op_from_symbol,
    operator_to_json,
    sobolev_norm,
    symbol_of_operator,
    weighted_matrix,
)
from garding.symbols import Symbol, SymbolClassParams, sublaplacian_symbol


def torus_setup(cutoff, degree=None, xband=0):
    g = TorusGroup(1)
    rule = g.quadrature(degree if degree is not None else 2 * cutoff + xband + 1)
    duals = g.enumerate_dual(cutoff)
    return g, rule, duals


# -------------------------------------------------------------- multipliers


def test_identity_symbol_gives_identity():
    g, rule, duals = torus_setup(5)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0, name="one")
    A = op_from_symbol(sym, rule=rule)
    np.testing.assert_allclose(A.mat, np.eye(A.n), atol=1e-13)


def test_torus_multiplier_diagonal():
    g, rule, duals = torus_setup(6)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1 + d.eigenvalue)
    A = op_from_symbol(sym, rule=rule)
    expected = np.diag([1 + d.eigenvalue for (d, i, j) in A.labels])
    np.testing.assert_allclose(A.mat, expected, atol=1e-12)


def test_su2_subelliptic_multiplier_diagonal():
    g = SU2Group()
    rule = g.quadrature(4)
    duals = g.enumerate_dual(2.5)
    subl = sublaplacian_symbol(g, duals)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: subl.weight_matrix(d, 1.0))
    A = op_from_symbol(sym, rule=rule)
    expected = np.diag([subl.weight_diag(d, 1.0)[j] for (d, i, j) in A.labels])
    np.testing.assert_allclose(A.mat, expected, atol=1e-11)


def test_multiplier_block_diagonal_mass():
    g = SU2Group()
    rule = g.quadrature(4)
    duals = g.enumerate_dual(2.5)
    rng = np.random.default_rng(0)
    mats = {d.key: rng.normal(size=(d.dim, d.dim)) + 1j * rng.normal(size=(d.dim, d.dim))
            for d in duals}
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: mats[d.key])
    A = op_from_symbol(sym, rule=rule)
    off = A.mat.copy()
    for d in duals:
        sl = A.block_slice(d)
        off[sl, sl] = 0.0
    assert np.max(np.abs(off)) < 1e-12


def test_torus_shift_symbol():
    g, rule, duals = torus_setup(5, xband=1)

    def func(points, d):
        return np.exp(1j * points[:, 0])

    sym = Symbol.from_function(g, rule, duals, func, name="e^{ix}")
    A = op_from_symbol(sym, rule=rule)
    # shift matrix: maps e_q at xi to e_p at xi+1
    for q, (dq, _, _) in enumerate(A.labels):
        for p, (dp, _, _) in enumerate(A.labels):
            expected = 1.0 if dp.index[0] == dq.index[0] + 1 else 0.0
            assert abs(A.mat[p, q] - expected) < 1e-12


def test_aliasing_error():
    g, rule, duals = torus_setup(5, degree=4)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0)
    with pytest.raises(AliasingError):
        op_from_symbol(sym, rule=rule)


# ------------------------------------------------------------- round trips


def test_symbol_round_trip_torus():
    g, rule, duals = torus_setup(24, degree=2 * 24 + 4, xband=3)
    rng = np.random.default_rng(5)
    coefs = rng.normal(size=7) + 1j * rng.normal(size=7)

    def func(points, d):
        x = points[:, 0]
        base = sum(c * np.exp(1j * k * x) for k, c in zip(range(-3, 4), coefs))
        return base * d.elliptic_weight

    sym = Symbol.from_function(g, rule, duals, func, name="random_xdep")
    A = op_from_symbol(sym, rule=rule)
    back = symbol_of_operator(A, margin_degree=4)
    for d in back.duals:
        np.testing.assert_allclose(back.blocks[d.key], sym.blocks[d.key], atol=1e-8)


def test_symbol_round_trip_su2():
    g = SU2Group()
    rule = g.quadrature(2 * 2 + 1)
    duals = g.enumerate_dual(math.sqrt(1 + 2 * 3) + 1e-9)  # l <= 2
    half = g.dual_from_key((1,))

    def func(points, d):
        a = g.rep_values(half, points)[:, 0, 0]
        return (0.5 + np.abs(a) ** 2)[:, None, None] * np.eye(d.dim)[None]

    sym = Symbol.from_function(g, rule, duals, func, name="su2_xdep")
    A = op_from_symbol(sym, rule=rule)
    back = symbol_of_operator(A, margin_degree=1)
    for d in back.duals:
        np.testing.assert_allclose(back.blocks[d.key], sym.blocks[d.key], atol=1e-9)


def test_identity_operator_symbol():
    g, rule, duals = torus_setup(4)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0)
    A = op_from_symbol(sym, rule=rule)
    back = symbol_of_operator(A, margin_degree=0)
    for d in back.duals:
        np.testing.assert_allclose(back.blocks[d.key], 1.0, atol=1e-12)


def test_finite_section_consistency():
    # interior block unchanged when the cutoff is enlarged
    g = TorusGroup(1)
    rule = g.quadrature(2 * 8 + 2)

    def build(cut):
        duals = g.enumerate_dual(cut)
        sym = Symbol.from_function(
            g, rule, duals,
            lambda points, d: (1 + 0.5 * np.cos(points[:, 0])) * d.elliptic_weight)
        return op_from_symbol(sym, rule=rule)

    A5, A8 = build(5), build(8)
    lab5 = {lab[0].key: p for p, lab in enumerate(A5.labels)}
    rows8 = [p for p, lab in enumerate(A8.labels) if lab[0].key in lab5]
    sub = A8.mat[np.ix_(rows8, rows8)]
    np.testing.assert_allclose(sub, A5.mat, atol=1e-10)


# ---------------------------------------------------------------- algebra


def test_adjoint_and_compose():
    g, rule, duals = torus_setup(6)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: d.elliptic_weight)
    A = op_from_symbol(sym, rule=rule)
    np.testing.assert_allclose(adjoint(A).mat, A.mat, atol=1e-12)  # real diagonal
    sym2 = Symbol.from_multiplier(g, rule, duals, lambda d: d.elliptic_weight ** 2)
    A2 = op_from_symbol(sym2, rule=rule)
    C = compose(A, A)
    np.testing.assert_allclose(C.mat, A2.mat, atol=1e-10)


def test_compose_mismatch():
    g, rule, duals = torus_setup(4)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0)
    A = op_from_symbol(sym, rule=rule)
    g2, rule2, duals2 = torus_setup(3)
    sym2 = Symbol.from_multiplier(g2, rule2, duals2, lambda d: 1.0)
    B = op_from_symbol(sym2, rule=rule2)
    with pytest.raises(ValueError):
        compose(A, B)


def test_selfadjoint_multiplier():
    g, rule, duals = torus_setup(6)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: d.elliptic_weight)
    A = op_from_symbol(sym, rule=rule)
    assert np.max(np.abs(A.mat - hermitian_part(A.mat))) < 1e-10


# ------------------------------------------------------------- amplitudes


def test_y_independent_amplitude_matches_op():
    g, rule, duals = torus_setup(6, xband=1)
    nx = rule.n_nodes

    def func(points, d):
        return (1 + 0.3 * np.cos(points[:, 0])) * d.elliptic_weight

    sym = Symbol.from_function(g, rule, duals, func, name="aop_src")
    data = {}
    for d in duals:
        col = sym.blocks[d.key][:, 0, 0]
        data[d.key] = np.broadcast_to(col[:, None], (nx, nx)).copy()[..., None, None]
    amp = GridAmplitude(g, rule, duals, data, name="y_indep")
    P = aop_from_amplitude(amp)
    A = op_from_symbol(sym, rule=rule)
    assert np.max(np.abs(P.mat - A.mat)) < 1e-9


def test_trivial_rep_amplitude_projector():
    g, rule, duals = torus_setup(4)
    nx = rule.n_nodes
    data = {d.key: (np.ones((nx, nx, 1, 1), dtype=complex)
                    if d.eigenvalue == 0 else np.zeros((nx, nx, 1, 1), dtype=complex))
            for d in duals}
    amp = GridAmplitude(g, rule, duals, data, name="trivial_proj")
    P = aop_from_amplitude(amp)
    # rank-one projector onto constants
    vals = np.linalg.eigvalsh(hermitian_part(P.mat))
    assert abs(vals[-1] - 1.0) < 1e-12
    assert np.max(np.abs(vals[:-1])) < 1e-12


def test_hermitian_amplitude_gives_hermitian_matrix():
    g = SU2Group()
    rule = g.quadrature(3)
    duals = g.enumerate_dual(2.0)
    nx = rule.n_nodes
    rng = np.random.default_rng(2)
    data = {}
    for d in duals:
        base = rng.normal(size=(nx, nx, d.dim, d.dim))
        sym = (base + np.conj(np.swapaxes(np.swapaxes(base, 0, 1), -1, -2))) / 2
        data[d.key] = sym.astype(complex)
    amp = GridAmplitude(g, rule, duals, data, name="herm")
    assert amp.hermitian_defect() < 1e-14
    P = aop_from_amplitude(amp)
    assert np.max(np.abs(P.mat - P.mat.conj().T)) < 1e-10


# ------------------------------------------------------------ Sobolev side


def test_sobolev_norm_elliptic():
    g, rule, duals = torus_setup(5)
    f = np.exp(3j * rule.points[:, 0])
    co = forward_transform(rule, f, duals)
    assert sobolev_norm(co, 2.0, scale="elliptic") == pytest.approx(10.0, rel=1e-12)
    assert sobolev_norm(co, 0.0, scale="elliptic") == pytest.approx(1.0, rel=1e-12)


def test_sobolev_norm_su2_entry():
    g = SU2Group()
    rule = g.quadrature(3)
    duals = g.enumerate_dual(3.0)
    d2 = g.dual_from_key((2,))  # l = 1
    R = g.rep_values(d2, rule.points)
    f = R[:, 0, 2]  # m-row = -1, n-col = +1: nu^2 at column n = l(l+1) - 1
    co = forward_transform(rule, f, duals)
    want = math.sqrt(1 + (2.0 - 1.0)) / math.sqrt(3)
    assert sobolev_norm(co, 1.0, scale="subelliptic") == pytest.approx(want, rel=1e-10)


def test_weighted_matrix_and_interior():
    g, rule, duals = torus_setup(8)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: d.elliptic_weight ** 2,
                                 SymbolClassParams(2.0))
    A = op_from_symbol(sym, rule=rule)
    W = weighted_matrix(A, -1.0, -1.0, scale="elliptic")
    np.testing.assert_allclose(np.diag(W), np.ones(A.n), atol=1e-12)
    idx = interior_indices(A, 2.0)
    degs = [A.labels[p][0].degree for p in idx]
    assert max(degs) <= A.degree() - 2


def test_sobolev_boundedness_across_cutoffs():
    # ||M^{s-m} A M^{-s}|| stable within 20% across torus cutoffs
    g = TorusGroup(1)
    m, s = 1.0, 0.7
    norms = []
    for cut in (8, 16, 24):
        rule = g.quadrature(2 * cut + 2)
        duals = g.enumerate_dual(cut)
        sym = Symbol.from_function(
            g, rule, duals,
            lambda points, d: (1 + 0.5 * np.cos(points[:, 0])) * d.elliptic_weight ** m)
        A = op_from_symbol(sym, rule=rule)
        W = weighted_matrix(A, s - m, -s, scale="elliptic")
        idx = interior_indices(A, 1.0)
        norms.append(np.linalg.norm(interior_block(W, idx), 2))
    spread = (max(norms) - min(norms)) / max(norms)
    assert spread < 0.2


# -------------------------------------------------------------- expansion


def test_expansion_y_independent_machine_zero():
    g, rule, duals = torus_setup(8, xband=1)
    nx = rule.n_nodes
    data = {}
    for d in duals:
        col = (1 + 0.2 * np.cos(rule.points[:, 0])) * d.elliptic_weight
        data[d.key] = np.broadcast_to(col[:, None], (nx, nx)).copy()[..., None, None]
    amp = GridAmplitude(g, rule, duals, data, name="y_indep")
    rep = expansion_check(amp, [0, 1], SymbolClassParams(1.0))
    for row in rep["orders"]:
        assert row["weighted_sup"] < 1e-9


def test_expansion_phase_amplitude_decay():
    g = TorusGroup(1)
    cut = 34
    rule = g.quadrature(2 * cut + 4)
    duals = g.enumerate_dual(cut)
    nx = rule.n_nodes
    x = rule.points[:, 0]
    m = 1.0
    phase = np.exp(1j * (x[None, :] - x[:, None]))  # e^{i(y-x)}
    data = {d.key: (phase * d.elliptic_weight ** m)[..., None, None] for d in duals}
    amp = GridAmplitude(g, rule, duals, data, name="phase")
    rep = expansion_check(amp, [0, 1, 2], SymbolClassParams(m))
    for row in rep["orders"]:
        assert row["fitted_exponent"] <= row["predicted_exponent"] + 0.3
    assert rep["ratio_test"]["improvement"] >= 8.0


# ---------------------------------------------------------------- export


def test_operator_json():
    g, rule, duals = torus_setup(3)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: d.elliptic_weight)
    A = op_from_symbol(sym, rule=rule)
    text = operator_to_json(A)
    assert '"garding-operator-v1"' in text
    assert operator_to_json(A) == text
