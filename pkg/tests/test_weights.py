import math

import numpy as np
import pytest

from garding.groups import SU2Group, TorusGroup
from garding.symbols import class_fit, SymbolClassParams, odd_monomials
from garding.weights import BumpProfile, ball_rule, build_weight


def test_profile_plateau_and_support():
    phi = BumpProfile(2.0)
    s = np.array([0.0, 0.5, 1.0, 1.5, 1.999, 2.0, 3.0])
    v = phi(s)
    assert np.all(v[:3] == 1.0)
    assert 0 < v[3] < 1
    assert v[5] == 0.0 and v[6] == 0.0
    # monotone nonincreasing
    grid = np.linspace(0, 2.2, 400)
    dv = np.diff(phi(grid))
    assert np.all(dv <= 1e-12)


def test_value_at_identity_scaling():
    g = TorusGroup(1)
    w = build_weight(g, rho=1.0, delta=0.0)
    for cut in (2.0, 8.0, 32.0):
        d = g.dual_from_key((int(math.sqrt(cut * cut - 1)),))
        got = float(w.eval_exp(np.zeros((1, 1)), d)[0])
        assert got == pytest.approx(w.value_at_identity(d), rel=1e-14)
        assert got == pytest.approx(w.C0 * d.elliptic_weight ** ((1 + 0) / 4.0), rel=1e-13)


@pytest.mark.parametrize("target", [2.0, 8.0, 32.0])
def test_torus_l2_normalization(target):
    g = TorusGroup(1)
    w = build_weight(g, rho=1.0, delta=0.0)
    xi = int(round(math.sqrt(target * target - 1)))
    d = g.dual_from_key((xi,))
    assert abs(w.l2_norm(d) - 1.0) < 1e-6


@pytest.mark.parametrize("target_t", [2, 6, 11])
def test_su2_l2_normalization(target_t):
    g = SU2Group()
    w = build_weight(g, rho=1.0, delta=0.0, kappa=2)
    d = g.dual_from_key((target_t,))
    assert abs(w.l2_norm(d) - 1.0) < 1e-4


def test_rho_delta_half_quarter_normalization():
    g = TorusGroup(1)
    w = build_weight(g, rho=0.5, delta=0.25)
    d = g.dual_from_key((8,))
    assert abs(w.l2_norm(d) - 1.0) < 1e-6


def test_parity_exact():
    for g in (TorusGroup(1), SU2Group()):
        w = build_weight(g, rho=1.0, delta=0.0)
        d = g.enumerate_dual(3.0)[-1]
        assert w.parity_defect(d) < 1e-12


def test_support_radius_shrinks():
    g = SU2Group()
    w = build_weight(g, rho=1.0, delta=0.0, kappa=2)
    duals = g.enumerate_dual(5.0)
    radii = [w.support_radius(d) for d in duals]
    assert all(a >= b - 1e-15 for a, b in zip(radii, radii[1:]))
    d_big = duals[-1]
    # outside the support the evaluator vanishes identically
    Y = np.zeros((1, 3))
    Y[0, 0] = w.support_radius(d_big) * 1.0001
    assert w.eval_exp(Y, d_big)[0] == 0.0


def test_weight_central_on_su2():
    g = SU2Group()
    w = build_weight(g, rho=1.0, delta=0.0, kappa=2)
    d = g.dual_from_key((4,))
    rng = np.random.default_rng(0)
    for _ in range(5):
        Y = rng.normal(size=3)
        Y *= 0.8 / np.linalg.norm(Y)
        x = g.exp_map(Y)
        u = np.array([1.0, 0.7, 2.0])
        x_conj = g.multiply(g.multiply(u, x), g.inverse(u))
        a = float(w.eval(x[None], d)[0])
        b = float(w.eval(x_conj[None], d)[0])
        assert a == pytest.approx(b, abs=1e-12)


def test_first_order_cancellation_odd_monomials():
    # integral of w^2 q over G vanishes for odd q (even x odd integrand)
    for g in (TorusGroup(1), SU2Group()):
        w = build_weight(g, rho=1.0, delta=0.0)
        d = g.enumerate_dual(2.0)[-1]
        R = w.support_radius(d)
        nodes, wts = ball_rule(g, R, n_axis=11)
        dens = np.ones(len(nodes)) if g.kind == "torus" else g._relative_density(nodes)
        wvals = w.eval_exp(nodes, d)
        pts = g.exp_map(nodes) if g.kind == "su2" else np.mod(nodes, 2 * np.pi)
        for name, qf in odd_monomials(g):
            class FakeRule:
                points = np.atleast_2d(pts)
            q = qf(FakeRule)
            val = np.sum(wts * dens * wvals ** 2 * q) * g.pullback_density_at_0
            assert abs(val) < 1e-10


def test_weight_class_fit():
    # w_xi I consistent with order n(rho+delta)/(4 kappa) at rho_class = 1
    g = TorusGroup(1)
    w = build_weight(g, rho=1.0, delta=0.0)
    rule = g.quadrature(25)
    duals = g.enumerate_dual(24)
    sym = w.as_symbol(rule, duals)
    rep = class_fit(sym, sym.params, max_order=0)
    assert abs(rep["fitted_order_zero"] - 0.25) < 0.05


def test_build_weight_rejects_bad_radius():
    g = TorusGroup(1)
    with pytest.raises(ValueError):
        build_weight(g, rho=1.0, delta=0.0, r=4.0)
    with pytest.raises(ValueError):
        build_weight(g, rho=0.5, delta=0.75)
