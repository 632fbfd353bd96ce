import math

import numpy as np
import pytest

from garding.groups import SU2Group, TorusGroup
from garding.harmonic import forward_transform
from garding.symbols import (
    PaddingError,
    Symbol,
    SymbolClassParams,
    apply_difference,
    apply_difference_multi,
    class_fit,
    class_inclusion_check,
    difference_family,
    leibniz_check,
    odd_monomials,
    seminorm,
    sublaplacian_symbol,
    symbol_from_json,
    symbol_to_json,
    weight_comparison_check,
    x_derivative_symbol,
)


def elliptic_power(group, rule, duals, m, name=None):
    return Symbol.from_multiplier(
        group, rule, duals,
        lambda d: d.elliptic_weight ** m * np.eye(d.dim),
        SymbolClassParams(m, kappa=group.hormander_step),
        name or f"elliptic^{m}",
    )


# ----------------------------------------------------------- sub-Laplacian


def test_torus_nu_squared():
    g = TorusGroup(1)
    duals = g.enumerate_dual(5)
    subl = sublaplacian_symbol(g, duals)
    for d in duals:
        assert subl.nu_sq[d.key][0] == pytest.approx(d.index[0] ** 2)


def test_su2_nu_squared_ladder():
    g = SU2Group()
    duals = g.enumerate_dual(4)
    subl = sublaplacian_symbol(g, duals)
    for d in duals:
        l = d.index[0] / 2.0
        m = np.arange(-d.index[0], d.index[0] + 1, 2) / 2.0
        np.testing.assert_allclose(subl.nu_sq[d.key], l * (l + 1) - m * m, atol=1e-10)
        # minimum over the diagonal is l, at |m| = l
        assert np.min(subl.nu_sq[d.key]) == pytest.approx(l, abs=1e-10)
    assert not subl.basis  # already diagonal in the canonical basis


def test_su2_nu_matches_finite_difference_oracle():
    # apply -X1^2 - X2^2 to D^1 coefficients by one-parameter-subgroup FD
    g = SU2Group()
    d1 = g.dual_from_key((2,))
    rng = np.random.default_rng(0)
    x = np.array([1.1, 0.9, 2.2])
    h = 1e-4
    acc = np.zeros((3, 3), dtype=complex)
    for k in (0, 1):
        Y = np.zeros(3)
        Y[k] = h
        fp = g.rep_values(d1, g.multiply(x, g.exp_map(Y))[None])[0]
        fm = g.rep_values(d1, g.multiply(x, g.exp_map(-Y))[None])[0]
        f0 = g.rep_values(d1, x[None])[0]
        acc -= (fp - 2 * f0 + fm) / h**2
    # sub-Laplacian acts by right multiplication with diag(l(l+1)-m^2)
    expected = g.rep_values(d1, x[None])[0] @ np.diag([1.0, 2.0, 1.0])
    np.testing.assert_allclose(acc, expected, atol=1e-6)


def test_weight_matrix_group_law():
    g = SU2Group()
    duals = g.enumerate_dual(3)
    subl = sublaplacian_symbol(g, duals)
    for d in duals:
        w1 = subl.weight_diag(d, 0.7)
        w2 = subl.weight_diag(d, -0.7)
        np.testing.assert_allclose(w1 * w2, 1.0, rtol=1e-14)
        np.testing.assert_allclose(
            subl.weight_diag(d, 0.3) * subl.weight_diag(d, 0.5),
            subl.weight_diag(d, 0.8), rtol=1e-14)
        if d.eigenvalue > 0:
            assert np.all(subl.weight_diag(d, 1.0) >= 1.0)


def test_weight_comparison_torus_unit_constants():
    g = TorusGroup(1)
    duals = g.enumerate_dual(8)
    rep = weight_comparison_check(g, duals)
    assert rep["c_lower"] == pytest.approx(1.0, abs=1e-12)
    assert rep["c_upper"] == pytest.approx(1.0, abs=1e-12)


def test_weight_comparison_su2():
    g = SU2Group()
    duals = g.enumerate_dual(math.sqrt(1 + 10 * 11) + 1e-9)  # l <= 10
    rep = weight_comparison_check(g, duals)
    assert rep["lower_holds"] and rep["upper_holds"]
    # (1+l)^{1/2} >= <xi>^{1/2} at |m| = l means c_lower <= 1
    assert rep["c_lower"] <= 1.0 + 1e-12
    assert rep["c_upper"] <= 1.0 + 1e-12


# ------------------------------------------------------------- differences


def test_torus_difference_constant_zero():
    g = TorusGroup(1)
    rule = g.quadrature(8)
    duals = g.enumerate_dual(8)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: np.array([[2.0]]))
    for gen in difference_family(g):
        out = apply_difference(sym, gen)
        for d in out.valid_duals():
            assert np.max(np.abs(out.blocks[d.key])) < 1e-14


def test_torus_difference_linear():
    g = TorusGroup(1)
    rule = g.quadrature(8)
    duals = g.enumerate_dual(8)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: float(d.index[0]))
    out = apply_difference(sym, difference_family(g)[0])
    for d in out.valid_duals():
        assert out.blocks[d.key][0, 0, 0] == pytest.approx(-1.0)


def test_torus_generic_matches_shift():
    g = TorusGroup(1)
    rule = g.quadrature(9)
    duals = g.enumerate_dual(9)
    sym = elliptic_power(g, rule, duals, 1.0)
    gen = difference_family(g)[0]
    fast = apply_difference(sym, gen)
    slow_gen = type(gen)(gen.label, gen.band_degree, gen.values, shift=None)
    slow = apply_difference(sym, slow_gen)
    for d in slow.valid_duals():
        np.testing.assert_allclose(slow.blocks[d.key], fast.blocks[d.key], atol=1e-10)


def test_su2_difference_matches_quadrature_oracle():
    # Delta_q sigma for sigma = (1+lambda) I via explicit kernel quadrature
    g = SU2Group()
    rule = g.quadrature(3)
    duals = g.enumerate_dual(math.sqrt(1 + 2.5 * 3.5) + 1e-9)  # l <= 5/2
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: (1 + d.eigenvalue) * np.eye(d.dim))
    gen = difference_family(g)[1]
    out = apply_difference(sym, gen)
    # oracle: kernel k = sum_l d_l (1+lambda_l) tr(D^l), times q, naive transform
    k = np.zeros(rule.n_nodes, dtype=complex)
    for d in duals:
        R = g.rep_values(d, rule.points)
        k += d.dim * (1 + d.eigenvalue) * np.trace(R, axis1=1, axis2=2)
    qk = gen.on(rule) * k
    for d in out.valid_duals():
        R = g.rep_values(d, rule.points)
        Rstar = np.conj(np.swapaxes(R, -1, -2))
        oracle = np.tensordot(rule.weights * qk, Rstar, axes=(0, 0))
        np.testing.assert_allclose(out.blocks[d.key][0], oracle, atol=1e-8)


def test_padding_exhaustion_raises():
    g = TorusGroup(1)
    rule = g.quadrature(3)
    duals = g.enumerate_dual(2)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0)
    gen = difference_family(g)[0]
    out = sym
    with pytest.raises(PaddingError):
        for _ in range(5):
            out = apply_difference(out, gen)


def test_leibniz_rule_exact():
    g = TorusGroup(1)
    rule = g.quadrature(10)
    duals = g.enumerate_dual(10)
    rng = np.random.default_rng(1)
    for _ in range(20):
        c1 = rng.normal(size=3)
        c2 = rng.normal(size=3)
        a1 = Symbol.from_multiplier(
            g, rule, duals,
            lambda d, c=c1: c[0] + c[1] * d.index[0] + c[2] * math.sin(d.index[0]))
        a2 = Symbol.from_multiplier(
            g, rule, duals,
            lambda d, c=c2: c[0] + c[1] * abs(d.index[0]) ** 1.3 + c[2])
        assert leibniz_check(a1, a2) < 1e-12


def test_leibniz_identity_symbol():
    g = TorusGroup(1)
    rule = g.quadrature(6)
    duals = g.enumerate_dual(6)
    a1 = Symbol.from_multiplier(g, rule, duals, lambda d: float(d.index[0]))
    one = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0)
    assert leibniz_check(a1, one) < 1e-14


def test_odd_monomials_parity():
    for g in (TorusGroup(1), SU2Group()):
        rule = g.quadrature(2)
        for name, vals in odd_monomials(g):
            q = vals(rule)
            # evaluate at inverses
            if g.kind == "torus":
                inv_pts = np.mod(-rule.points, 2 * np.pi)
            else:
                inv_pts = g.inverse(rule.points)
            if g.kind == "torus":
                qinv = 1j * np.sin(inv_pts[:, 0])
            else:
                half = g.dual_from_key((1,))
                i, j = (0, 1) if name.endswith("01") else (1, 0)
                qinv = g.rep_values(half, inv_pts)[:, i, j]
            np.testing.assert_allclose(qinv, -q, atol=1e-12)


# ------------------------------------------------------------ derivatives


def test_x_derivative_x_independent_zero():
    g = TorusGroup(1)
    rule = g.quadrature(5)
    duals = g.enumerate_dual(5)
    sym = elliptic_power(g, rule, duals, 2.0)
    out = x_derivative_symbol(sym, (1,))
    for d in out.duals:
        assert np.max(np.abs(out.blocks[d.key])) < 1e-14


def test_x_derivative_torus_phase():
    g = TorusGroup(1)
    rule = g.quadrature(6)
    duals = g.enumerate_dual(5)
    m = 1.5

    def func(points, d):
        return np.exp(1j * points[:, 0]) * d.elliptic_weight ** m

    sym = Symbol.from_function(g, rule, duals, func)
    out = x_derivative_symbol(sym, (1,))
    for d in out.duals:
        np.testing.assert_allclose(
            out.blocks[d.key], 1j * sym.blocks[d.key], atol=1e-10)


def test_x_derivative_su2_matches_fd():
    g = SU2Group()
    rule = g.quadrature(2)
    duals = g.enumerate_dual(2)
    half = g.dual_from_key((1,))

    def func(points, d):
        vals = g.rep_values(half, points)[:, 0, 0]
        return vals[:, None, None] * np.eye(d.dim)[None, :, :]

    sym = Symbol.from_function(g, rule, duals, func)
    out = x_derivative_symbol(sym, (0, 1, 0))
    h = 1e-5
    Y = np.array([0.0, h, 0.0])
    d0 = duals[0]
    for z in (3, 71):
        x = rule.points[z]
        fp = g.rep_values(half, g.multiply(x, g.exp_map(Y))[None])[0, 0, 0]
        fm = g.rep_values(half, g.multiply(x, g.exp_map(-Y))[None])[0, 0, 0]
        fd = (fp - fm) / (2 * h)
        assert abs(out.blocks[d0.key][z, 0, 0] - fd) < 1e-8


# --------------------------------------------------------------- seminorms


def test_seminorm_weight_identity():
    for g in (TorusGroup(1), SU2Group()):
        rule = g.quadrature(4)
        duals = g.enumerate_dual(4)
        subl = sublaplacian_symbol(g, duals)
        m = 1.3
        sym = Symbol.from_multiplier(
            g, rule, duals, lambda d: subl.weight_matrix(d, m),
            SymbolClassParams(m, kappa=g.hormander_step), "subelliptic^m")
        zero_a = (0,) * len(difference_family(g))
        zero_b = (0,) * g.n_fields
        val = seminorm(sym, zero_a, zero_b, subl=subl)
        assert val == pytest.approx(1.0, abs=1e-12)


def test_seminorm_zero_symbol():
    g = TorusGroup(1)
    rule = g.quadrature(4)
    duals = g.enumerate_dual(4)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 0.0,
                                 SymbolClassParams(1.0))
    assert seminorm(sym, (0,), (0,)) == 0.0


def test_seminorm_first_difference_elliptic():
    g = TorusGroup(1)
    rule = g.quadrature(24)
    duals = g.enumerate_dual(24)
    sym = elliptic_power(g, rule, duals, 1.0)
    val = seminorm(sym, (1,), (0,))
    # brute-force oracle over the dual
    worst = 0.0
    for d in sym.duals:
        xi = d.index[0]
        if abs(xi - 1) <= 23 and abs(xi) <= 23:
            diff = math.sqrt(1 + (xi - 1) ** 2) - math.sqrt(1 + xi * xi)
            worst = max(worst, abs(diff))
    assert val == pytest.approx(worst, rel=1e-10)
    assert val <= 1.0


def test_class_fit_subelliptic_power():
    g = TorusGroup(1)
    rule = g.quadrature(24)
    duals = g.enumerate_dual(24)
    m = 1.4
    sym = elliptic_power(g, rule, duals, m)
    rep = class_fit(sym, SymbolClassParams(m), max_order=1)
    assert abs(rep["fitted_order_zero"] - m) < 0.05
    assert rep["consistent"]


def test_class_fit_constant_order_zero():
    g = TorusGroup(1)
    rule = g.quadrature(20)
    duals = g.enumerate_dual(20)
    sym = Symbol.from_multiplier(g, rule, duals, lambda d: 1.0, SymbolClassParams(0.0))
    rep = class_fit(sym, SymbolClassParams(0.0), max_order=1)
    assert abs(rep["fitted_order_zero"]) < 0.05


def test_class_fit_su2_sub_order_one():
    g = SU2Group()
    rule = g.quadrature(10)
    duals = g.enumerate_dual(math.sqrt(1 + 10 * 11) + 1e-9)
    subl = sublaplacian_symbol(g, duals)
    sym = Symbol.from_multiplier(
        g, rule, duals, lambda d: subl.weight_matrix(d, 1.0),
        SymbolClassParams(1.0, kappa=2), "Mhat^1")
    rep = class_fit(sym, SymbolClassParams(1.0, kappa=2), max_order=0, subl=subl)
    assert abs(rep["fitted_order_zero"] - 1.0) < 0.05


def test_class_inclusion_su2():
    g = SU2Group()
    rule = g.quadrature(6)
    duals = g.enumerate_dual(math.sqrt(1 + 6 * 7) + 1e-9)
    m = 1.0
    sym = Symbol.from_multiplier(
        g, rule, duals, lambda d: d.elliptic_weight ** (m / 2) * np.eye(d.dim),
        SymbolClassParams(m, kappa=2), "elliptic^{m/2}")
    rep = class_inclusion_check(sym, SymbolClassParams(m, kappa=2))
    assert rep["all_finite"]


# --------------------------------------------------------------------- io


def test_symbol_json_bit_exact_round_trip():
    g = SU2Group()
    rule = g.quadrature(2)
    duals = g.enumerate_dual(2.5)
    rng = np.random.default_rng(4)

    def func(points, d):
        base = rng.normal(size=(d.dim, d.dim)) + 1j * rng.normal(size=(d.dim, d.dim))
        phase = np.cos(points[:, 1])
        return phase[:, None, None] * base[None, :, :]

    sym = Symbol.from_function(g, rule, duals, func,
                               SymbolClassParams(1.0, kappa=2), "random")
    text = symbol_to_json(sym)
    back = symbol_from_json(text, group=g, rule=rule)
    for d in duals:
        assert np.array_equal(back.blocks[d.key], sym.blocks[d.key])
    assert symbol_to_json(back) == text
