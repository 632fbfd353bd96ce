"""The localized weight w_xi used by the Friedrichs symmetrization.

w_xi(x) = phi(|log x| <xi>^{(rho+delta)/(2 kappa)}) psi(log x) <xi>^{n(rho+delta)/(4 kappa)}

with phi a smooth radial bump equal to 1 near 0 and supported in [0, r),
and psi = C0 * (relative Haar pullback density)^{-1/2}. C0 is fixed once per
profile so that ||w_xi||_{L^2(G)} = 1 for every dual index (Haar normalized
to total mass 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .symbols import Symbol, SymbolClassParams

__all__ = ["BumpProfile", "WeightFunction", "build_weight", "ball_rule"]


class BumpProfile:
    """Smooth step bump: 1 on [0, r/2], C-infinity decay to 0 at r."""

    name = "smoothstep"

    def __init__(self, r):
        if r <= 0:
            raise ValueError("support radius must be positive")
        self.r = r

    @staticmethod
    def _f(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        t = (s - self.r / 2.0) / (self.r / 2.0)
        t = np.clip(t, 0.0, 1.0)
        fa = self._f(1.0 - t)
        fb = self._f(t)
        with np.errstate(invalid="ignore"):
            val = fa / (fa + fb)
        val = np.where(t <= 0.0, 1.0, np.where(t >= 1.0, 0.0, val))
        return val

    def sq_radial_integral(self, n):
        """integral over R^n of phi(|Z|)^2 dZ by adaptive radial quadrature."""
        surf = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        val, err = quad(lambda s: self(s) ** 2 * s ** (n - 1), 0.0, self.r,
                        epsabs=0.0, epsrel=1e-12, limit=200)
        return surf * val


@dataclass
class WeightFunction:
    group: object
    profile: BumpProfile
    r: float
    rho: float
    delta: float
    kappa: int
    C0: float

    @property
    def scale_exponent(self):
        return (self.rho + self.delta) / (2.0 * self.kappa)

    @property
    def amplitude_exponent(self):
        return self.group.dim * (self.rho + self.delta) / (4.0 * self.kappa)

    def support_radius(self, dual):
        return self.r * dual.elliptic_weight ** (-self.scale_exponent)

    def value_at_identity(self, dual):
        return self.C0 * dual.elliptic_weight ** self.amplitude_exponent

    def eval_exp(self, Y, dual):
        """w_xi at exp(Y), vectorized over rows of Y."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        s = np.linalg.norm(Y, axis=-1)
        amp = dual.elliptic_weight ** self.amplitude_exponent
        phi = self.profile(s * dual.elliptic_weight ** self.scale_exponent)
        if self.group.kind == "torus":
            dens = 1.0
        else:
            dens = self.group._relative_density(Y) ** (-0.5)
        return phi * self.C0 * dens * amp

    def eval(self, points, dual):
        points = np.atleast_2d(points)
        Y = self.group.log_map(points)
        Y = np.atleast_2d(Y)
        return self.eval_exp(Y, dual)

    def l2_norm(self, dual):
        """||w_xi||_{L^2(G)} by adaptive radial quadrature of the full
        evaluator times the Haar pullback density (independent of how C0
        was computed)."""
        g = self.group
        n = g.dim
        surf = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        R = min(self.support_radius(dual), g.injectivity_radius * 0.999)
        direction = np.zeros(n)
        direction[0] = 1.0

        def integrand(s):
            Y = s * direction
            w = float(self.eval_exp(Y[None, :], dual)[0])
            dens = 1.0 if g.kind == "torus" else float(g._relative_density(Y[None, :])[0])
            return w * w * dens * s ** (n - 1)

        val, err = quad(integrand, 0.0, R, epsabs=0.0, epsrel=1e-10, limit=200)
        return math.sqrt(g.pullback_density_at_0 * surf * val)

    def parity_defect(self, dual, n_samples=64, seed=0):
        """max |w(x) - w(x^{-1})| over random points (0 by construction)."""
        rng = np.random.default_rng(seed)
        Y = rng.normal(size=(n_samples, self.group.dim))
        Y *= (rng.uniform(0, self.support_radius(dual), n_samples)
              / np.linalg.norm(Y, axis=1))[:, None]
        return float(np.max(np.abs(self.eval_exp(Y, dual) - self.eval_exp(-Y, dual))))

    def as_symbol(self, rule, duals, name="weight"):
        """w_xi(x) I_{d_xi} as a grid symbol, for class diagnostics."""
        def func(points, d):
            vals = self.eval(points, d)
            return vals[:, None, None] * np.eye(d.dim)[None]
        m = self.amplitude_exponent
        params = SymbolClassParams(m, 1.0, min(self.scale_exponent, 0.999),
                                   self.group.hormander_step)
        return Symbol.from_function(self.group, rule, duals, func, params, name)


def build_weight(group, rho, delta, kappa=None, r=None, profile=None):
    """Construct the normalized weight for the given class parameters.

    r defaults to pi/2 (inside both injectivity radii); errors if it is not.
    """
    if kappa is None:
        kappa = group.hormander_step
    if not (0 <= delta < rho <= 1):
        raise ValueError("need 0 <= delta < rho <= 1")
    if r is None:
        r = math.pi / 2.0
    if r > group.injectivity_radius:
        raise ValueError("support radius exceeds the injectivity radius")
    if profile is None:
        profile = BumpProfile(r)
    v0 = group.pullback_density_at_0
    C0 = 1.0 / math.sqrt(v0 * profile.sq_radial_integral(group.dim))
    return WeightFunction(group, profile, r, rho, delta, int(kappa), C0)


def ball_rule(group, radius, n_axis=9):
    """Gauss-Legendre product rule on the cube [-R, R]^n in exp coordinates.

    Returns (nodes (M, n), weights (M,)); weights carry the Lebesgue volume
    element only (callers multiply by the Haar pullback density).
    """
    from numpy.polynomial.legendre import leggauss

    z, w = leggauss(n_axis)
    z = z * radius
    w = w * radius
    grids = np.meshgrid(*([z] * group.dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wprod = np.ones(nodes.shape[0])
    wg = np.meshgrid(*([w] * group.dim), indexing="ij")
    for k in range(group.dim):
        wprod = wprod * wg[k].ravel()
    return nodes, wprod
