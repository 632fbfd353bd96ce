"""Concrete compact groups: the torus T^n and SU(2).

Both backends expose the same surface: dual enumeration, unitary
representation evaluation, Haar quadrature rules, exponential coordinates
with the associated densities, and the Hörmander vector-field system that
defines the sub-Laplacian. Group points are kept as plain numpy arrays
(torus: coordinates in [0, 2pi)^n; SU(2): Euler angles (alpha, beta, gamma)
with alpha in [0, 2pi), beta in [0, pi], gamma in [0, 4pi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .wigner import algebra_generators, wigner_d, wigner_D

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


class OutOfDomainError(ValueError):
    """Input outside the injectivity ball or the supported dual range."""


@dataclass(frozen=True, order=True)
class DualIndex:
    """A point of the unitary dual.

    ``index`` is the lattice point for the torus and ``(twice_l,)`` for
    SU(2); sorting is by (Laplace eigenvalue, index), which fixes the
    deterministic enumeration order used everywhere downstream.
    """

    eigenvalue: float
    index: tuple
    dim: int = field(compare=False)
    kind: str = field(compare=False, default="torus")

    @property
    def elliptic_weight(self):
        return math.sqrt(1.0 + self.eigenvalue)

    @property
    def degree(self):
        """Band degree: max |xi_j| on the torus, the spin l on SU(2)."""
        if self.kind == "su2":
            return self.index[0] / 2.0
        return float(max(abs(k) for k in self.index)) if self.index else 0.0

    @property
    def key(self):
        return self.index


@dataclass
class QuadratureRule:
    """Haar quadrature: nodes, positive weights summing to 1, exactness.

    ``degree`` is the band limit up to which integrals of products of two
    matrix coefficients are exact. ``points`` has shape (N, dim_coords).
    """

    group: "object"
    degree: float
    points: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self):
        return self.points.shape[0]


class TorusGroup:
    """T^n = [0, 2pi)^n with characters e^{i xi.x}."""

    kind = "torus"

    def __init__(self, n=1):
        if n < 1:
            raise ValueError("torus dimension must be >= 1")
        self.n = n
        self.dim = n
        self.hormander_step = 1
        self.hausdorff_dim = n
        self.n_fields = n
        self.sub_system = tuple(range(n))
        # density of probability Haar dx/(2pi)^n at Y=0 in the exp chart
        self.pullback_density_at_0 = (2 * math.pi) ** (-n)
        self.injectivity_radius = math.pi

    def __repr__(self):
        return f"TorusGroup(n={self.n})"

    @property
    def label(self):
        return f"torus{self.n}"

    # -- dual ---------------------------------------------------------------

    def enumerate_dual(self, cutoff):
        """All xi with (1+|xi|^2)^{1/2} <= cutoff, sorted by (lambda, lex)."""
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        kmax = int(math.floor(math.sqrt(max(cutoff * cutoff - 1.0, 0.0))))
        out = []
        for idx in np.ndindex(*(2 * kmax + 1,) * self.n):
            xi = tuple(int(k) - kmax for k in idx)
            lam = float(sum(k * k for k in xi))
            if 1.0 + lam <= cutoff * cutoff + 1e-12:
                out.append(DualIndex(eigenvalue=lam, index=xi, dim=1, kind="torus"))
        return sorted(out)

    def dual_from_key(self, key):
        xi = tuple(int(k) for k in key)
        return DualIndex(eigenvalue=float(sum(k * k for k in xi)), index=xi, dim=1, kind="torus")

    # -- quadrature and representations --------------------------------------

    def quadrature(self, degree):
        npts = 2 * int(math.ceil(degree)) + 1
        axes = [np.arange(npts) * TWO_PI / npts for _ in range(self.n)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        return QuadratureRule(self, float(degree), pts, w, {"npts_axis": npts})

    def rep_values(self, dual, points):
        points = np.atleast_2d(points)
        phase = points @ np.asarray(dual.index, dtype=float)
        return np.exp(1j * phase)[:, None, None]

    # -- group structure ------------------------------------------------------

    def identity(self):
        return np.zeros(self.n)

    def multiply(self, x, y):
        return np.mod(np.asarray(x) + np.asarray(y), TWO_PI)

    def inverse(self, x):
        return np.mod(-np.asarray(x), TWO_PI)

    def exp_map(self, Y):
        return np.mod(np.asarray(Y, dtype=float), TWO_PI)

    def log_map(self, x):
        y = np.mod(np.asarray(x, dtype=float), TWO_PI)
        y = np.where(y > math.pi, y - TWO_PI, y)  # principal branch (-pi, pi]
        return y

    def central_norm(self, Y):
        return float(np.linalg.norm(Y))

    def haar_density(self, Y):
        self._check_ball(Y)
        return 1.0

    def exp_jacobian(self, Y):
        self._check_ball(Y)
        return 1.0

    def _check_ball(self, Y):
        if np.max(np.abs(np.asarray(Y))) > math.pi + 1e-12:
            raise OutOfDomainError("outside the injectivity ball")

    def derivative_generator(self, dual, field_idx):
        """dρ(X_j) acting on coefficient matrices by left multiplication."""
        return np.array([[1j * dual.index[field_idx]]], dtype=complex)


class SU2Group:
    """SU(2) with the two-field Hörmander system {X1, X2} of step 2."""

    kind = "su2"

    def __init__(self):
        self.n = 3
        self.dim = 3
        self.hormander_step = 2
        self.hausdorff_dim = 4  # dim H^1 = 2, dim H^2 = 3
        self.n_fields = 3
        self.sub_system = (0, 1)
        self.pullback_density_at_0 = 1.0 / (16 * math.pi ** 2)
        self.injectivity_radius = TWO_PI

    def __repr__(self):
        return "SU2Group()"

    @property
    def label(self):
        return "su2"

    # -- dual ---------------------------------------------------------------

    def enumerate_dual(self, cutoff):
        """Spins l = 0, 1/2, 1, ... with 1 + l(l+1) <= cutoff^2."""
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        out = []
        t = 0
        while True:
            l = t / 2.0
            lam = l * (l + 1.0)
            if 1.0 + lam > cutoff * cutoff + 1e-12:
                break
            out.append(DualIndex(eigenvalue=lam, index=(t,), dim=t + 1, kind="su2"))
            t += 1
        return out

    def dual_from_key(self, key):
        t = int(key[0])
        l = t / 2.0
        return DualIndex(eigenvalue=l * (l + 1.0), index=(t,), dim=t + 1, kind="su2")

    # -- quadrature and representations --------------------------------------

    def quadrature(self, degree):
        """Product rule: uniform alpha, Gauss-Legendre in cos(beta), uniform
        gamma over [0, 4pi). Exact for products of coefficients within
        ``degree`` (gamma handles the half-integer sector)."""
        L = float(degree)
        n_ab = 4 * int(math.ceil(L)) + 1
        n_beta = 2 * int(math.ceil(L)) + 1
        return self._product_rule(L, n_ab, n_beta, n_ab)

    def minimal_quadrature(self, degree):
        """Smaller rule with the same exactness guarantee (internal use)."""
        L = float(degree)
        n_alpha = 2 * int(math.ceil(L)) + 3
        n_beta = int(math.ceil(L)) + 2
        n_gamma = 4 * int(math.ceil(L)) + 3
        return self._product_rule(L, n_alpha, n_beta, n_gamma)

    def _product_rule(self, degree, n_alpha, n_beta, n_gamma):
        alphas = np.arange(n_alpha) * TWO_PI / n_alpha
        z, wz = leggauss(n_beta)
        betas = np.arccos(z)
        gammas = np.arange(n_gamma) * FOUR_PI / n_gamma
        A, B, G = np.meshgrid(alphas, betas, gammas, indexing="ij")
        pts = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=-1)
        wb = wz / 2.0
        W = np.ones((n_alpha, 1, 1)) * wb[None, :, None] * np.ones((1, 1, n_gamma))
        w = (W / (n_alpha * n_gamma)).ravel()
        meta = {
            "alphas": alphas,
            "betas": betas,
            "beta_weights": wb,
            "gammas": gammas,
            "shape": (n_alpha, n_beta, n_gamma),
        }
        return QuadratureRule(self, degree, pts, w, meta)

    def rep_values(self, dual, points):
        points = np.atleast_2d(points)
        t = dual.index[0]
        return wigner_D(t, points[:, 0], points[:, 1], points[:, 2])

    # -- group structure ------------------------------------------------------

    def identity(self):
        return np.zeros(3)

    def euler_to_matrix(self, p):
        p = np.atleast_2d(p)
        al, be, ga = p[:, 0], p[:, 1], p[:, 2]
        ca, sa = np.cos(al / 2), np.sin(al / 2)
        cb, sb = np.cos(be / 2), np.sin(be / 2)
        cg, sg = np.cos(ga / 2), np.sin(ga / 2)
        # u = e^{-i a sz/2} e^{-i b sy/2} e^{-i g sz/2}
        a = (ca - 1j * sa) * cb * (cg - 1j * sg)
        b = -(ca - 1j * sa) * sb * (cg + 1j * sg)
        U = np.empty((p.shape[0], 2, 2), dtype=complex)
        U[:, 0, 0] = a
        U[:, 0, 1] = b
        U[:, 1, 0] = -b.conj()
        U[:, 1, 1] = a.conj()
        return U

    def matrix_to_euler(self, U):
        U = np.atleast_3d(U).reshape(-1, 2, 2)
        a = U[:, 0, 0]
        b = U[:, 0, 1]
        beta = 2.0 * np.arctan2(np.abs(b), np.abs(a))
        s = np.where(np.abs(a) > 1e-14, -2.0 * np.angle(a), 0.0)
        t = np.where(np.abs(b) > 1e-14, 2.0 * (math.pi - np.angle(b)), s)
        s = np.where(np.abs(a) > 1e-14, s, t)
        alpha = np.mod((s + t) / 2.0, TWO_PI)
        gamma = np.mod(s - alpha, FOUR_PI)
        return np.stack([alpha, beta, gamma], axis=-1)

    def multiply(self, x, y):
        Ux = self.euler_to_matrix(x)
        Uy = self.euler_to_matrix(y)
        out = self.matrix_to_euler(Ux @ Uy)
        return out[0] if np.asarray(x).ndim == 1 else out

    def inverse(self, x):
        U = self.euler_to_matrix(x)
        out = self.matrix_to_euler(np.conj(np.swapaxes(U, -1, -2)))
        return out[0] if np.asarray(x).ndim == 1 else out

    def exp_map(self, Y):
        """exp of Y = sum_k Y_k (-i sigma_k / 2); |Y| is the rotation angle."""
        single = np.asarray(Y).ndim == 1
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        theta = np.linalg.norm(Y, axis=-1)
        U = np.zeros((Y.shape[0], 2, 2), dtype=complex)
        half = theta / 2.0
        sinc_half = np.where(theta > 1e-300, np.sin(half) / np.maximum(theta, 1e-300), 0.5)
        c = np.cos(half)
        nx, ny, nz = (Y * sinc_half[:, None]).T  # = sin(theta/2) * unit(Y)
        U[:, 0, 0] = c - 1j * nz
        U[:, 0, 1] = -ny - 1j * nx
        U[:, 1, 0] = ny - 1j * nx
        U[:, 1, 1] = c + 1j * nz
        out = self.matrix_to_euler(U)
        return out[0] if single else out

    def log_map(self, x):
        """Principal logarithm; rejects the antipode (angle ~ 2pi)."""
        single = np.asarray(x).ndim == 1
        U = self.euler_to_matrix(x)
        c = np.real(U[:, 0, 0] + U[:, 1, 1]) / 2.0  # cos(theta/2)
        vx = -np.imag(U[:, 0, 1] + U[:, 1, 0]) / 2.0
        vy = np.real(U[:, 1, 0] - U[:, 0, 1]) / 2.0
        vz = -np.imag(U[:, 0, 0] - U[:, 1, 1]) / 2.0
        sv = np.sqrt(vx * vx + vy * vy + vz * vz)  # sin(theta/2)
        theta = 2.0 * np.arctan2(sv, c)
        if np.any(theta > TWO_PI - 1e-8):
            raise OutOfDomainError("log undefined near the antipode (angle ~ 2pi)")
        scale = np.where(sv > 1e-300, theta / np.maximum(sv, 1e-300), 2.0)
        Y = np.stack([vx, vy, vz], axis=-1) * scale[:, None]
        return Y[0] if single else Y

    def central_norm(self, Y):
        return float(np.linalg.norm(Y))

    def _relative_density(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        theta = np.linalg.norm(Y, axis=-1)
        half = theta / 2.0
        val = np.where(theta > 1e-14, np.sin(half) / np.maximum(half, 1e-300), 1.0) ** 2
        return val

    def haar_density(self, Y):
        """Pullback density of Haar under exp, relative to its value at 0."""
        self._check_ball(Y)
        v = self._relative_density(Y)
        return float(v[0]) if np.asarray(Y).ndim == 1 else v

    def exp_jacobian(self, Y):
        """|det D exp(Y)| in the left-trivialized frame, = (sin(t/2)/(t/2))^2."""
        self._check_ball(Y)
        v = self._relative_density(Y)
        return float(v[0]) if np.asarray(Y).ndim == 1 else v

    def _check_ball(self, Y):
        theta = np.linalg.norm(np.atleast_2d(np.asarray(Y, dtype=float)), axis=-1)
        if np.any(theta >= TWO_PI):
            raise OutOfDomainError("outside the injectivity ball")

    def derivative_generator(self, dual, field_idx):
        return algebra_generators(dual.index[0])[field_idx]


def make_group(kind, n=1):
    if kind == "torus":
        return TorusGroup(n)
    if kind == "su2":
        return SU2Group()
    raise ValueError(f"unknown group kind {kind!r}")


def dual_max_degree(duals):
    return max((d.degree for d in duals), default=0.0)


def sublaplacian_generator(group, dual):
    """Matrix of the sub-Laplacian -sum_j X_j^2 acting on coefficients."""
    S = np.zeros((dual.dim, dual.dim), dtype=complex)
    for j in group.sub_system:
        g = group.derivative_generator(dual, j)
        S -= g @ g
    return S


def laplacian_generator(group, dual):
    S = np.zeros((dual.dim, dual.dim), dtype=complex)
    for j in range(group.n_fields):
        g = group.derivative_generator(dual, j)
        S -= g @ g
    return S
