"""Friedrichs symmetrization: the smoothing amplitude and its operator.

The amplitude is p(x,y,xi) = integral_G w_xi(x z^{-1}) w_xi(y z^{-1})
sigma(z,xi) dz. Two assembly routes are provided:

* ``amplitude``: materialize p on grid pairs by the local ball rule
  (9^n Gauss-Legendre nodes scaled to the shrinking support) and project the
  spatial kernel onto the Peter-Weyl basis. Spec-faithful and fine on the
  torus; dense pair storage rules it out on SU(2) beyond tiny cutoffs.

* ``factored`` (default): the positivity-transparent quadrature of the same
  integral, (P e_q, e_p) = sum_xi d_xi int_z Tr(T_p* xi(z) sigma xi(z)* T_q),
  where T_u(z,xi) = (w_xi . u(. z))-hat(xi) is built from the window tensors
  Phi^xi_ab(eta) = (w_xi xi_ab)-hat(eta). Because the assembled quadratic
  form is exactly the z-quadrature of the manifestly nonnegative integrand,
  the section is positive semidefinite (up to roundoff) whenever the symbol
  is pointwise nonnegative at the z nodes, for any z resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import dual_max_degree
from .harmonic import (
    FourierCoefficients,
    basis_labels,
    coefficients_to_vector,
    forward_transform,
    inverse_transform,
    vector_to_coefficients,
)
from .quantize import (
    GridAmplitude,
    OperatorMatrix,
    aop_from_amplitude,
    hermitian_part,
    interior_block,
    interior_indices,
)
from .symbols import Symbol
from .weights import ball_rule

__all__ = [
    "window_coefficients",
    "FriedrichsAmplitude",
    "friedrichs_amplitude",
    "FriedrichsFactored",
    "friedrichs_operator",
    "positivity_check",
]


def _haar_ball(group, radius, n_axis):
    """Ball nodes, Haar-weighted: returns (Y, group points, weights) with the
    pullback density and the global normalization folded into the weights."""
    Y, wts = ball_rule(group, radius, n_axis)
    if group.kind == "torus":
        dens = np.ones(len(Y))
        pts = np.mod(Y, 2 * math.pi)
    else:
        dens = group._relative_density(Y)
        pts = group.exp_map(Y)
    return Y, pts, wts * dens * group.pullback_density_at_0


def window_coefficients(w, duals, n_axis=11):
    """Window tensors Phi^xi_ab(eta) = (w_xi xi_ab)-hat(eta).

    Integrals run over the support ball of w_xi on a dedicated local rule.
    Returns nested dict: xi key -> eta key -> array (d_xi, d_xi, d_eta, d_eta).
    """
    group = w.group
    out = {}
    for xi in duals:
        R = w.support_radius(xi)
        Y, pts, wts = _haar_ball(group, R, n_axis)
        wv = w.eval_exp(Y, xi)
        keep = wv > 0
        Yk, ptsk, ww = Y[keep], pts[keep], (wts[keep] * wv[keep])
        Rxi = group.rep_values(xi, ptsk)
        per_eta = {}
        for eta in duals:
            Reta = group.rep_values(eta, ptsk)
            per_eta[eta.key] = np.einsum(
                "m,mab,mvu->abuv", ww, Rxi, Reta.conj(), optimize=True)
        out[xi.key] = per_eta
    return out


def _central_sq_coefficients(w, xi, x_duals, n_axis=11):
    """Scalars c_w(xi) with (w_xi^2)-hat(w) = c_w I, for each x-dual w.

    w_xi^2 is central, so these are radial integrals; dense Gauss-Legendre in
    the radius on T^1 and SU(2) (characters depend only on the rotation
    angle), local cube rule otherwise.
    """
    from numpy.polynomial.legendre import leggauss

    group = w.group
    R = w.support_radius(xi)
    v0 = group.pullback_density_at_0
    coeffs = {}
    if group.kind == "torus" and group.n == 1:
        z, gw = leggauss(96)
        s = (z + 1) * R / 2.0
        gw = gw * R / 2.0
        wv = w.eval_exp(s[:, None], xi) ** 2
        for om in x_duals:
            k = om.index[0]
            coeffs[om.key] = complex(2.0 * v0 * np.sum(gw * wv * np.cos(k * s)))
        return coeffs
    if group.kind == "su2":
        z, gw = leggauss(128)
        theta = (z + 1) * R / 2.0
        gw = gw * R / 2.0
        Y = np.zeros((theta.size, 3))
        Y[:, 0] = theta
        wv = w.eval_exp(Y, xi) ** 2
        dens = group._relative_density(Y)
        base = gw * wv * dens * theta * theta
        half = theta / 2.0
        sin_half = np.where(np.sin(half) == 0.0, 1.0, np.sin(half))
        for om in x_duals:
            t = om.index[0]
            chi = np.where(theta < 1e-10, float(t + 1), np.sin((t + 1) * half) / sin_half)
            coeffs[om.key] = complex(4.0 * math.pi * v0 * np.sum(base * chi) / om.dim)
        return coeffs
    Y, pts, wts = _haar_ball(group, R, max(n_axis, 33))
    wv = w.eval_exp(Y, xi) ** 2
    for om in x_duals:
        Rm = group.rep_values(om, pts)
        chi_v = np.trace(Rm, axis1=-2, axis2=-1)
        coeffs[om.key] = complex(np.sum(wts * wv * chi_v.conj()) / om.dim)
    return coeffs


class FriedrichsAmplitude:
    """Lazy evaluator of the symmetrized amplitude via the local ball rule."""

    def __init__(self, symbol, weight, n_axis=9):
        self.symbol = symbol
        self.weight = weight
        self.group = symbol.group
        self.n_axis = n_axis
        self.duals = list(symbol.duals)
        self.name = f"friedrichs[{symbol.name}]"
        self.params = symbol.params
        self._hermitian_source = symbol.hermitian_defect() < 1e-12

    def resolution_warning(self, rule):
        """True when some support radius falls under 3 global grid steps."""
        if self.group.kind == "torus":
            step = 2 * math.pi / rule.meta["npts_axis"]
        else:
            step = float(np.max(np.diff(np.sort(rule.meta["betas"]))))
        rmin = min(self.weight.support_radius(d) for d in self.duals)
        return rmin < 3 * step

    def _eval_anchor_x(self, x, ys, dual):
        """p(x, y_k, xi) for one x and a batch of y, anchored at x."""
        g = self.group
        w = self.weight
        R = w.support_radius(dual)
        Y, pts, wts = _haar_ball(g, R, self.n_axis)
        w1 = w.eval_exp(Y, dual)
        keep = w1 > 0
        Y, pts, wts, w1 = Y[keep], pts[keep], wts[keep], w1[keep]
        M = len(Y)
        # sigma(exp(-Y) x, xi)
        if g.kind == "torus":
            z_args = np.mod(x[None, :] - Y, 2 * math.pi)
        else:
            z_args = g.multiply(g.exp_map(-Y), np.broadcast_to(x, (M, 3)))
        sig = self.symbol.eval_x(z_args, dual)          # (M, d, d)
        if g.kind == "torus":
            shift = np.mod(ys[:, None, :] - x[None, None, :] + pts[None, :, :],
                           2 * math.pi)
            w2 = w.eval(shift.reshape(-1, g.n), dual).reshape(len(ys), M)
        else:
            yxinv = g.multiply(ys, np.broadcast_to(g.inverse(x), (len(ys), 3)))
            Uy = g.euler_to_matrix(yxinv)               # (Ny, 2, 2)
            Up = g.euler_to_matrix(pts)                 # (M, 2, 2)
            prod = np.einsum("kab,mbc->kmac", Uy, Up)
            shift = g.matrix_to_euler(prod.reshape(-1, 2, 2))
            w2 = w.eval(shift, dual).reshape(len(ys), M)
        return np.einsum("m,km,mij->kij", wts * w1, w2, sig, optimize=True)

    def eval(self, xs, ys, dual):
        """p(x_i, y_i, xi) for paired points; Hermitian-symmetrized when the
        source symbol is Hermitian. Zero without quadrature when d(x, y)
        exceeds twice the support radius."""
        xs = np.atleast_2d(xs)
        ys = np.atleast_2d(ys)
        g = self.group
        out = np.zeros((xs.shape[0], dual.dim, dual.dim), dtype=complex)
        R2 = 2 * self.weight.support_radius(dual)
        for k in range(xs.shape[0]):
            x, y = xs[k], ys[k]
            if g.kind == "torus":
                sep = float(np.linalg.norm(g.log_map(np.mod(y - x, 2 * math.pi))))
            else:
                sep = g.central_norm(g.log_map(g.multiply(y, g.inverse(x))))
            if sep > R2:
                continue
            pxy = self._eval_anchor_x(x, y[None, :], dual)[0]
            if self._hermitian_source:
                pyx = self._eval_anchor_x(y, x[None, :], dual)[0]
                pxy = (pxy + pyx.conj().T) / 2.0
            out[k] = pxy
        return out

    def materialize(self, rule=None, max_entries=2 * 10**8):
        """Dense GridAmplitude on all grid pairs (torus scale)."""
        rule = rule or self.symbol.rule
        nx = rule.n_nodes
        total = nx * nx * sum(d.dim**2 for d in self.duals)
        if total > max_entries:
            raise MemoryError("amplitude materialization too large; use factored")
        g = self.group
        data = {}
        for dual in self.duals:
            block = np.empty((nx, nx, dual.dim, dual.dim), dtype=complex)
            for i in range(nx):
                block[i] = self._eval_anchor_x(rule.points[i], rule.points, dual)
            if self._hermitian_source:
                block = (block + np.conj(np.swapaxes(np.swapaxes(block, 0, 1), -1, -2))) / 2
            data[dual.key] = block
        return GridAmplitude(g, rule, self.duals, data, self.params, self.name)

    def diagonal_symbol(self, rule=None, n_axis=None):
        """p(x,x,xi) = (w_xi^2 * sigma)(x), via central convolution scalars."""
        rule = rule or self.symbol.rule
        n_axis = n_axis or max(self.n_axis, 11)
        g = self.group
        sig_x = self.symbol.x_coefficients()
        x_dual_keys = sorted({wk for entry in sig_x.values() for wk in entry})
        x_duals = [g.dual_from_key(k) for k in x_dual_keys]
        blocks = {}
        for dual in self.duals:
            cw = _central_sq_coefficients(self.weight, dual, x_duals, n_axis)
            vals = np.zeros((rule.n_nodes, dual.dim, dual.dim), dtype=complex)
            for om in x_duals:
                mat = sig_x[dual.key].get(om.key)
                if mat is None:
                    continue
                R = g.rep_values(om, rule.points)
                vals += om.dim * cw[om.key] * np.einsum("nuv,vuij->nij", R, mat)
            blocks[dual.key] = vals
        return Symbol(g, rule, self.duals, blocks, self.params,
                      f"diag[{self.name}]", x_independent=False)


def friedrichs_amplitude(symbol, weight, n_axis=9):
    return FriedrichsAmplitude(symbol, weight, n_axis)


class FriedrichsFactored:
    """Coherent-state quadrature of the Friedrichs operator.

    Assembles (P e_q, e_p) = sum_xi d_xi sum_z w_z Tr(T_p(z,xi)* Xi(z,xi)
    T_q(z,xi)) with T built from the window tensors; the matvec and the
    grid quadratic form share the same data, so the assembled form equals
    the manifestly nonnegative representation identically.
    """

    def __init__(self, symbol, weight, cutoff, z_degree=None, phi_axis=None):
        group = symbol.group
        if phi_axis is None:
            phi_axis = 65 if group.kind == "torus" and group.n == 1 else 11
        self.symbol = symbol
        self.weight = weight
        self.group = group
        self.duals = group.enumerate_dual(cutoff)
        missing = [d.key for d in self.duals if d.key not in symbol.blocks]
        if missing:
            raise ValueError("symbol does not cover the requested cutoff")
        self.labels = basis_labels(self.duals)
        self.cutoff = max(d.elliptic_weight for d in self.duals)
        xband = symbol.x_band()
        deg = dual_max_degree(self.duals)
        if z_degree is None:
            z_degree = deg + xband
        self.z_degree = max(z_degree, deg)
        if group.kind == "su2":
            self.z_rule = group.minimal_quadrature(self.z_degree)
        else:
            self.z_rule = group.quadrature(self.z_degree)
        self.phi = window_coefficients(weight, self.duals, n_axis=phi_axis)
        self._xi_cache = {}
        self._rep_cache = {}
        self._phi_gemm = {}

    def _phi_pair_matrix(self, xi, om):
        """Phi^xi_{ab}(om) rearranged as ((b,a,v), w) for GEMM pairing."""
        key = (xi.key, om.key)
        if key not in self._phi_gemm:
            ph = self.phi[xi.key][om.key]
            self._phi_gemm[key] = np.ascontiguousarray(
                ph.transpose(1, 0, 2, 3)).reshape(xi.dim * xi.dim * om.dim, om.dim)
        return self._phi_gemm[key]

    def with_symbol(self, other):
        """Share window tensors and rep caches across a symbol suite."""
        import copy

        fr = copy.copy(self)
        fr.symbol = other
        fr._xi_cache = {}
        return fr

    # -- shared pieces ---------------------------------------------------------

    def _rep(self, dual):
        if dual.key not in self._rep_cache:
            self._rep_cache[dual.key] = self.group.rep_values(dual, self.z_rule.points)
        return self._rep_cache[dual.key]

    def _xi_tensor(self, dual):
        """Xi(z) = xi(z) sigma(z,xi) xi(z)^* on the z grid."""
        if dual.key not in self._xi_cache:
            R = self._rep(dual)
            if self.z_rule.n_nodes == self.symbol.rule.n_nodes:
                sig = self.symbol.value(dual)
            else:
                sig = self.symbol.eval_x(self.z_rule.points, dual)
            self._xi_cache[dual.key] = R @ sig @ np.conj(np.swapaxes(R, -1, -2))
        return self._xi_cache[dual.key]

    def _t_values(self, coeffs, xi):
        """T_u(z, xi)[c, a] on the z grid from coefficient blocks of u."""
        phi_xi = self.phi[xi.key]
        d = xi.dim
        kblocks = {}
        for eta in self.duals:
            u = coeffs.blocks[eta.key]
            if np.max(np.abs(u)) == 0.0:
                continue
            ph = phi_xi[eta.key]  # (a, c, k, i) wait: (d,d,deta,deta)
            # K_{ca}(eta) = u-hat(eta) Phi^xi_{ac}(eta)^dagger
            K = np.einsum("uk,acvk->cauv", u, ph.conj(), optimize=True)
            kblocks[eta.key] = K.reshape(d * d, eta.dim, eta.dim)
        if not kblocks:
            return np.zeros((self.z_rule.n_nodes, d, d), dtype=complex)
        sub_duals = [e for e in self.duals if e.key in kblocks]
        co = FourierCoefficients(self.group, sub_duals, kblocks)
        vals = inverse_transform(co, self.z_rule)  # (d*d, Nz)
        return np.moveaxis(vals.reshape(d, d, -1), -1, 0)  # (Nz, c, a)

    def embed(self, vec, labels):
        """Lift a vector given on a sub-basis into the full label space."""
        pos = {(d.key, i, j): p for p, (d, i, j) in enumerate(self.labels)}
        out = np.zeros(len(self.labels), dtype=complex)
        for val, (d, i, j) in zip(vec, labels):
            out[pos[(d.key, i, j)]] = val
        return out

    # -- evaluation -------------------------------------------------------------

    def quadratic_form(self, vec):
        """(P u, u) evaluated as the manifestly nonnegative z-quadrature."""
        co = vector_to_coefficients(np.asarray(vec, dtype=complex), self.labels, self.group)
        total = 0.0
        wz = self.z_rule.weights
        for xi in self.duals:
            T = self._t_values(co, xi)
            Xi = self._xi_tensor(xi)
            vals = np.einsum("zba,zbc,zca->z", T.conj(), Xi, T, optimize=True)
            total += xi.dim * float(np.real(np.sum(wz * vals)))
        return total

    def matvec(self, vec):
        co = vector_to_coefficients(np.asarray(vec, dtype=complex), self.labels, self.group)
        out = {d.key: np.zeros((d.dim, d.dim), dtype=complex) for d in self.duals}
        for xi in self.duals:
            T = self._t_values(co, xi)
            Xi = self._xi_tensor(xi)
            G = Xi @ T                                   # (Nz, b, a)
            batch = np.moveaxis(G, 0, -1).reshape(xi.dim * xi.dim, -1)
            ghat = forward_transform(self.z_rule, batch, self.duals)
            for om in self.duals:
                do = om.dim
                gh = ghat.blocks[om.key].reshape(xi.dim, xi.dim, do, do)
                lhs = np.ascontiguousarray(
                    gh.transpose(2, 0, 1, 3)).reshape(do, xi.dim * xi.dim * do)
                out[om.key] += xi.dim * (lhs @ self._phi_pair_matrix(xi, om))
        co_out = FourierCoefficients(self.group, self.duals, out)
        return coefficients_to_vector(co_out, self.labels)

    def _assemble_eta_block(self, eta, section, xi_tensors, mats, col0,
                            max_batch=6 * 10**6):
        """Columns of one eta block for every operator in ``mats``.

        GEMM-shaped contractions plus one batched transform per (xi, i-chunk);
        chunking over the column row-index i bounds transients. T tensors are
        shared across the symbol list.
        """
        de = eta.dim
        nz = self.z_rule.n_nodes
        Reta = self._rep(eta)                              # (z, k, j)
        Rt = np.ascontiguousarray(Reta.transpose(0, 2, 1)).reshape(nz * de, de)
        for xi in self.duals:
            d = xi.dim
            phi_xe = self.phi[xi.key][eta.key]
            ci = max(1, min(de, int(max_batch / max(1, de * d * d * nz))))
            for i0 in range(0, de, ci):
                isel = slice(i0, min(i0 + ci, de))
                ni = isel.stop - isel.start
                # Md[k, (i,c,a)] = conj(Phi_{ac}(eta)[k, i]) for i in the chunk
                Md = np.conj(phi_xe[:, :, :, isel]).transpose(2, 3, 1, 0)
                Md = np.ascontiguousarray(Md).reshape(de, ni * d * d)
                # T[(z,j),(i,c,a)] = sum_k Reta[z,k,j] Md[k,(ica)]
                T = math.sqrt(de) * (Rt @ Md)
                T = T.reshape(nz, de, ni, d, d)            # (z, j, i, c, a)
                Tz = np.ascontiguousarray(
                    T.transpose(0, 3, 1, 2, 4)).reshape(nz, d, de * ni * d)
                cols = slice(col0 + i0 * de, col0 + isel.stop * de)
                for mat, xt in zip(mats, xi_tensors):
                    G = xt[xi.key] @ Tz                    # (z, b, (j i a))
                    # function batch ordered (i, j, b, a)
                    Gf = G.reshape(nz, d, de, ni, d).transpose(3, 2, 1, 4, 0)
                    batch = np.ascontiguousarray(Gf).reshape(ni * de * d * d, nz)
                    ghat = forward_transform(self.z_rule, batch, section)
                    row0 = 0
                    for om in section:
                        do = om.dim
                        gh = ghat.blocks[om.key].reshape(ni * de, d, d, do, do)
                        lhs = np.ascontiguousarray(
                            gh.transpose(0, 3, 1, 2, 4)).reshape(ni * de * do, d * d * do)
                        pair = (lhs @ self._phi_pair_matrix(xi, om)).reshape(ni * de, do, do)
                        # row p = (om, i', j') takes the (j', i') entry
                        contrib = xi.dim * math.sqrt(do) * pair.transpose(2, 1, 0)
                        mat[row0:row0 + do * do, cols] += \
                            contrib.reshape(do * do, ni * de)
                        row0 += do * do

    def assemble(self, section_degree=None):
        return self.assemble_suite([self.symbol], section_degree)[0]

    def assemble_suite(self, symbols, section_degree=None):
        """Sections for several symbols sharing this weight and cutoff.

        ``section_degree`` restricts rows and columns to dual indices of at
        most that degree (the interior block); the amplitude's xi sum always
        runs over the full enumerated cutoff. Entries are unchanged by the
        restriction, so this is the margin policy applied at assembly time.
        """
        if section_degree is None:
            section = self.duals
        else:
            section = [d for d in self.duals if d.degree <= section_degree + 1e-9]
        labels = basis_labels(section)
        n = len(labels)
        xi_tensors = []
        for s in symbols:
            if s is self.symbol:
                xi_tensors.append({d.key: self._xi_tensor(d) for d in self.duals})
            else:
                ten = {}
                for d in self.duals:
                    R = self._rep(d)
                    sig = (s.value(d) if self.z_rule.n_nodes == s.rule.n_nodes
                           else s.eval_x(self.z_rule.points, d))
                    ten[d.key] = R @ sig @ np.conj(np.swapaxes(R, -1, -2))
                xi_tensors.append(ten)
        mats = [np.zeros((n, n), dtype=complex) for _ in symbols]
        col0 = 0
        for eta in section:
            self._assemble_eta_block(eta, section, xi_tensors, mats, col0)
            col0 += eta.dim ** 2
        out = []
        sec_cut = max(d.elliptic_weight for d in section)
        for s, P in zip(symbols, mats):
            if s.hermitian_defect() < 1e-12:
                P = hermitian_part(P)
            meta = {"source": f"friedrichs[{s.name}]", "x_band": s.x_band(),
                    "z_degree": self.z_degree, "method": "factored",
                    "xi_cutoff": self.cutoff,
                    "interior_applied": section_degree is not None}
            out.append(OperatorMatrix(self.group, self.z_rule, section,
                                      labels, P, sec_cut, meta))
        return out


def friedrichs_operator(symbol, weight, cutoff, method="factored",
                        z_degree=None, phi_axis=None, n_axis=9, rule=None):
    """Assemble the Friedrichs smoothing of Op(symbol) at the cutoff."""
    if method == "factored":
        fr = FriedrichsFactored(symbol, weight, cutoff, z_degree, phi_axis)
        return fr.assemble(), fr
    if method == "amplitude":
        amp = friedrichs_amplitude(symbol, weight, n_axis=n_axis)
        grid = amp.materialize(rule or symbol.rule)
        duals = symbol.group.enumerate_dual(cutoff)
        sub = GridAmplitude(symbol.group, grid.rule, duals,
                            {d.key: grid.data[d.key] for d in duals},
                            symbol.params, amp.name)
        P = aop_from_amplitude(sub, rule=grid.rule)
        P.meta["method"] = "amplitude"
        return P, amp
    raise ValueError(f"unknown method {method!r}")


def positivity_check(P, tol=1e-6, factored=None, margin_degree=None,
                     n_vectors=5, seed=0, cross_tol=1e-6):
    """lambda_min of the Hermitian interior block, plus the quadratic-form
    cross-check against the manifestly nonnegative representation."""
    if margin_degree is None:
        margin_degree = P.meta.get("x_band", 0.0)
    idx = interior_indices(P, margin_degree)
    H = interior_block(hermitian_part(P.mat), idx)
    eigs = np.linalg.eigvalsh(H)
    lam_min = float(eigs[0])
    norm = float(np.linalg.norm(interior_block(P.mat, idx), 2))
    passed = lam_min >= -tol * max(1.0, norm)
    cross = []
    if factored is not None:
        rng = np.random.default_rng(seed)
        for _ in range(n_vectors):
            u = np.zeros(P.n, dtype=complex)
            u[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
            u /= np.linalg.norm(u)
            mf = float(np.real(np.vdot(u, P.mat @ u)))
            qf = factored.quadratic_form(factored.embed(u, P.labels))
            rel = abs(mf - qf) / max(1.0, abs(qf))
            cross.append({"matrix_form": mf, "grid_form": qf, "rel_diff": rel})
        passed = passed and all(c["rel_diff"] <= cross_tol for c in cross)
    return {
        "lambda_min": lam_min,
        "norm": norm,
        "tolerance": tol,
        "passed": bool(passed),
        "interior_size": int(len(idx)),
        "cross_checks": cross,
    }
