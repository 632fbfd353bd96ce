"""Operators on the truncated Peter-Weyl basis.

Op(a) and amplitude operators are assembled as dense matrices on the
orthonormal basis sqrt(d_xi) xi_ij enumerated up to a cutoff. The canonical
representation is the coefficient-space matrix (Sobolev weights are diagonal
there); spatial kernels appear only as intermediates. All claims about
assembled operators are evaluated on the interior block, margin =
x-band limit + difference order, away from the truncation boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import dual_max_degree
from .harmonic import (
    FourierCoefficients,
    basis_labels,
    forward_transform,
    inverse_transform,
    plancherel_norm,
)
from .symbols import Symbol, sublaplacian_symbol

__all__ = [
    "AliasingError",
    "OperatorMatrix",
    "GridAmplitude",
    "op_from_symbol",
    "symbol_of_operator",
    "aop_from_amplitude",
    "adjoint",
    "compose",
    "sobolev_norm",
    "weighted_matrix",
    "hermitian_part",
    "interior_indices",
    "operator_to_json",
    "expansion_check",
]


class AliasingError(ValueError):
    """Quadrature too coarse for the requested cutoffs."""


@dataclass
class OperatorMatrix:
    group: object
    rule: object
    duals: list
    labels: list
    mat: np.ndarray
    cutoff: float
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.mat.shape[0]

    def degree(self):
        return dual_max_degree(self.duals)

    def block_slice(self, dual):
        start = 0
        for d in self.duals:
            if d.key == dual.key:
                return slice(start, start + d.dim * d.dim)
            start += d.dim * d.dim
        raise KeyError(dual.key)


def _require_rule(group, rule, degree_needed):
    if rule is None:
        if group.kind == "su2" and hasattr(group, "minimal_quadrature"):
            return group.minimal_quadrature(degree_needed)
        return group.quadrature(degree_needed)
    if rule.degree + 1e-9 < degree_needed:
        raise AliasingError(
            f"rule degree {rule.degree} below required {degree_needed}"
        )
    return rule


def op_from_symbol(sym, cutoff=None, rule=None):
    """Finite section of Op(a): entries <Op(a) e_q, e_p> by exact projection.

    Needs quadrature exactness >= 2 * cutoff degree + x-band of the symbol.
    """
    group = sym.group
    if cutoff is None:
        duals = list(sym.duals)
    else:
        duals = group.enumerate_dual(cutoff)
    missing = [d.key for d in duals if d.key not in sym.blocks]
    if missing:
        raise ValueError(f"symbol lacks dual blocks for {missing[:3]}")
    xband = sym.x_band()
    need = 2 * dual_max_degree(duals) + xband
    rule = _require_rule(group, rule if rule is not None else sym.rule, need)
    labels = basis_labels(duals)
    n = len(labels)
    A = np.zeros((n, n), dtype=complex)
    col = 0
    same_grid = rule is sym.rule or rule.n_nodes == sym.rule.n_nodes
    for eta in duals:
        if sym.x_independent:
            vals = sym.blocks[eta.key]
        elif same_grid:
            vals = sym.value(eta)
        else:
            vals = sym.eval_x(rule.points, eta)
        R = group.rep_values(eta, rule.points)
        V = math.sqrt(eta.dim) * (R @ vals)           # (Nz, d, d)
        batch = np.moveaxis(V, 0, -1).reshape(eta.dim * eta.dim, -1)
        co = forward_transform(rule, batch, duals)
        row = 0
        for om in duals:
            blk = co.blocks[om.key]                    # (d_eta^2, dw, dw)
            out = math.sqrt(om.dim) * blk.transpose(2, 1, 0).reshape(om.dim * om.dim, -1)
            A[row:row + om.dim * om.dim, col:col + eta.dim * eta.dim] = out
            row += om.dim * om.dim
        col += eta.dim * eta.dim
    cut = max(d.elliptic_weight for d in duals)
    return OperatorMatrix(group, rule, duals, labels, A, cut,
                          {"x_band": xband, "source": sym.name})


def symbol_of_operator(A, margin_degree=None, params=None, name=None):
    """Recover a(x, xi) = xi(x)* (A xi)(x) on the interior dual range."""
    group = A.group
    rule = A.rule
    if margin_degree is None:
        margin_degree = A.meta.get("x_band", 0.0)
    deg_max = A.degree() - margin_degree
    out_duals = [d for d in A.duals if d.degree <= deg_max + 1e-9]
    if not out_duals:
        raise ValueError("margin leaves no interior dual indices")
    blocks = {}
    for eta in out_duals:
        sl = A.block_slice(eta)
        cols = A.mat[:, sl]                            # (n, d^2)
        co_blocks = {}
        row = 0
        for om in A.duals:
            dd = om.dim * om.dim
            sub = cols[row:row + dd, :]                # (dw^2, d^2)
            # basis vector entries c_(om,u,v) = sqrt(dw) uhat_{vu}
            uhat = sub.reshape(om.dim, om.dim, -1).transpose(2, 1, 0) / math.sqrt(om.dim)
            co_blocks[om.key] = uhat                   # (d^2, dw, dw)
            row += dd
        co = FourierCoefficients(group, A.duals, co_blocks)
        vals = inverse_transform(co, rule)             # (d^2, Nz)
        G = np.moveaxis(vals.reshape(eta.dim, eta.dim, -1), -1, 0) / math.sqrt(eta.dim)
        R = group.rep_values(eta, rule.points)
        blocks[eta.key] = np.conj(np.swapaxes(R, -1, -2)) @ G
    return Symbol(group, rule, out_duals, blocks, params,
                  name or f"symbol_of[{A.meta.get('source', 'operator')}]",
                  x_independent=False)


@dataclass
class GridAmplitude:
    """Amplitude sampled on grid pairs: data[key] has shape (Nx, Ny, d, d)."""

    group: object
    rule: object
    duals: list
    data: dict
    params: object = None
    name: str = "amplitude"

    def hermitian_defect(self):
        worst = 0.0
        for d in self.duals:
            v = self.data[d.key]
            sym = np.conj(np.swapaxes(np.swapaxes(v, 0, 1), -1, -2))
            worst = max(worst, float(np.max(np.abs(v - sym))))
        return worst

    def diagonal_symbol(self, params=None, name=None):
        nx = self.rule.n_nodes
        blocks = {}
        for d in self.duals:
            v = self.data[d.key]
            blocks[d.key] = v[np.arange(nx), np.arange(nx)]
        return Symbol(self.group, self.rule, self.duals, blocks, params,
                      name or f"diag[{self.name}]", x_independent=False)


def aop_from_amplitude(amp, cutoff=None, rule=None, max_kernel_entries=2 * 10**8):
    """Amplitude operator via its spatial kernel K(x,y), then projection.

    Generic dense path; guarded by a size check (the factored Friedrichs
    assembler in garding.friedrichs covers the large SU(2) sections).
    """
    group = amp.group
    rule = amp.rule if rule is None else rule
    duals = amp.duals if cutoff is None else group.enumerate_dual(cutoff)
    nz = rule.n_nodes
    if nz * nz * sum(d.dim**2 for d in duals) > max_kernel_entries:
        raise AliasingError("amplitude kernel too large; use the factored assembler")
    K = np.zeros((nz, nz), dtype=complex)
    for d in duals:
        p = amp.data[d.key]
        R = group.rep_values(d, rule.points)
        if d.dim == 1:
            K += d.dim * R[:, None, 0, 0] * p[..., 0, 0] * np.conj(R[None, :, 0, 0])
        else:
            # Tr(xi(y)^* xi(x) p(x,y)) summed over matrix indices
            K += d.dim * np.einsum("ybc,xba,xyac->xy", R.conj(), R, p, optimize=True)
    labels = basis_labels(duals)
    E = np.zeros((nz, len(labels)), dtype=complex)
    col = 0
    for d in duals:
        R = group.rep_values(d, rule.points)
        E[:, col:col + d.dim**2] = math.sqrt(d.dim) * R.reshape(nz, -1)
        col += d.dim**2
    W = rule.weights
    M = (K * W[None, :]) @ E
    A = E.conj().T @ (W[:, None] * M)
    cut = max(d.elliptic_weight for d in duals)
    return OperatorMatrix(group, rule, duals, labels, A, cut, {"source": amp.name})


def adjoint(A):
    return OperatorMatrix(A.group, A.rule, A.duals, A.labels,
                          A.mat.conj().T.copy(), A.cutoff, dict(A.meta))


def compose(A, B):
    if A.cutoff != B.cutoff or len(A.labels) != len(B.labels):
        raise ValueError("cutoff mismatch in composition")
    return OperatorMatrix(A.group, A.rule, A.duals, A.labels, A.mat @ B.mat,
                          A.cutoff, {"source": "compose"})


def hermitian_part(mat):
    return (mat + mat.conj().T) / 2.0


def sobolev_norm(coeffs, s, scale="subelliptic", subl=None):
    """||(1+L)^{s/2} u|| (subelliptic) or ||(1-Laplacian)^{s/2} u|| (elliptic)."""
    weighted = coeffs.copy()
    if scale == "elliptic":
        for d in coeffs.duals:
            weighted.blocks[d.key] = d.elliptic_weight ** s * coeffs.blocks[d.key]
    elif scale == "subelliptic":
        if subl is None:
            subl = sublaplacian_symbol(coeffs.group, coeffs.duals)
        for d in coeffs.duals:
            w = subl.weight_diag(d, s)
            weighted.blocks[d.key] = w[:, None] * coeffs.blocks[d.key]
    else:
        raise ValueError("scale must be 'elliptic' or 'subelliptic'")
    return float(plancherel_norm(weighted))


def _label_weights(A, s, scale, subl):
    w = np.empty(A.n)
    for p, (d, i, j) in enumerate(A.labels):
        if scale == "elliptic":
            w[p] = d.elliptic_weight ** s
        else:
            w[p] = subl.weight_diag(d, s)[j]
    return w


def weighted_matrix(A, s_left, s_right, scale="subelliptic", subl=None):
    """M^{s_left} A M^{s_right} on the section (diagonal in the basis)."""
    if scale == "subelliptic" and subl is None:
        subl = sublaplacian_symbol(A.group, A.duals)
    wl = _label_weights(A, s_left, scale, subl)
    wr = _label_weights(A, s_right, scale, subl)
    return wl[:, None] * A.mat * wr[None, :]


def interior_indices(A, margin_degree):
    deg_max = A.degree() - margin_degree
    return np.array([p for p, (d, i, j) in enumerate(A.labels)
                     if d.degree <= deg_max + 1e-9], dtype=int)


def interior_block(mat, idx):
    return mat[np.ix_(idx, idx)]


def operator_to_json(A):
    def fmt(z):
        return [repr(float(z.real)), repr(float(z.imag))]

    doc = {
        "format": "garding-operator-v1",
        "group": {"kind": A.group.kind, "n": getattr(A.group, "n", 3)},
        "cutoff": A.cutoff,
        "basis": [[list(d.key), i, j] for (d, i, j) in A.labels],
        "entries": [[fmt(z) for z in row] for row in A.mat],
        "quadrature_degree": A.rule.degree,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ------------------------------------------------- amplitude -> symbol check


def _shift_dual_axis(amp_data, duals, group, shift):
    """Backward difference along the dual axis of amplitude data (torus)."""
    have = {d.key for d in duals}
    out = {}
    for d in duals:
        src = tuple(k - s for k, s in zip(d.index, shift))
        if src in have:
            out[d.key] = amp_data[src] - amp_data[d.key]
        else:
            out[d.key] = np.zeros_like(amp_data[d.key])
    return out


def _y_derivative(amp_data, duals, rule, axis_field):
    """Dual-paired derivative i d/dy_j along the y axis of amplitude data."""
    npts = rule.meta["npts_axis"]
    group = rule.group
    freqs = np.fft.fftfreq(npts, d=1.0 / npts)
    out = {}
    for key, v in amp_data.items():
        shp = v.shape
        grid = v.reshape((shp[0],) + (npts,) * group.n + shp[2:])
        F = np.fft.fft(grid, axis=1 + axis_field)
        mult_shape = [1] * grid.ndim
        mult_shape[1 + axis_field] = npts
        F = F * (1j * freqs.reshape(mult_shape))
        out[key] = (1j * np.fft.ifft(F, axis=1 + axis_field)).reshape(shp)
    return out


def expansion_check(amp, orders, params, margin_degree=2.0):
    """Finite-order amplitude-to-symbol expansion test on the torus.

    Compares the exact symbol of AOp(p) with the partial sums
    sum_{|alpha|<=N} (d_Y^(alpha) Delta^alpha p)|_{y=x} and reports the decay
    of the weighted residual over the interior dual range, the fitted decay
    exponent of the raw residual, and N-to-N improvement ratios.
    """
    group = amp.group
    if group.kind != "torus":
        raise ValueError("expansion check is defined on the torus backend")
    rule = amp.rule
    A = aop_from_amplitude(amp)
    exact = symbol_of_operator(A, margin_degree=margin_degree)
    nx = rule.n_nodes
    diag_idx = (np.arange(nx), np.arange(nx))

    # enumerate multi-indices alpha over the n torus directions
    def multis(n, total):
        if n == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in multis(n - 1, total - first):
                yield (first,) + rest

    results = []
    max_order = max(orders)
    term_cache = {}

    def term(alpha):
        if alpha in term_cache:
            return term_cache[alpha]
        data = {d.key: amp.data[d.key] for d in amp.duals}
        for j, k in enumerate(alpha):
            for _ in range(int(k)):
                data = _shift_dual_axis(data, amp.duals, group, tuple(
                    1 if jj == j else 0 for jj in range(group.n)))
                data = _y_derivative(data, amp.duals, rule, j)
        diag = {key: v[diag_idx] for key, v in data.items()}
        term_cache[alpha] = diag
        return diag

    partial = {d.key: np.zeros((nx, 1, 1), dtype=complex) for d in amp.duals}
    by_order = {}
    for total in range(max_order + 1):
        for alpha in multis(group.n, total):
            t = term(alpha)
            for key in partial:
                partial[key] = partial[key] + t[key]
        by_order[total] = {k: v.copy() for k, v in partial.items()}

    interior = [d for d in exact.duals
                if d.degree <= exact.valid_degree - max_order and d.elliptic_weight >= 2]
    for N in orders:
        sN = by_order[N]
        pts, res = [], []
        weighted_sup = 0.0
        for d in interior:
            r = exact.blocks[d.key] - sN[d.key]
            sup = float(np.max(np.abs(r)))
            w = d.elliptic_weight ** (-(params.m - (params.rho - params.delta) * (N + 1)))
            weighted_sup = max(weighted_sup, sup * w)
            if d.elliptic_weight >= 4 and sup > 1e-300:
                pts.append(math.log(d.elliptic_weight))
                res.append(math.log(sup))
        slope = float(np.polyfit(pts, res, 1)[0]) if len(set(pts)) >= 2 else float("nan")
        results.append({
            "order": N,
            "weighted_sup": weighted_sup,
            "fitted_exponent": slope,
            "predicted_exponent": params.m - (params.rho - params.delta) * (N + 1),
        })

    def residual_at(N, target_weight=16.0):
        sN = by_order[N]
        best = min(interior, key=lambda d: abs(d.elliptic_weight - target_weight))
        return float(np.max(np.abs(exact.blocks[best.key] - sN[best.key]))), best.elliptic_weight

    ratios = {}
    if 0 in by_order and 1 in by_order:
        r0, w0 = residual_at(0)
        r1, _ = residual_at(1)
        ratios = {"at_weight": w0, "r0": r0, "r1": r1,
                  "improvement": r0 / r1 if r1 > 0 else float("inf")}
    return {"orders": results, "ratio_test": ratios,
            "interior_duals": len(interior)}
