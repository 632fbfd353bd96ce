"""Wigner d- and D-matrices for SU(2), integer and half-integer spin.

Conventions: basis |l, m> ordered by ascending m = -l..l, and

    D^l(alpha, beta, gamma)_{mn} = exp(-i m alpha) d^l_{mn}(beta) exp(-i n gamma),

so D^l is the representation matrix of
u = exp(-i alpha s_z/2) exp(-i beta s_y/2) exp(-i gamma s_z/2).

Spins are passed around as twice their value (``twice_l``) so that all index
arithmetic stays integral.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "wigner_d_stack",
    "wigner_d",
    "wigner_D",
    "angular_momentum",
    "algebra_generators",
]


def _seed_value(twice_l, twice_m, twice_n, half_beta_cos, half_beta_sin):
    """d^l_{mn} at l = max(|m|, |n|), from the one-term closed forms."""
    j2, m2, n2 = twice_l, twice_m, twice_n
    c, s = half_beta_cos, half_beta_sin
    if n2 == j2:
        coef = math.comb(j2, (j2 - m2) // 2)
        return math.sqrt(coef) * c ** ((j2 + m2) // 2) * s ** ((j2 - m2) // 2)
    if n2 == -j2:
        coef = math.comb(j2, (j2 + m2) // 2)
        sign = -1.0 if ((j2 + m2) // 2) % 2 else 1.0
        return sign * math.sqrt(coef) * c ** ((j2 - m2) // 2) * s ** ((j2 + m2) // 2)
    if m2 == j2:
        coef = math.comb(j2, (j2 - n2) // 2)
        sign = -1.0 if ((j2 - n2) // 2) % 2 else 1.0
        return sign * math.sqrt(coef) * c ** ((j2 + n2) // 2) * s ** ((j2 - n2) // 2)
    if m2 == -j2:
        coef = math.comb(j2, (j2 + n2) // 2)
        return math.sqrt(coef) * c ** ((j2 - n2) // 2) * s ** ((j2 + n2) // 2)
    raise ValueError("seed requires max(|m|, |n|) == l")


def wigner_d_stack(twice_lmax, beta):
    """All little-d matrices d^l(beta) for 2l = 0..twice_lmax.

    Three-term recurrence in l at fixed (m, n); stable upward and accurate
    for the half-integer chain as well. Returns a dict mapping twice_l to an
    array of shape (len(beta), 2l+1, 2l+1). Entry order is ascending m, n.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    x = np.cos(beta)
    c = np.cos(beta / 2.0)
    s = np.sin(beta / 2.0)
    out = {
        t: np.zeros((beta.size, t + 1, t + 1)) for t in range(twice_lmax + 1)
    }
    out[0][:, 0, 0] = 1.0
    # One (m, n) pair at a time: seed at l_min = max(|m|,|n|), recurse up.
    for m2 in range(-twice_lmax, twice_lmax + 1):
        for n2 in range(-twice_lmax, twice_lmax + 1):
            if (m2 - n2) % 2 != 0:
                continue
            lmin2 = max(abs(m2), abs(n2))
            if lmin2 == 0:
                prev = np.ones_like(x)    # d^0_{00}
                cur = x.copy()            # d^1_{00}
                out[0][:, 0, 0] = prev
                if twice_lmax >= 2:
                    out[2][:, 1, 1] = cur
                start2 = 2
            else:
                prev = np.zeros_like(x)
                cur = _seed_value(lmin2, m2, n2, c, s)
                out[lmin2][:, (m2 + lmin2) // 2, (n2 + lmin2) // 2] = cur
                start2 = lmin2
            l2 = start2
            while l2 + 2 <= twice_lmax:
                l = l2 / 2.0
                m = m2 / 2.0
                n = n2 / 2.0
                num = (2 * l + 1) * (l * (l + 1) * x - m * n) * cur \
                    - (l + 1) * math.sqrt((l * l - m * m) * (l * l - n * n)) * prev
                den = l * math.sqrt(
                    ((l + 1) ** 2 - m * m) * ((l + 1) ** 2 - n * n)
                )
                nxt = num / den
                prev, cur = cur, nxt
                l2 += 2
                out[l2][:, (m2 + l2) // 2, (n2 + l2) // 2] = cur
    return out


def wigner_d(twice_l, beta):
    """d^l(beta) as an array of shape (len(beta), 2l+1, 2l+1)."""
    return wigner_d_stack(twice_l, beta)[twice_l]


def wigner_D(twice_l, alpha, beta, gamma, d_beta=None):
    """Full D^l matrices at Euler angles, shape (N, 2l+1, 2l+1)."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if d_beta is None:
        d_beta = wigner_d(twice_l, beta)
    m = np.arange(-twice_l, twice_l + 1, 2) / 2.0
    pa = np.exp(-1j * np.outer(alpha, m))  # (N, d)
    pg = np.exp(-1j * np.outer(gamma, m))
    return pa[:, :, None] * d_beta * pg[:, None, :]


def angular_momentum(twice_l):
    """Spin matrices (J_x, J_y, J_z) in the ascending-m basis."""
    d = twice_l + 1
    m = np.arange(-twice_l, twice_l + 1, 2) / 2.0
    l = twice_l / 2.0
    jz = np.diag(m).astype(complex)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(d - 1):
        # <m+1| J_+ |m> with m = m[k]
        jp[k + 1, k] = math.sqrt(l * (l + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2j
    return jx, jy, jz


def algebra_generators(twice_l):
    """Derived representation of the su(2) basis Y_k = -i sigma_k / 2.

    Returns the three matrices dρ(Y_k) = -i J_k, which act on Fourier
    coefficient matrices by left multiplication under left-invariant
    differentiation.
    """
    jx, jy, jz = angular_momentum(twice_l)
    return -1j * jx, -1j * jy, -1j * jz
