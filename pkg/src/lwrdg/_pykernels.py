"""Numpy implementations of the hot kernels.

Signatures mirror ``_core.pyx`` exactly; arrays are modified in place where
the compiled version does so.
"""

import numpy as np

_FLUX_LF = 0


def residual_quadratic(coeffs, widths, phi_q, dphi_q, wq, psi_r, psi_l, inv_mass,
                       v, rho_max, flux_kind, fl, fr, out):
    # a diverging run is reported by the caller's finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        vals = coeffs @ phi_q
        fq = v * vals * (1.0 - vals / rho_max)
        avg = coeffs[:, 0]
        f_ref = v * avg * (1.0 - avg / rho_max)
        vol = ((fq - f_ref[:, None]) * wq) @ dphi_q.T + f_ref[:, None] * (psi_r - psi_l)
        tr_r = coeffs @ psi_r
        tr_l = coeffs @ psi_l
        n = coeffs.shape[0]
        F = np.empty(n + 1)
        F[0] = fl
        F[n] = fr
        a = tr_r[:-1]
        b = tr_l[1:]
        f_a = v * a * (1.0 - a / rho_max)
        f_b = v * b * (1.0 - b / rho_max)
        if flux_kind == _FLUX_LF:
            F[1:n] = 0.5 * (f_a + f_b) + 0.5 * v * (a - b)
        else:
            sigma = 0.5 * rho_max
            f_sigma = 0.25 * v * rho_max
            falling = np.where((b <= sigma) & (sigma <= a), f_sigma, np.maximum(f_a, f_b))
            F[1:n] = np.where(a <= b, np.minimum(f_a, f_b), falling)
        res = vol - F[1:, None] * psi_r + F[:-1, None] * psi_l
        out[...] = res * inv_mass * (2.0 / widths)[:, None]


def minmod_bar(a1, a2, a3, threshold):
    a1 = np.asarray(a1, dtype=float)
    s = np.sign(a1)
    same = (np.sign(a2) == s) & (np.sign(a3) == s)
    m = s * np.minimum(np.minimum(np.abs(a1), np.abs(a2)), np.abs(a3))
    return np.where(np.abs(a1) <= threshold, a1, np.where(same, m, 0.0))


def tvb_limit(coeffs, widths, psi_r, psi_l, M, periodic):
    n, kp1 = coeffs.shape
    if kp1 == 1 or (n == 1 and not periodic):
        return 0
    avg = coeffs[:, 0]
    a_r = coeffs @ psi_r - avg
    a_l = avg - coeffs @ psi_l
    if periodic:
        dp = np.roll(avg, -1) - avg
        dm = avg - np.roll(avg, 1)
    else:
        d = np.diff(avg)
        dp = np.concatenate((d, d[-1:]))
        dm = np.concatenate((d[:1], d))
    thr = M * widths * widths
    m_r = minmod_bar(a_r, dp, dm, thr)
    m_l = minmod_bar(a_l, dp, dm, thr)
    changed = (np.abs(m_r - a_r) > 1e-14) | (np.abs(m_l - a_l) > 1e-14)
    if not changed.any():
        return 0
    if kp1 == 2:
        coeffs[changed, 1] = m_r[changed]
    else:
        coeffs[changed, 1] = 0.5 * (m_r[changed] + m_l[changed])
        coeffs[changed, 2] = 0.75 * (m_r[changed] - m_l[changed])
        coeffs[changed, 3:] = 0.0
    return int(changed.sum())


def bp_limit(coeffs, phi_gl, lo, hi, tol):
    if coeffs.shape[1] == 1:
        avg = coeffs[:, 0]
        bad = np.flatnonzero((avg < lo - tol) | (avg > hi + tol))
        return int(bad[0]) if bad.size else -1
    vals = coeffs @ phi_gl
    avg = coeffs[:, 0]
    bad = np.flatnonzero((avg < lo - tol) | (avg > hi + tol))
    if bad.size:
        return int(bad[0])
    vmax = vals.max(axis=1)
    vmin = vals.min(axis=1)
    theta = np.ones(len(avg))
    up = vmax > hi
    if up.any():
        theta[up] = (hi - avg[up]) / (vmax[up] - avg[up])
    dn = vmin < lo
    if dn.any():
        theta[dn] = np.minimum(theta[dn], (avg[dn] - lo) / (avg[dn] - vmin[dn]))
    np.clip(theta, 0.0, 1.0, out=theta)
    hit = up | dn
    coeffs[hit, 1:] *= theta[hit, None]
    return -1


def lp_grid_scan(lo_a, hi_a, lo_b, hi_b, step, cons, band, wa, wb):
    """Brute-force scan of the lattice lo + i*step inside the box.

    Feasible points satisfy cons[:, 0]*a + cons[:, 1]*b <= cons[:, 2] (+1e-13).
    Returns (a*, b*, max_sum, a_tie, b_tie, a_lo, a_hi, b_lo, b_hi) where the
    tie point minimizes |wa*a - wb*b| among feasible points whose sum is
    within ``band`` of the maximum, and the box bounds that same set.
    """
    na = int(np.floor((hi_a - lo_a) / step + 1e-9)) + 1
    nb = int(np.floor((hi_b - lo_b) / step + 1e-9)) + 1
    A = lo_a + step * np.arange(na)
    B = lo_b + step * np.arange(nb)
    A, B = np.meshgrid(A, B, indexing="ij")
    feas = np.ones(A.shape, dtype=bool)
    for ca, cb, s in cons:
        feas &= ca * A + cb * B <= s + 1e-13
    if not feas.any():
        return (np.nan,) * 9
    S = np.where(feas, A + B, -np.inf)
    i = np.unravel_index(np.argmax(S), S.shape)
    smax = S[i]
    near = feas & (S >= smax - band)
    dist = np.where(near, np.abs(wa * A - wb * B), np.inf)
    t = np.unravel_index(np.argmin(dist), dist.shape)
    an = A[near]
    bn = B[near]
    return (A[i], B[i], smax, A[t], B[t], an.min(), an.max(), bn.min(), bn.max())
