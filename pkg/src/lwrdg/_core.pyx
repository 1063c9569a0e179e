# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same signatures and semantics as ``_pykernels``."""

from libc.math cimport fabs, floor, INFINITY, NAN

import numpy as np


cdef inline double _quad(double r, double v, double rm) nogil:
    return v * r * (1.0 - r / rm)


cdef inline double _godunov(double a, double b, double v, double rm) nogil:
    cdef double fa = _quad(a, v, rm)
    cdef double fb = _quad(b, v, rm)
    cdef double sigma = 0.5 * rm
    if a <= b:
        return fa if fa < fb else fb
    if b <= sigma and sigma <= a:
        return 0.25 * v * rm
    return fa if fa > fb else fb


def residual_quadratic(const double[:, ::1] coeffs, const double[::1] widths,
                       const double[:, ::1] phi_q, const double[:, ::1] dphi_q,
                       const double[::1] wq, const double[::1] psi_r,
                       const double[::1] psi_l, const double[::1] inv_mass,
                       double v, double rho_max, int flux_kind,
                       double fl, double fr, double[:, ::1] out):
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t kp1 = coeffs.shape[1]
    cdef Py_ssize_t nq = wq.shape[0]
    cdef Py_ssize_t j, l, q
    cdef double val, acc, a, b, f_left, f_right, f_ref, prev_tr_r, tr_l
    cdef double fvals[8]
    with nogil:
        f_left = fl
        prev_tr_r = 0.0
        for j in range(n):
            # numerical flux at the left edge of cell j
            if j > 0:
                tr_l = 0.0
                for l in range(kp1):
                    tr_l = tr_l + coeffs[j, l] * psi_l[l]
                a = prev_tr_r
                b = tr_l
                if flux_kind == 0:
                    f_left = 0.5 * (_quad(a, v, rho_max) + _quad(b, v, rho_max)) + 0.5 * v * (a - b)
                else:
                    f_left = _godunov(a, b, v, rho_max)
            # right trace of cell j, kept for the next interface
            prev_tr_r = 0.0
            for l in range(kp1):
                prev_tr_r = prev_tr_r + coeffs[j, l] * psi_r[l]
            # volume term relative to f(average), so constant cells give exactly zero
            f_ref = _quad(coeffs[j, 0], v, rho_max)
            for q in range(nq):
                val = 0.0
                for l in range(kp1):
                    val = val + coeffs[j, l] * phi_q[l, q]
                fvals[q] = (_quad(val, v, rho_max) - f_ref) * wq[q]
            for l in range(kp1):
                acc = 0.0
                for q in range(nq):
                    acc = acc + fvals[q] * dphi_q[l, q]
                out[j, l] = acc + f_ref * (psi_r[l] - psi_l[l])
            # stash left flux; right flux is added once the next interface is known
            for l in range(kp1):
                out[j, l] = out[j, l] + f_left * psi_l[l]
            if j > 0:
                for l in range(kp1):
                    out[j - 1, l] = (out[j - 1, l] - f_left * psi_r[l]) * inv_mass[l] * (2.0 / widths[j - 1])
        f_right = fr
        for l in range(kp1):
            out[n - 1, l] = (out[n - 1, l] - f_right * psi_r[l]) * inv_mass[l] * (2.0 / widths[n - 1])


cdef inline double _sign(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline double _minmod_bar(double a1, double a2, double a3, double thr) nogil:
    cdef double s, m
    if fabs(a1) <= thr:
        return a1
    s = _sign(a1)
    if _sign(a2) == s and _sign(a3) == s:
        m = fabs(a1)
        if fabs(a2) < m:
            m = fabs(a2)
        if fabs(a3) < m:
            m = fabs(a3)
        return s * m
    return 0.0


def minmod_bar(a1, a2, a3, threshold):
    return _minmod_bar(a1, a2, a3, threshold)


def tvb_limit(double[:, ::1] coeffs, const double[::1] widths,
              const double[::1] psi_r, const double[::1] psi_l,
              double M, bint periodic):
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t kp1 = coeffs.shape[1]
    cdef Py_ssize_t j, l
    cdef int changed = 0
    cdef double avg, tr, a_r, a_l, dp, dm, thr, m_r, m_l
    if kp1 == 1 or (n == 1 and not periodic):
        return 0
    # averages are never modified, so neighbours can be read in place
    cdef double[::1] avgs = np.empty(n)
    for j in range(n):
        avgs[j] = coeffs[j, 0]
    with nogil:
        for j in range(n):
            avg = avgs[j]
            tr = 0.0
            for l in range(kp1):
                tr = tr + coeffs[j, l] * psi_r[l]
            a_r = tr - avg
            tr = 0.0
            for l in range(kp1):
                tr = tr + coeffs[j, l] * psi_l[l]
            a_l = avg - tr
            if periodic:
                dp = avgs[(j + 1) % n] - avg
                dm = avg - avgs[(j + n - 1) % n]
            elif j == 0:
                dp = avgs[1] - avg
                dm = dp
            elif j == n - 1:
                dm = avg - avgs[n - 2]
                dp = dm
            else:
                dp = avgs[j + 1] - avg
                dm = avg - avgs[j - 1]
            thr = M * widths[j] * widths[j]
            m_r = _minmod_bar(a_r, dp, dm, thr)
            m_l = _minmod_bar(a_l, dp, dm, thr)
            if fabs(m_r - a_r) > 1e-14 or fabs(m_l - a_l) > 1e-14:
                changed += 1
                if kp1 == 2:
                    coeffs[j, 1] = m_r
                else:
                    coeffs[j, 1] = 0.5 * (m_r + m_l)
                    coeffs[j, 2] = 0.75 * (m_r - m_l)
                    for l in range(3, kp1):
                        coeffs[j, l] = 0.0
    return changed


def bp_limit(double[:, ::1] coeffs, const double[:, ::1] phi_gl,
             double lo, double hi, double tol):
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t kp1 = coeffs.shape[1]
    cdef Py_ssize_t ng = phi_gl.shape[1]
    cdef Py_ssize_t j, l, g
    cdef double avg, val, vmax, vmin, theta, t
    for j in range(n):
        avg = coeffs[j, 0]
        if avg < lo - tol or avg > hi + tol:
            return j
    if kp1 == 1:
        return -1
    with nogil:
        for j in range(n):
            avg = coeffs[j, 0]
            vmax = -INFINITY
            vmin = INFINITY
            for g in range(ng):
                val = 0.0
                for l in range(kp1):
                    val = val + coeffs[j, l] * phi_gl[l, g]
                if val > vmax:
                    vmax = val
                if val < vmin:
                    vmin = val
            if vmax <= hi and vmin >= lo:
                continue
            theta = 1.0
            if vmax > hi:
                theta = (hi - avg) / (vmax - avg)
            if vmin < lo:
                t = (avg - lo) / (avg - vmin)
                if t < theta:
                    theta = t
            if theta < 0.0:
                theta = 0.0
            if theta > 1.0:
                theta = 1.0
            for l in range(1, kp1):
                coeffs[j, l] = coeffs[j, l] * theta
    return -1


def lp_grid_scan(double lo_a, double hi_a, double lo_b, double hi_b, double step,
                 const double[:, ::1] cons, double band, double wa, double wb):
    cdef Py_ssize_t na = <Py_ssize_t>floor((hi_a - lo_a) / step + 1e-9) + 1
    cdef Py_ssize_t nb = <Py_ssize_t>floor((hi_b - lo_b) / step + 1e-9) + 1
    cdef Py_ssize_t nc = cons.shape[0]
    cdef Py_ssize_t i, j, c
    cdef double a, b, s, smax = -INFINITY, best_a = NAN, best_b = NAN
    cdef double d, dmin = INFINITY, tie_a = NAN, tie_b = NAN
    cdef double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY
    cdef bint ok
    with nogil:
        for i in range(na):
            a = lo_a + step * i
            for j in range(nb):
                b = lo_b + step * j
                ok = True
                for c in range(nc):
                    if cons[c, 0] * a + cons[c, 1] * b > cons[c, 2] + 1e-13:
                        ok = False
                        break
                if ok:
                    s = a + b
                    if s > smax:
                        smax = s
                        best_a = a
                        best_b = b
    if smax == -INFINITY:
        return (NAN,) * 9
    with nogil:
        for i in range(na):
            a = lo_a + step * i
            for j in range(nb):
                b = lo_b + step * j
                s = a + b
                if s < smax - band:
                    continue
                ok = True
                for c in range(nc):
                    if cons[c, 0] * a + cons[c, 1] * b > cons[c, 2] + 1e-13:
                        ok = False
                        break
                if not ok:
                    continue
                d = fabs(wa * a - wb * b)
                if d < dmin:
                    dmin = d
                    tie_a = a
                    tie_b = b
                if a < amin:
                    amin = a
                if a > amax:
                    amax = a
                if b < bmin:
                    bmin = b
                if b > bmax:
                    bmax = b
    return (best_a, best_b, smax, tie_a, tie_b, amin, amax, bmin, bmax)
