# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels; same contract as ``_kernels_py``."""
import numpy as np
from libc.math cimport log1p

BACKEND = "cython"


def gpe_nonlinear(const double complex[::1] psi, const double[::1] V, double g):
    cdef Py_ssize_t i, n = psi.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double re, im, r, sv = 0.0, s4 = 0.0, s2 = 0.0
    with nogil:
        for i in range(n):
            re = psi[i].real
            im = psi[i].imag
            r = re * re + im * im
            o[i] = (V[i] + g * r) * psi[i]
            sv += V[i] * r
            s4 += r * r
            s2 += r
    return out, sv, s4, s2


def line_moments(const double complex[::1] psi, const double complex[::1] d):
    cdef Py_ssize_t i, n = psi.shape[0]
    cdef double a, b, r
    cdef double sa = 0.0, sb = 0.0, sar = 0.0, sbr = 0.0, saa = 0.0, sab = 0.0, sbb = 0.0
    with nogil:
        for i in range(n):
            a = psi[i].real * d[i].real + psi[i].imag * d[i].imag
            b = d[i].real * d[i].real + d[i].imag * d[i].imag
            r = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            sa += a
            sb += b
            sar += a * r
            sbr += b * r
            saa += a * a
            sab += a * b
            sbb += b * b
    return sa, sb, sar, sbr, saa, sab, sbb


def saturable_terms(const double complex[:, ::1] U, double kappa):
    cdef Py_ssize_t c, i, nc = U.shape[0], n = U.shape[1]
    out = np.empty((nc, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double rho, x, gp, sg = 0.0
    with nogil:
        for i in range(n):
            rho = 0.0
            for c in range(nc):
                rho = rho + U[c, i].real * U[c, i].real + U[c, i].imag * U[c, i].imag
            x = kappa * rho
            gp = -rho / (1.0 + x)
            for c in range(nc):
                o[c, i] = gp * U[c, i]
            sg += log1p(x) - x
    return out, sg / (kappa * kappa)


def saturable_line_delta(const double[::1] rho0, const double[::1] alpha,
                         const double[::1] beta, double t, double kappa):
    cdef Py_ssize_t i, n = rho0.shape[0]
    cdef double y, s = 0.0
    with nogil:
        for i in range(n):
            y = kappa * t * (t * beta[i] - 2.0 * alpha[i])
            s += log1p(y / (1.0 + kappa * rho0[i])) - y
    return s / (kappa * kappa)


def error_residual(const double complex[:, ::1] LU, const double complex[:, ::1] U, double kappa):
    cdef Py_ssize_t c, i, nc = U.shape[0], n = U.shape[1]
    out = np.empty((nc, n), dtype=np.complex128)
    cdef double complex[:, ::1] f = out
    cdef double rho, w, s = 0.0
    cdef double complex v
    with nogil:
        for i in range(n):
            rho = 0.0
            for c in range(nc):
                rho = rho + U[c, i].real * U[c, i].real + U[c, i].imag * U[c, i].imag
            w = rho / (1.0 + kappa * rho)
            for c in range(nc):
                v = LU[c, i] - w * U[c, i]
                f[c, i] = v
                s += v.real * v.real + v.imag * v.imag
    return out, s


def error_line_value(const double complex[:, ::1] LU, const double complex[:, ::1] Ld,
                     const double complex[:, ::1] U, const double complex[:, ::1] d,
                     double t, double kappa):
    cdef Py_ssize_t c, i, nc = U.shape[0], n = U.shape[1]
    cdef double rho, w, s = 0.0
    cdef double complex ut, v
    with nogil:
        for i in range(n):
            rho = 0.0
            for c in range(nc):
                ut = U[c, i] - t * d[c, i]
                rho = rho + ut.real * ut.real + ut.imag * ut.imag
            w = rho / (1.0 + kappa * rho)
            for c in range(nc):
                ut = U[c, i] - t * d[c, i]
                v = (LU[c, i] - t * Ld[c, i]) - w * ut
                s += v.real * v.real + v.imag * v.imag
    return s


def error_gradient_combine(const double complex[:, ::1] Lf, const double complex[:, ::1] U,
                           const double complex[:, ::1] f, double kappa):
    cdef Py_ssize_t c, i, nc = U.shape[0], n = U.shape[1]
    out = np.empty((nc, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double rho, s, q, w
    with nogil:
        for i in range(n):
            rho = 0.0
            s = 0.0
            for c in range(nc):
                rho = rho + U[c, i].real * U[c, i].real + U[c, i].imag * U[c, i].imag
                s = s + U[c, i].real * f[c, i].real + U[c, i].imag * f[c, i].imag
            q = 1.0 + kappa * rho
            w = rho / q
            s = 2.0 * s / (q * q)
            for c in range(nc):
                o[c, i] = Lf[c, i] - w * f[c, i] - s * U[c, i]
    return out
