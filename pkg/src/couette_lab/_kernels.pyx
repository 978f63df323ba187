# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ghost-weight kernel; same contract as ``_kernels_py.log_weight``."""
import numpy as np

from libc.math cimport atan, cbrt, fabs, floor, pow, sqrt


cdef inline double _rate_coeff(double m, double a, double nu3, double beta) nogil:
    cdef double tm = 2.0 * a / (2.0 * m + 1.0)
    return pow(1.0 + (nu3 * tm) * (nu3 * tm), -(1.0 + beta) / 2.0) * nu3 * a / (m * m)


cdef inline long _capital_e(double a) nogil:
    cdef long E = <long>floor((sqrt(1.0 + 8.0 * a) - 1.0) / 4.0)
    if (2 * E + 1) * E > a:
        E -= 1
    if (2 * E + 3) * (E + 1) <= a:
        E += 1
    return E


def log_weight(t, eta, double nu, double beta):
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(eta, dtype=np.float64)
    cdef Py_ssize_t n = ev.shape[0]
    out_w = np.zeros(n)
    out_r = np.zeros(n)
    cdef double[::1] lw = out_w
    cdef double[::1] rt = out_r
    cdef double nu3 = cbrt(nu)
    cdef Py_ssize_t i
    cdef long E, j, m, lo
    cdef double a, ti, acc, F, dm, dp, tau, mm
    with nogil:
        for i in range(n):
            a = fabs(ev[i])
            ti = tv[i]
            if a < 3.0:
                continue
            E = _capital_e(a)
            if ti <= 2.0 * a / (2.0 * E + 1.0):
                continue
            if ti >= 2.0 * a:
                lo = 0
                j = 0
            else:
                j = <long>floor((2.0 * a / ti + 1.0) / 2.0)
                if j < 1:
                    j = 1
                if j > E:
                    j = E
                lo = j
            acc = 0.0
            m = E
            while m > lo:
                mm = <double>m
                dm = a / ((2.0 * mm + 1.0) * mm)
                dp = a / ((2.0 * mm - 1.0) * mm)
                acc = acc + _rate_coeff(mm, a, nu3, beta) * (atan(dp) + atan(dm))
                m -= 1
            if j > 0:
                mm = <double>j
                F = _rate_coeff(mm, a, nu3, beta)
                dm = a / ((2.0 * mm + 1.0) * mm)
                tau = ti - a / mm
                acc = acc + F * (atan(tau) + atan(dm))
                rt[i] = F / (1.0 + tau * tau)
            lw[i] = acc
    return out_w, out_r
