# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels for the pseudo-spectral stepper.

Elementwise complex stage combinations and nodal flux evaluation; the
FFTs themselves stay in numpy. Loops mirror the numpy fallback's
operation order exactly so the two backends produce identical bits.
"""

import numpy as np

from libc.math cimport fabs, pow, isfinite

BACKEND = "cython"

FLUX_BURGERS = 0
FLUX_POLY = 1
FLUX_POWERLAW = 2


def nodal_flux(int kind, double[::1] params, double[::1] u, double[::1] out):
    """Evaluate the convective flux f(u) on nodal values into ``out``."""
    cdef Py_ssize_t i, j, n = u.shape[0]
    cdef Py_ssize_t nc = params.shape[0]
    cdef double acc, p
    if kind == FLUX_BURGERS:
        for i in range(n):
            out[i] = (u[i] * u[i]) * 0.5
    elif kind == FLUX_POLY:
        for i in range(n):
            acc = params[nc - 1]
            for j in range(nc - 2, -1, -1):
                acc = acc * u[i] + params[j]
            out[i] = acc
    elif kind == FLUX_POWERLAW:
        p = params[0]
        for i in range(n):
            out[i] = u[i] * pow(fabs(u[i]), p)
    else:
        raise ValueError(f"unknown flux kind id {kind}")


def apply_symbol(double complex[::1] sym, double complex[::1] fhat, double complex[::1] out):
    """out = sym * fhat, elementwise (diagonal spectral operator)."""
    cdef Py_ssize_t i, n = fhat.shape[0]
    for i in range(n):
        out[i] = sym[i] * fhat[i]


def stage_combine(double complex[::1] e, double complex[::1] psi,
                  double complex[::1] c, double complex[::1] n,
                  double complex[::1] out):
    """out = e*psi + c*n (one exponential Runge-Kutta stage)."""
    cdef Py_ssize_t i, m = psi.shape[0]
    for i in range(m):
        out[i] = e[i] * psi[i] + c[i] * n[i]


def stage_combine2(double complex[::1] e, double complex[::1] psi,
                   double complex[::1] c1, double complex[::1] n1,
                   double complex[::1] c2, double complex[::1] n2,
                   double complex[::1] out):
    """out = e*psi + c1*n1 + c2*n2."""
    cdef Py_ssize_t i, m = psi.shape[0]
    cdef double complex acc
    for i in range(m):
        acc = e[i] * psi[i] + c1[i] * n1[i]
        out[i] = acc + c2[i] * n2[i]


def final_combine(double complex[::1] e, double complex[::1] psi,
                  double complex[::1] f1, double complex[::1] n0,
                  double complex[::1] f2, double complex[::1] n1,
                  double complex[::1] n2,
                  double complex[::1] f3, double complex[::1] n3,
                  double complex[::1] out):
    """out = e*psi + f1*n0 + f2*(n1+n2) + f3*n3; returns 0 if nonfinite."""
    cdef Py_ssize_t i, m = psi.shape[0]
    cdef double complex acc
    cdef bint ok = True
    for i in range(m):
        acc = e[i] * psi[i] + f1[i] * n0[i]
        acc = acc + f2[i] * (n1[i] + n2[i])
        acc = acc + f3[i] * n3[i]
        out[i] = acc
        if not (isfinite(acc.real) and isfinite(acc.imag)):
            ok = False
    return 1 if ok else 0


def cnab2_combine(double complex[::1] inv_den, double complex[::1] num,
                  double complex[::1] psi, double complex[::1] n,
                  double complex[::1] n_prev, double h,
                  double complex[::1] out):
    """out = inv_den * (num*psi + h*(1.5*n - 0.5*n_prev)); returns 0 if nonfinite."""
    cdef Py_ssize_t i, m = psi.shape[0]
    cdef double complex acc
    cdef bint ok = True
    for i in range(m):
        acc = num[i] * psi[i]
        acc = acc + h * (1.5 * n[i] - 0.5 * n_prev[i])
        acc = acc * inv_den[i]
        out[i] = acc
        if not (isfinite(acc.real) and isfinite(acc.imag)):
            ok = False
    return 1 if ok else 0
