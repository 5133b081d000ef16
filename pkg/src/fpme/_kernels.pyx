# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the time stepper and profile extraction."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def guarded_power(const double[::1] u, double m, double[::1] out):
    """out = u**m with u <= 0 mapped to 0."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double v
    if m == 1.0:
        for i in range(n):
            v = u[i]
            out[i] = v if v > 0.0 else 0.0
        return
    if m == 2.0:
        for i in range(n):
            v = u[i]
            out[i] = v * v if v > 0.0 else 0.0
        return
    for i in range(n):
        v = u[i]
        out[i] = v if v > 0.0 else 0.0
    # NumPy's vectorised pow beats a scalar libm loop here
    arr = np.asarray(out)
    np.power(arr, m, out=arr)


def euler_update(const double[::1] u, const double[::1] au, const double[::1] w,
                 double dt, double eps, double[::1] out):
    """out = max(u - dt*(au + eps*w), 0); returns the total negative part removed."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double v, clipped = 0.0
    for i in range(n):
        v = u[i] - dt * (au[i] + eps * w[i])
        if v < 0.0:
            clipped -= v
            v = 0.0
        out[i] = v
    return clipped


def heun_combine(const double[::1] u, const double[::1] stage, double[::1] out):
    """out = (u + stage) / 2, in place allowed."""
    cdef Py_ssize_t i, n = u.shape[0]
    for i in range(n):
        out[i] = 0.5 * (u[i] + stage[i])


def shell_sums(const double[::1] values, const double[::1] radius, double dr, Py_ssize_t nbins):
    """Per-shell sum, sum of squares and count for shells [k dr, (k+1) dr)."""
    cdef cnp.ndarray[cnp.float64_t] s1 = np.zeros(nbins)
    cdef cnp.ndarray[cnp.float64_t] s2 = np.zeros(nbins)
    cdef cnp.ndarray[cnp.int64_t] cnt = np.zeros(nbins, dtype=np.int64)
    cdef double[::1] a1 = s1
    cdef double[::1] a2 = s2
    cdef long long[::1] c = cnt
    cdef Py_ssize_t i, k, n = values.shape[0]
    cdef double v
    for i in range(n):
        k = <Py_ssize_t>(radius[i] / dr + 0.5)
        if k < nbins:
            v = values[i]
            a1[k] += v
            a2[k] += v * v
            c[k] += 1
    return s1, s2, cnt


cdef inline double _minmod(double a, double b):
    if a * b <= 0.0:
        return 0.0
    return a if fabs(a) < fabs(b) else b


def transport_rhs(const double[::1] v, const double[::1] face_velocity, double dx, double[::1] out):
    """out = -d/dy (a v) on a periodic line, a given at the faces i+1/2.

    Upwind fluxes with minmod-limited linear reconstruction; positivity is kept
    for a forward-Euler step with |a| dt / dx <= 1/2.
    """
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double a, vf, left, right, first = 0.0
    cdef double inv = 1.0 / dx
    for i in range(n + 1):
        a = face_velocity[i % n]
        if a >= 0.0:
            vf = v[i % n] + 0.5 * _minmod(v[i % n] - v[(i - 1 + n) % n], v[(i + 1) % n] - v[i % n])
        else:
            vf = v[(i + 1) % n] - 0.5 * _minmod(v[(i + 1) % n] - v[i % n], v[(i + 2) % n] - v[(i + 1) % n])
        right = a * vf
        if i == 0:
            first = right
        else:
            out[i % n] = -(right - left) * inv if i < n else -(first - left) * inv
        left = right
