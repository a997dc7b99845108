# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled DOP853 propagator for the two-set linear grid.

Same algorithm and step control as ``_dop853_py``; the whole step loop runs
without the GIL so sweep points can be propagated from worker threads.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, pow, nextafter, INFINITY

from . import tableau as _tb

DEF NS = 12

cdef double _A[NS][NS]
cdef double _B[NS]
cdef double _C[NS]
cdef double _E3[NS]
cdef double _E5[NS]
cdef double SAFETY = _tb.SAFETY
cdef double MIN_FACTOR = _tb.MIN_FACTOR
cdef double MAX_FACTOR = _tb.MAX_FACTOR
cdef double ERR_EXP = _tb.ERROR_EXPONENT

cdef int _i, _j
for _i in range(NS):
    _B[_i] = _tb.B[_i]
    _C[_i] = _tb.C[_i]
    _E3[_i] = _tb.E3[_i]
    _E5[_i] = _tb.E5[_i]
    for _j in range(NS):
        _A[_i][_j] = _tb.A[_i, _j]


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _rhs(double t, double complex[:, ::1] y, double complex[:, ::1] dy,
               double[::1] v, double beta, Py_ssize_t n1,
               double complex[:, ::1] g, double complex[:, ::1] w,
               bint interaction) noexcept nogil:
    cdef Py_ssize_t N = y.shape[0]
    cdef Py_ssize_t M = y.shape[1]
    cdef Py_ssize_t n2 = N - n1
    cdef Py_ssize_t j, k, c
    cdef double th
    cdef double complex acc, wjk
    cdef double complex mi = -1j

    if interaction:
        for j in range(n1):
            for k in range(n2):
                th = (v[j] - v[n1 + k]) * t - 0.5 * beta * t * t
                w[j, k] = g[j, k] * (cos(th) + 1j * sin(th))
    else:
        for j in range(n1):
            for k in range(n2):
                w[j, k] = g[j, k]

    for c in range(M):
        for j in range(n1):
            acc = 0
            for k in range(n2):
                acc = acc + w[j, k] * y[n1 + k, c]
            if not interaction:
                acc = acc + v[j] * y[j, c]
            dy[j, c] = mi * acc
        for k in range(n2):
            acc = 0
            for j in range(n1):
                wjk = w[j, k]
                acc = acc + wjk.conjugate() * y[j, c]
            if not interaction:
                acc = acc + (v[n1 + k] + beta * t) * y[n1 + k, c]
            dy[n1 + k, c] = mi * acc


def dop853(y0, double t0, double t1, v, double beta, Py_ssize_t n1, g,
           bint interaction, double rtol, double atol, double max_step,
           double h0, long max_steps):
    """Propagate ``y0`` from ``t0`` to ``t1``.

    Returns ``(y, n_accepted, n_rejected, n_rhs, status)``.
    """
    cdef double complex[:, ::1] y = np.array(y0, dtype=np.complex128, order="C", copy=True)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double complex[:, ::1] gg = np.ascontiguousarray(g, dtype=np.complex128)
    cdef Py_ssize_t N = y.shape[0]
    cdef Py_ssize_t M = y.shape[1]
    cdef double complex[:, :, ::1] K = np.empty((NS + 1, N, M), dtype=np.complex128)
    cdef double complex[:, ::1] ytmp = np.empty((N, M), dtype=np.complex128)
    cdef double complex[:, ::1] ynew = np.empty((N, M), dtype=np.complex128)
    cdef double complex[:, ::1] w = np.empty((n1, N - n1), dtype=np.complex128)

    cdef double direction = 1.0 if t1 >= t0 else -1.0
    cdef double t = t0
    cdef double t_new, h, h_abs, min_step, err, e5, e3, sc, a, b, factor
    cdef double complex acc, s5, s3
    cdef long naccept = 0, nreject = 0, nfev = 1
    cdef int status = 0
    cdef bint rejected
    cdef Py_ssize_t s, r, i, c
    cdef double size = <double>(N * M)

    h_abs = h0
    if max_step < h_abs:
        h_abs = max_step
    if fabs(t1 - t0) < h_abs:
        h_abs = fabs(t1 - t0)

    with nogil:
        _rhs(t, y, K[0], vv, beta, n1, gg, w, interaction)
        while direction * (t - t1) < 0:
            min_step = 10 * fabs(nextafter(t, direction * INFINITY) - t)
            if h_abs > max_step:
                h_abs = max_step
            if h_abs < min_step:
                h_abs = min_step
            rejected = False
            while True:
                if h_abs < min_step:
                    status = 1
                    break
                t_new = t + direction * h_abs
                if direction * (t_new - t1) > 0:
                    t_new = t1
                h = t_new - t
                h_abs = fabs(h)

                for s in range(1, NS):
                    for i in range(N):
                        for c in range(M):
                            acc = 0
                            for r in range(s):
                                if _A[s][r] != 0.0:
                                    acc = acc + _A[s][r] * K[r, i, c]
                            ytmp[i, c] = y[i, c] + h * acc
                    _rhs(t + _C[s] * h, ytmp, K[s], vv, beta, n1, gg, w, interaction)
                for i in range(N):
                    for c in range(M):
                        acc = 0
                        for r in range(NS):
                            if _B[r] != 0.0:
                                acc = acc + _B[r] * K[r, i, c]
                        ynew[i, c] = y[i, c] + h * acc
                _rhs(t + h, ynew, K[NS], vv, beta, n1, gg, w, interaction)
                nfev += NS

                e5 = 0.0
                e3 = 0.0
                for i in range(N):
                    for c in range(M):
                        a = sqrt(_abs2(y[i, c]))
                        b = sqrt(_abs2(ynew[i, c]))
                        sc = atol + rtol * (a if a > b else b)
                        s5 = 0
                        s3 = 0
                        for r in range(NS):
                            s5 = s5 + _E5[r] * K[r, i, c]
                            s3 = s3 + _E3[r] * K[r, i, c]
                        e5 += _abs2(s5) / (sc * sc)
                        e3 += _abs2(s3) / (sc * sc)
                if e5 == 0.0 and e3 == 0.0:
                    err = 0.0
                else:
                    err = h_abs * e5 / sqrt((e5 + 0.01 * e3) * size)

                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = SAFETY * pow(err, ERR_EXP)
                        if factor > MAX_FACTOR:
                            factor = MAX_FACTOR
                    if rejected and factor > 1.0:
                        factor = 1.0
                    h_abs *= factor
                    t = t_new
                    for i in range(N):
                        for c in range(M):
                            y[i, c] = ynew[i, c]
                            K[0, i, c] = K[NS, i, c]
                    naccept += 1
                    break
                factor = SAFETY * pow(err, ERR_EXP)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h_abs *= factor
                rejected = True
                nreject += 1

            if status != 0:
                break
            if naccept >= max_steps and direction * (t - t1) < 0:
                status = 2
                break

    return np.asarray(y), naccept, nreject, nfev, status
