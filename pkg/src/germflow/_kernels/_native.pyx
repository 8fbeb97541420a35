# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Operation-for-operation twin of ``_fallback``; compiled with
-ffp-contract=off so accumulation matches the pure-Python path bit for bit.
"""

from libc.math cimport fabs, sqrt
from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

NAME = "native"

DEF S_OK = 0
DEF S_IN_ZERO_SET = 1
DEF S_INCONSISTENT = 2
DEF S_POLE = 3


cdef inline double _ipow(double base, int64_t exp) noexcept nogil:
    cdef double r = base
    cdef int64_t j
    for j in range(exp - 1):
        r *= base
    return r


cdef inline double _eval(const double[::1] coeffs, const int64_t[:, ::1] exps,
                         int64_t lo, int64_t hi, int n,
                         const double* x) noexcept nogil:
    cdef double total = 0.0
    cdef double t
    cdef int64_t k, e
    cdef int i
    for k in range(lo, hi):
        t = coeffs[k]
        for i in range(n):
            e = exps[k, i]
            if e:
                t *= _ipow(x[i], e)
        total += t
    return total


cdef int _field(const double[::1] coeffs, const int64_t[:, ::1] exps,
                const int64_t[::1] offsets, int n, double eps_z,
                double xi, const double* x,
                double* out, bint transport) noexcept nogil:
    # slot layout: 0 = f, 1 = d, 2..2+n-1 = grad f, 2+n..2+2n-1 = grad d
    cdef double g2 = 0.0, s, dval, v, q, x1, den
    cdef int i
    cdef double* gf = <double*> malloc(2 * n * sizeof(double))
    if gf == NULL:
        return -1
    cdef double* fg = gf + n
    for i in range(n):
        v = _eval(coeffs, exps, offsets[2 + i], offsets[3 + i], n, x)
        gf[i] = v
        g2 += v * v
    if sqrt(g2) < eps_z:
        for i in range(n + (0 if transport else 1)):
            out[i] = 0.0
        free(gf)
        return S_IN_ZERO_SET
    dval = _eval(coeffs, exps, offsets[1], offsets[2], n, x)
    s = dval * dval
    for i in range(n):
        v = gf[i] + xi * _eval(coeffs, exps, offsets[2 + n + i], offsets[3 + n + i], n, x)
        fg[i] = v
        s += v * v
    if sqrt(s) < eps_z:
        for i in range(n + (0 if transport else 1)):
            out[i] = 0.0
        free(gf)
        return S_INCONSISTENT
    if dval == 0.0:
        for i in range(n + (0 if transport else 1)):
            out[i] = 0.0
        free(gf)
        return S_OK
    q = dval / s
    if transport:
        x1 = q * dval
        den = x1 - 1.0
        if -0.5 <= den and den <= 0.5:
            for i in range(n):
                out[i] = 0.0
            free(gf)
            return S_POLE
        for i in range(n):
            out[i] = (q * fg[i]) / den
    else:
        out[0] = q * dval
        for i in range(n):
            out[1 + i] = q * fg[i]
    free(gf)
    return S_OK


def poly_value(table, int idx, double[::1] x):
    """Value of polynomial slot ``idx`` at x."""
    cdef const double[::1] coeffs = table.coeffs
    cdef const int64_t[:, ::1] exps = table.exps
    cdef const int64_t[::1] offsets = table.offsets
    cdef int n = table.n
    return _eval(coeffs, exps, offsets[idx], offsets[idx + 1], n, &x[0] if x.shape[0] else NULL)


def homotopy_value(table, double xi, double[::1] x):
    """F(xi, x) = f(x) + xi * d(x)."""
    cdef const double[::1] coeffs = table.coeffs
    cdef const int64_t[:, ::1] exps = table.exps
    cdef const int64_t[::1] offsets = table.offsets
    cdef int n = table.n
    cdef const double* xp = &x[0]
    return _eval(coeffs, exps, offsets[0], offsets[1], n, xp) \
        + xi * _eval(coeffs, exps, offsets[1], offsets[2], n, xp)


def homotopy_gradient(table, double xi, double[::1] x, double[::1] out):
    """Full (n+1)-gradient of F: (d(x), grad f + xi * grad d) into out."""
    cdef const double[::1] coeffs = table.coeffs
    cdef const int64_t[:, ::1] exps = table.exps
    cdef const int64_t[::1] offsets = table.offsets
    cdef int n = table.n
    cdef const double* xp = &x[0]
    cdef int i
    out[0] = _eval(coeffs, exps, offsets[1], offsets[2], n, xp)
    for i in range(n):
        out[1 + i] = _eval(coeffs, exps, offsets[2 + i], offsets[3 + i], n, xp) \
            + xi * _eval(coeffs, exps, offsets[2 + n + i], offsets[3 + n + i], n, xp)


def moser_field(table, double xi, double[::1] x, double[::1] out):
    """Gradient-projection field (d/|grad F|^2) * grad F into out[n+1].

    out is zeroed on every non-OK status.
    """
    return _field(table.coeffs, table.exps, table.offsets, table.n,
                  table.eps_z, xi, &x[0], &out[0], 0)


def transport_field(table, double xi, double[::1] x, double[::1] out):
    """Spatial transport field (X_2..X_{n+1}) / (X_1 - 1) into out[n].

    out is zeroed on every non-OK status.
    """
    return _field(table.coeffs, table.exps, table.offsets, table.n,
                  table.eps_z, xi, &x[0], &out[0], 1)
