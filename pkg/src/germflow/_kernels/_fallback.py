"""Pure-Python kernel backend.

Mirrors the compiled backend operation for operation (same term order, same
repeated-multiplication powers, same accumulation order), so results are
bit-identical between the two; the extension only buys speed.
"""

from __future__ import annotations

from math import sqrt

from .table import STATUS_IN_ZERO_SET, STATUS_INCONSISTENT, STATUS_OK, STATUS_POLE

NAME = "fallback"


def _ipow(base, exp):
    r = base
    for _ in range(exp - 1):
        r *= base
    return r


def _eval(terms, x):
    total = 0.0
    for c, m in terms:
        t = c
        for i, e in enumerate(m):
            if e:
                t *= _ipow(x[i], e)
        total += t
    return total


def poly_value(table, idx, x):
    """Value of polynomial slot ``idx`` at x."""
    return _eval(table.python_terms()[idx], x)


def homotopy_value(table, xi, x):
    """F(xi, x) = f(x) + xi * d(x)."""
    terms = table.python_terms()
    return _eval(terms[0], x) + xi * _eval(terms[1], x)


def homotopy_gradient(table, xi, x, out):
    """Full (n+1)-gradient of F: (d(x), grad f + xi * grad d) into out."""
    terms = table.python_terms()
    n = table.n
    out[0] = _eval(terms[1], x)
    for i in range(n):
        out[1 + i] = _eval(terms[2 + i], x) + xi * _eval(terms[2 + n + i], x)


def moser_field(table, xi, x, out):
    """Gradient-projection field (d/|grad F|^2) * grad F into out[n+1].

    out is zeroed on every non-OK status.
    """
    terms = table.python_terms()
    n = table.n
    g2 = 0.0
    gf = [0.0] * n
    for i in range(n):
        v = _eval(terms[2 + i], x)
        gf[i] = v
        g2 += v * v
    if sqrt(g2) < table.eps_z:
        for i in range(n + 1):
            out[i] = 0.0
        return STATUS_IN_ZERO_SET
    dval = _eval(terms[1], x)
    s = dval * dval
    fg = [0.0] * n
    for i in range(n):
        v = gf[i] + xi * _eval(terms[2 + n + i], x)
        fg[i] = v
        s += v * v
    if sqrt(s) < table.eps_z:
        for i in range(n + 1):
            out[i] = 0.0
        return STATUS_INCONSISTENT
    if dval == 0.0:
        for i in range(n + 1):
            out[i] = 0.0
        return STATUS_OK
    q = dval / s
    out[0] = q * dval
    for i in range(n):
        out[1 + i] = q * fg[i]
    return STATUS_OK


def transport_field(table, xi, x, out):
    """Spatial transport field (X_2..X_{n+1}) / (X_1 - 1) into out[n].

    out is zeroed on every non-OK status.
    """
    terms = table.python_terms()
    n = table.n
    g2 = 0.0
    gf = [0.0] * n
    for i in range(n):
        v = _eval(terms[2 + i], x)
        gf[i] = v
        g2 += v * v
    if sqrt(g2) < table.eps_z:
        for i in range(n):
            out[i] = 0.0
        return STATUS_IN_ZERO_SET
    dval = _eval(terms[1], x)
    s = dval * dval
    fg = [0.0] * n
    for i in range(n):
        v = gf[i] + xi * _eval(terms[2 + n + i], x)
        fg[i] = v
        s += v * v
    if sqrt(s) < table.eps_z:
        for i in range(n):
            out[i] = 0.0
        return STATUS_INCONSISTENT
    if dval == 0.0:
        for i in range(n):
            out[i] = 0.0
        return STATUS_OK
    q = dval / s
    x1 = q * dval
    den = x1 - 1.0
    if -0.5 <= den <= 0.5:
        for i in range(n):
            out[i] = 0.0
        return STATUS_POLE
    for i in range(n):
        out[i] = (q * fg[i]) / den
    return STATUS_OK
