"""Independent oracles and hypothesis strategies shared by the test modules.

The oracles deliberately avoid the library's own code paths: root finding
is plain bisection, derivatives come from nested central differences on
the float evaluator only.
"""

from fractions import Fraction

from hypothesis import strategies as st

from germflow import Poly


def bisect(fun, lo: float, hi: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    flo, fhi = fun(lo), fun(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("bisection oracle needs a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# step sizes tuned per derivative order: nested second-order stencils lose
# a factor 1/(2h) of precision per order
_FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 1e-3}


def fd_partial(fun, x, m):
    """Nested central-difference estimate of the mixed partial d^m fun at x."""
    order = sum(m)
    if order == 0:
        return fun(list(x))
    h = _FD_STEPS[min(order, 3)]

    def rec(x, m):
        for i, mi in enumerate(m):
            if mi > 0:
                lower = list(m)
                lower[i] -= 1
                xp = list(x)
                xm = list(x)
                xp[i] += h
                xm[i] -= h
                return (rec(xp, lower) - rec(xm, lower)) / (2.0 * h)
        return fun(list(x))

    return rec(list(x), list(m))


@st.composite
def coefficients(draw) -> Fraction:
    num = draw(st.integers(-8, 8).filter(lambda k: k != 0))
    den = draw(st.integers(1, 8))
    return Fraction(num, den)


@st.composite
def polys(draw, n: int = None, max_degree: int = 4, germ: bool = False) -> Poly:
    if n is None:
        n = draw(st.integers(1, 3))
    n_terms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n_terms):
        m = tuple(draw(st.integers(0, max_degree)) for _ in range(n))
        if sum(m) > max_degree or (germ and sum(m) == 0):
            continue
        terms[m] = draw(coefficients())
    return Poly(n, terms)


@st.composite
def multi_indices(draw, n: int, max_order: int = 3):
    while True:
        m = tuple(draw(st.integers(0, max_order)) for _ in range(n))
        if sum(m) <= max_order:
            return m


@st.composite
def points(draw, n: int, bound: float = 0.5):
    return [
        draw(st.floats(-bound, bound, allow_nan=False, allow_infinity=False, width=32))
        for _ in range(n)
    ]
