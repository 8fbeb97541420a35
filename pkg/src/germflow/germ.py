"""Exact sparse multivariate polynomials over the rationals.

Polynomials are stored as a sparse map from exponent multi-indices to
``Fraction`` coefficients, so differentiation and ideal products are exact.
Rounding to double precision happens only at evaluation time. ``PolyGerm``
is the subtype constrained to vanish at the origin (zero constant term);
derivatives generally do not vanish there and come back as plain ``Poly``.

Variables are named ``x1 .. xn``. The text format is a sum of terms, each an
optional decimal or rational coefficient followed by ``*``-separated variable
powers, e.g. ``"x1^2 + 1/4*x1^3"`` or ``"x1*x2 - 0.5*x2^2"``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Coefficient = Union[int, Fraction]


class ParseError(ValueError):
    """Syntax error in the polynomial text format; carries the offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class GermConstraintError(ValueError):
    """Raised for polynomials that violate the germ condition f(0) = 0."""


class MultiIndex(tuple):
    """Exponent/derivative tuple in N0^n."""

    def __new__(cls, exponents: Iterable[int]):
        exps = tuple(exponents)
        for e in exps:
            if not isinstance(e, int) or e < 0:
                raise ValueError(f"multi-index entries must be nonnegative integers, got {e!r}")
        return super().__new__(cls, exps)

    def order(self) -> int:
        return sum(self)


def _grlex_key(m):
    # graded lexicographic: by total order, then lexicographically with the
    # leading variable dominant (x1^2 before x1*x2 before x2^2)
    return (sum(m), tuple(-e for e in m))


def _ipow(base: float, exp: int) -> float:
    # repeated multiplication; the compiled kernels use the same loop so the
    # two evaluation paths agree bit for bit
    r = base
    for _ in range(exp - 1):
        r *= base
    return r


class Poly:
    """Sparse polynomial in x1..xn with exact rational coefficients.

    Immutable after construction: ``terms`` is canonical (no zero
    coefficients, graded-lex key order), so equality is plain map equality.
    """

    __slots__ = ("n", "terms", "_float_cache", "_hash")

    def __init__(self, n: int, terms: Mapping[Sequence[int], Coefficient] = ()):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        canonical = {}
        for m, c in dict(terms).items():
            m = MultiIndex(m)
            if len(m) != n:
                raise ValueError(f"multi-index {tuple(m)} has length {len(m)}, expected {n}")
            c = Fraction(c)
            if c:
                canonical[m] = canonical.get(m, Fraction(0)) + c
        object.__setattr__(self, "n", n)
        object.__setattr__(
            self, "terms", {m: canonical[m] for m in sorted(canonical, key=_grlex_key) if canonical[m]}
        )
        object.__setattr__(self, "_float_cache", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, c: Coefficient) -> "Poly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, n: int, exponents: Sequence[int], c: Coefficient = 1) -> "Poly":
        return cls(n, {tuple(exponents): c})

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get(MultiIndex((0,) * self.n), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((m.order() for m in self.terms), default=-1)

    def coefficient_norm(self) -> Fraction:
        """Sum of |coefficients|; bounds |p| on the closed unit ball."""
        return sum((abs(c) for c in self.terms.values()), Fraction(0))

    # -- arithmetic (exact) ------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.n, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        merged = dict(self.terms)
        for m, c in other.terms.items():
            merged[m] = merged.get(m, Fraction(0)) + c
        return Poly(self.n, merged)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        prod: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                prod[key] = prod.get(key, Fraction(0)) + c1 * c2
        return Poly(self.n, prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.constant(self.n, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n, frozenset(self.terms.items()))))
        return self._hash

    # -- calculus ----------------------------------------------------------

    def partial(self, m: Sequence[int]) -> "Poly":
        """Exact mixed partial d^|m| p / dx^m."""
        m = MultiIndex(m)
        if len(m) != self.n:
            raise ValueError(f"derivative multi-index has length {len(m)}, expected {self.n}")
        out: dict = {}
        for e, c in self.terms.items():
            if any(ei < mi for ei, mi in zip(e, m)):
                continue
            factor = 1
            for ei, mi in zip(e, m):
                for j in range(mi):
                    factor *= ei - j
            out[tuple(ei - mi for ei, mi in zip(e, m))] = c * factor
        return Poly(self.n, out)

    def gradient(self) -> list:
        """First partials (dp/dx1, ..., dp/dxn)."""
        basis = [[0] * self.n for _ in range(self.n)]
        for i in range(self.n):
            basis[i][i] = 1
        return [self.partial(b) for b in basis]

    # -- evaluation --------------------------------------------------------

    def float_terms(self):
        """Terms as (double coefficient, exponent tuple), canonical order."""
        if self._float_cache is None:
            object.__setattr__(
                self, "_float_cache", tuple((float(c), tuple(m)) for m, c in self.terms.items())
            )
        return self._float_cache

    def evaluate(self, x: Sequence[float]) -> float:
        """Evaluate at x in double precision (coefficients rounded at the leaf)."""
        if len(x) != self.n:
            raise ValueError(f"point has length {len(x)}, expected {self.n}")
        xs = [float(v) for v in x]
        total = 0.0
        for c, m in self.float_terms():
            t = c
            for i, e in enumerate(m):
                if e:
                    t *= _ipow(xs[i], e)
            total += t
        return total

    __call__ = evaluate

    # -- text format -------------------------------------------------------

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"{type(self).__name__}({self.n}, {serialize(self)!r})"


class PolyGerm(Poly):
    """Polynomial germ (R^n,0) -> (R,0): a Poly with zero constant term."""

    __slots__ = ()

    def __init__(self, n: int, terms: Mapping[Sequence[int], Coefficient] = ()):
        super().__init__(n, terms)
        if self.constant_term():
            raise GermConstraintError("constant term must be 0")

    @classmethod
    def from_poly(cls, p: Poly) -> "PolyGerm":
        return cls(p.n, p.terms)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?|\.\d+)|(?P<var>x\d+)|(?P<op>[+\-*/^]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if not rest.strip():
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "var":
            tokens.append(("var", m.group("var"), m.start("var")))
        else:
            tokens.append((m.group("op"), m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}" if tok[0] else f"expected {kind!r}", tok[2])
        return tok

    def parse(self) -> Poly:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        terms: dict = {}
        sign = 1
        kind, _, pos = self.peek()
        if kind in ("+", "-"):
            self.next()
            sign = -1 if kind == "-" else 1
        while True:
            coeff, exps = self.term()
            key = tuple(exps)
            terms[key] = terms.get(key, Fraction(0)) + sign * coeff
            kind, text, pos = self.peek()
            if kind is None:
                break
            if kind not in ("+", "-"):
                raise ParseError(f"expected '+' or '-', found {text!r}", pos)
            self.next()
            sign = -1 if kind == "-" else 1
        return Poly(self.n, terms)

    def term(self):
        coeff = Fraction(1)
        exps = [0] * self.n
        kind, text, pos = self.peek()
        if kind == "num":
            self.next()
            coeff = Fraction(text)
            if self.peek()[0] == "/":
                self.next()
                dtok = self.expect("num")
                if "." in text or "." in dtok[1]:
                    raise ParseError("rational coefficients must be integer/integer", dtok[2])
                denom = int(dtok[1])
                if denom == 0:
                    raise ParseError("zero denominator", dtok[2])
                coeff = Fraction(int(text), denom)
            if self.peek()[0] == "*":
                self.next()
                self.power(exps)
            else:
                return coeff, exps  # bare constant
        elif kind == "var":
            self.power(exps)
        else:
            raise ParseError(f"expected a term, found {text!r}" if kind else "expected a term", pos)
        while self.peek()[0] == "*":
            self.next()
            self.power(exps)
        return coeff, exps

    def power(self, exps):
        tok = self.expect("var")
        idx = int(tok[1][1:])
        if idx < 1 or idx > self.n:
            raise ParseError(f"variable index {idx} exceeds dimension {self.n}", tok[2])
        e = 1
        if self.peek()[0] == "^":
            self.next()
            etok = self.expect("num")
            if "." in etok[1]:
                raise ParseError("exponent must be a positive integer", etok[2])
            e = int(etok[1])
            if e < 1:
                raise ParseError("exponent must be a positive integer", etok[2])
        exps[idx - 1] += e


def parse_poly(text: str, n: int) -> Poly:
    """Parse the text format into a general polynomial (constant term allowed)."""
    return _Parser(text, n).parse()


def parse(text: str, n: int) -> PolyGerm:
    """Parse the text format into a PolyGerm; rejects a nonzero constant term."""
    return PolyGerm.from_poly(parse_poly(text, n))


def serialize(p: Poly) -> str:
    """Canonical text form, terms in graded-lexicographic order."""
    if not p.terms:
        return "0"
    parts = []
    for m, c in p.terms.items():
        mono = "*".join(
            f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(m) if e
        )
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        parts.append((c < 0, body))
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out
