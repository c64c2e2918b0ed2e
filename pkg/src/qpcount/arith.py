"""Exact univariate polynomial arithmetic over the integers and rationals.

Coefficients are Python ints or fractions.Fraction; there is no floating
point anywhere in the package.  A polynomial is a dense coefficient tuple,
``coeffs[i]`` being the coefficient of ``t**i``; the zero polynomial is the
empty tuple and has degree -1.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

from . import parsing
from .errors import ParseError, PolyDivisionByZero

Rational = Fraction


def _norm_coeff(c):
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return int(c)
        return c
    return int(c)


@dataclasses.dataclass(init=False, frozen=True)
class Poly:
    """Dense univariate polynomial with exact int/Fraction coefficients."""

    coeffs: tuple

    def __init__(self, coeffs=()):
        cs = [_norm_coeff(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @staticmethod
    def const(c) -> Poly:
        return Poly((c,))

    @staticmethod
    def var() -> Poly:
        return Poly((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def constant_value(self):
        """Value of a degree <= 0 polynomial."""
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.coeffs[0] if self.coeffs else 0

    def leading(self):
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __call__(self, x):
        """Evaluate by Horner; x may be an int, Fraction or another Poly."""
        if isinstance(x, Poly):
            acc = Poly()
            for c in reversed(self.coeffs):
                acc = acc * x + Poly.const(c)
            return acc
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        return Poly(a + b for a, b in
                    itertools.zip_longest(self.coeffs, other.coeffs, fillvalue=0))

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        return Poly(a - b for a, b in
                    itertools.zip_longest(self.coeffs, other.coeffs, fillvalue=0))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Poly((1,))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    def scale_denominators(self) -> tuple[Poly, int]:
        """Return (integer-coefficient polynomial, d) with self = poly / d."""
        d = denominator_lcm(self)
        return Poly(c * d for c in self.coeffs), d


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly((x,))
    raise TypeError(f"cannot coerce {x!r} to Poly")


def poly_divmod(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Exact rational division: f = q*g + r with deg r < deg g."""
    if g.is_zero():
        raise PolyDivisionByZero("polynomial division by the zero polynomial")
    q = [Fraction(0)] * max(0, f.degree - g.degree + 1)
    rem = list(f.coeffs)
    glead = Fraction(g.leading())
    gdeg = g.degree
    for k in range(len(rem) - 1 - gdeg, -1, -1):
        c = Fraction(rem[k + gdeg]) / glead
        if c:
            q[k] = c
            for i, gc in enumerate(g.coeffs):
                rem[k + i] -= c * gc
    return Poly(q), Poly(rem[:gdeg] if gdeg > 0 else ())


def poly_substitute_affine(f: Poly, m: int, r: int) -> Poly:
    """Return g with g(u) = f(m*u + r) identically; requires m >= 1."""
    if m < 1:
        raise ValueError("substitution stride must be >= 1")
    return f(Poly((r, m)))


def denominator_lcm(f: Poly) -> int:
    out = 1
    for c in f.coeffs:
        if isinstance(c, Fraction):
            out = out * c.denominator // math.gcd(out, c.denominator)
    return out


def is_integer_valued(f: Poly) -> bool:
    """True iff f maps every integer to an integer.

    Integrality at deg+1 consecutive integers certifies integrality
    everywhere (Newton forward differences in the binomial basis).
    """
    return all(Fraction(f(k)).denominator == 1 for k in range(f.degree + 1)) \
        if f.coeffs else True


def _sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def eventual_sign(p: Poly) -> tuple[int, int]:
    """Sign of p(t) for all large integer t, with the least onset.

    Returns (sign, threshold): sign(p(t)) == sign for every integer
    t >= threshold, and threshold is the least such nonnegative integer.
    Uses the Cauchy root bound 1 + max |a_i / a_n| and scans downward.
    """
    if p.is_zero():
        return 0, 0
    lead = p.leading()
    s = _sign(lead)
    if p.is_constant():
        return s, 0
    bound = 1 + max(abs(Fraction(c) / lead) for c in p.coeffs[:-1])
    thr = max(0, math.ceil(bound))
    while thr > 0 and _sign(p(thr - 1)) == s:
        thr -= 1
    return s, thr


# --- text form -------------------------------------------------------------
#
# The canonical rendering lists monomials by descending power with exact
# fraction coefficients, e.g. "1/6*t^2 + 5/6*t + 1".

def format_coeff(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly, var: str = "t") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i in range(p.degree, -1, -1):
        c = p.coeffs[i]
        if c == 0:
            continue
        mag = abs(Fraction(c))
        if i == 0:
            body = format_coeff(mag)
        else:
            tpow = var if i == 1 else f"{var}^{i}"
            body = tpow if mag == 1 else f"{format_coeff(mag)}*{tpow}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


def parse_poly(text: str, var: str | None = None) -> Poly:
    """Parse a univariate polynomial; `var` pins the allowed variable name."""
    mm = parsing.parse_expression_text(text)
    coeffs: dict[int, Fraction] = {}
    seen = None
    for mono, c in mm.items():
        if not mono:
            coeffs[0] = coeffs.get(0, Fraction(0)) + c
            continue
        if len(mono) > 1:
            raise ParseError(f"expected a univariate polynomial, found {text!r}")
        name, exp = mono[0]
        if var is not None and name != var:
            raise ParseError(f"unexpected variable {name!r} (expected {var!r})")
        if seen is not None and name != seen:
            raise ParseError(f"mixed variables {seen!r} and {name!r} in polynomial")
        seen = name
        coeffs[exp] = coeffs.get(exp, Fraction(0)) + c
    if not coeffs:
        return Poly()
    out = [Fraction(0)] * (max(coeffs) + 1)
    for exp, c in coeffs.items():
        out[exp] = c
    return Poly(out)


def parse_int_poly(text: str, var: str | None = None) -> Poly:
    p = parse_poly(text, var)
    if not p.is_integral():
        raise ParseError(f"expected integer coefficients in {text!r}")
    return p


def lcm(a: int, b: int) -> int:
    return abs(a * b) // math.gcd(a, b) if a and b else 0


def interpolate(points) -> Poly:
    """Exact Newton interpolation through (x, y) pairs with distinct x."""
    pts = list(points)
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    divdiff = [Fraction(y) for _, y in pts]
    for k in range(1, len(pts)):
        for i in range(len(pts) - 1, k - 1, -1):
            divdiff[i] = (divdiff[i] - divdiff[i - 1]) / (xs[i] - xs[i - k])
    out = Poly()
    basis = Poly((1,))
    for k, c in enumerate(divdiff):
        out = out + basis * c
        basis = basis * Poly((-xs[k], 1))
    return out
