"""Quasi-polynomials, eventual quasi-polynomials and piecewise variants.

A quasi-polynomial of period s keeps one polynomial constituent per residue
class mod s.  An EQP additionally carries an onset threshold and a finite
exception table for the small arguments where the quasi-polynomial law does
not yet hold.  Multivariate piecewise quasi-polynomials (chambers x cosets x
polynomials) are verify-only: this module evaluates and checks them, it does
not discover chamber decompositions.

The two symbolic constructors here are the keystones of everything
parametric:

* ``poly_floor_div`` builds floor(f(t)/g(t)) as an EQP and certifies it via
  sign stabilization, never by sampling alone.
* ``eqp_gcd`` runs the Euclidean algorithm on residue-class work items,
  consuming certified floor divisions, and reassembles the class results.
"""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

from . import parsing
from .arith import (
    Poly,
    denominator_lcm,
    eventual_sign,
    format_coeff,
    format_poly,
    interpolate,
    is_integer_valued,
    lcm,
    poly_divmod,
    poly_substitute_affine,
)
from .errors import (
    AmbiguousPiece,
    FitFailed,
    NonterminationGuard,
    NotCovered,
    PolyDivisionByZero,
    QpcountError,
    ZeroDivisorAt,
)


@dataclasses.dataclass(frozen=True, eq=False)
class QuasiPolynomial:
    """Period s and one constituent polynomial per residue class mod s."""

    period: int
    constituents: tuple
    integer_valued: bool = False

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be >= 1")
        object.__setattr__(self, "constituents", tuple(self.constituents))
        if len(self.constituents) != self.period:
            raise ValueError("need exactly one constituent per residue class")
        if self.integer_valued and not self._integrality_witness():
            raise ValueError("integer_valued flag set without an integrality witness")

    def _integrality_witness(self) -> bool:
        # Integrality at deg+1 consecutive members of each class certifies
        # integrality on the whole class.
        return all(
            is_integer_valued(poly_substitute_affine_rational(c, self.period, r))
            for r, c in enumerate(self.constituents)
        )

    @staticmethod
    def constant(c) -> "QuasiPolynomial":
        return QuasiPolynomial(1, (Poly((c,)),))

    @staticmethod
    def from_poly(p: Poly) -> "QuasiPolynomial":
        return QuasiPolynomial(1, (p,))

    def eval(self, t: int):
        return self.constituents[t % self.period](t)

    def canonicalize(self) -> "QuasiPolynomial":
        """Pointwise-equal form with the smallest period dividing this one."""
        for d in range(1, self.period + 1):
            if self.period % d:
                continue
            if all(self.constituents[i] == self.constituents[i % d]
                   for i in range(self.period)):
                if d == self.period:
                    return self
                return QuasiPolynomial(d, self.constituents[:d], self.integer_valued)
        raise AssertionError("unreachable: period divides itself")

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.constituents)

    def __eq__(self, other):
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        a, b = self.canonicalize(), other.canonicalize()
        return a.period == b.period and a.constituents == b.constituents

    def __hash__(self):
        c = self.canonicalize()
        return hash((c.period, c.constituents))

    def __repr__(self):
        body = ", ".join(format_poly(c) for c in self.constituents)
        return f"QuasiPolynomial(period={self.period}, [{body}])"


def poly_substitute_affine_rational(f: Poly, m: int, r: int) -> Poly:
    """f(m*u + r) for rational-coefficient f (stride m >= 1)."""
    if m < 1:
        raise ValueError("substitution stride must be >= 1")
    return f(Poly((r, m)))


def qp_eval(q: QuasiPolynomial, t: int):
    return q.eval(t)


def qp_add(a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    s = lcm(a.period, b.period)
    parts = tuple(a.constituents[i % a.period] + b.constituents[i % b.period]
                  for i in range(s))
    return QuasiPolynomial(s, parts, a.integer_valued and b.integer_valued)


def qp_mul(a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    s = lcm(a.period, b.period)
    parts = tuple(a.constituents[i % a.period] * b.constituents[i % b.period]
                  for i in range(s))
    return QuasiPolynomial(s, parts, a.integer_valued and b.integer_valued)


def qp_binary(op: str, a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    if op == "add":
        return qp_add(a, b)
    if op == "mul":
        return qp_mul(a, b)
    raise ValueError(f"unknown op {op!r}")


def qp_canonicalize(q: QuasiPolynomial) -> QuasiPolynomial:
    return q.canonicalize()


@dataclasses.dataclass(frozen=True, eq=False)
class EQP:
    """A quasi-polynomial valid from ``threshold`` on, with tabulated
    exceptions below it.

    Evaluation on the one-parameter domain t >= 1: exception entries win,
    everything else from ``threshold`` up follows the quasi-polynomial.
    An exception value of None marks an argument where the underlying
    operation is undefined (e.g. a vanishing divisor).
    """

    qp: QuasiPolynomial
    threshold: int
    exceptions: dict

    def eval(self, t: int):
        if t in self.exceptions:
            v = self.exceptions[t]
            if v is None:
                raise ZeroDivisorAt(t)
            return v
        if t >= self.threshold:
            return self.qp.eval(t)
        raise QpcountError(
            f"EQP undefined at t = {t}: below threshold {self.threshold} "
            "with no exception entry")

    def normalized(self) -> "EQP":
        """Drop exceptions that agree with the QP; tighten the threshold."""
        exc = {t: v for t, v in self.exceptions.items()
               if v is None or v != self.qp.eval(t)}
        thr = max([1] + [t + 1 for t in exc])
        return EQP(self.qp.canonicalize(), thr, exc)

    def __eq__(self, other):
        if not isinstance(other, EQP):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return (a.qp == b.qp and a.threshold == b.threshold
                and a.exceptions == b.exceptions)

    def __repr__(self):
        return (f"EQP({self.qp!r}, threshold={self.threshold}, "
                f"exceptions={dict(sorted(self.exceptions.items()))})")


def _floor_frac(x) -> int:
    return math.floor(Fraction(x))


def _scan_exceptions(eval_below, qp: QuasiPolynomial, start: int) -> EQP:
    """Least-threshold EQP: compare qp against eval_below on [1, start)."""
    exceptions = {}
    for t in range(1, start):
        v = eval_below(t)
        if v is None or v != qp.eval(t):
            exceptions[t] = v
    threshold = max([1] + [t + 1 for t in exceptions])
    return EQP(qp, threshold, exceptions)


def poly_floor_div(f: Poly, g: Poly, max_period: int = 360) -> EQP:
    """floor(f(t)/g(t)) as a certified EQP on t >= 1.

    Pipeline: normalize g to be eventually positive; sample the floor
    oracle beyond a symbolically derived stabilization onset; fit one
    candidate constituent per residue class; certify each class by
    eventual-sign checks of g*p <= f < g*(p+1); then scan downward for the
    least threshold, tabulating mismatches (and vanishing-divisor points)
    as exceptions.
    """
    if g.is_zero():
        raise PolyDivisionByZero("floor division by the zero polynomial")
    sg, _ = eventual_sign(g)
    if sg < 0:
        f, g = -f, -g

    q, rem = poly_divmod(f, g)
    s_q = max(denominator_lcm(q), 1)

    # Onset past which floor(f/g) follows its eventual quasi-polynomial:
    # g > 0, sign(rem) settled, and |rem/g| < 1/s_q so the fractional part
    # of q can no longer be crossed.
    thresholds = [eventual_sign(g)[1]]
    if not rem.is_zero():
        thresholds.append(eventual_sign(rem)[1])
        for probe in (g - rem * s_q, g + rem * s_q):
            sign, thr = eventual_sign(probe)
            if sign != 1:  # impossible since deg rem < deg g
                raise AssertionError("remainder does not vanish relative to divisor")
            thresholds.append(thr)
    t_safe = max(1, *thresholds)

    def oracle(t: int):
        gv = g(t)
        if gv == 0:
            return None
        return _floor_frac(Fraction(f(t)) / Fraction(gv))

    degree = max(f.degree - g.degree, 0)
    for s in _divisors(s_q):
        if s > max_period:
            break
        fitted = _fit_and_certify_floor(f, g, s, degree, t_safe, oracle)
        if fitted is not None:
            qp, t_cert = fitted
            return _scan_exceptions(oracle, qp, max(t_cert, 1)).normalized()
    raise FitFailed(
        f"no period <= {max_period} certifies floor({format_poly(f)})/({format_poly(g)})")


def _fit_and_certify_floor(f, g, s, degree, t_safe, oracle):
    constituents = [None] * s
    t_cert = 1
    for r in range(s):
        t0 = t_safe + (r - t_safe) % s
        pts = [(t0 + k * s, oracle(t0 + k * s)) for k in range(degree + 1)]
        p = interpolate(pts)
        cls = _certify_floor_class(f, g, p, s, r)
        if cls is None:
            return None
        constituents[r] = p
        t_cert = max(t_cert, cls)
    return QuasiPolynomial(s, tuple(constituents), integer_valued=True), t_cert


def _certify_floor_class(f, g, p, s, r):
    """Certified onset t on the class t = s*u + r, or None if p is wrong.

    Requires, eventually in u: g > 0, g*p <= f (sign 0 or +1) and
    g*(p+1) - f > 0; together with integrality of p on the class these
    force p = floor(f/g).
    """
    sigma = Poly((r, s))
    fu, gu, pu = f(sigma), g(sigma), p(sigma)
    if not is_integer_valued(pu):
        return None
    s_low, u_low = eventual_sign(fu - gu * pu)
    if s_low not in (0, 1):
        return None
    s_high, u_high = eventual_sign(gu * (pu + 1) - fu)
    if s_high != 1:
        return None
    s_g, u_g = eventual_sign(gu)
    if s_g != 1:
        return None
    return s * max(u_low, u_high, u_g) + r


def _divisors(n: int):
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def eqp_gcd(f: Poly, g: Poly, max_period: int = 360, max_depth: int = 64) -> EQP:
    """gcd(|f(t)|, |g(t)|) as an EQP, by residue-splitting Euclid.

    Work items are (m, r, a, b): on the class t = m*u + r the running pair
    of integer-valued polynomials in u has gcd(|a(u)|, |b(u)|) equal to the
    answer.  Items reduce by certified floor division until the second
    entry is zero (emit |a|) or a nonzero constant c (split the class by
    u mod c * denominator-lcm and emit a constant per subclass).
    """
    if f.is_zero() and g.is_zero():
        raise QpcountError("gcd(0, 0) is undefined")
    for p in (f, g):
        if not is_integer_valued(p):
            raise ValueError(f"{format_poly(p)} is not integer-valued")

    leaves = []  # (modulus m, residue r, gcd polynomial in u, threshold in u)
    work = [(1, 0, f, g, 0)]
    while work:
        m, r, a, b, depth = work.pop()
        if depth > max_depth:
            raise NonterminationGuard(
                f"Euclidean recursion exceeded depth {max_depth}")
        if eventual_sign(a)[0] < 0:
            a = -a
        if eventual_sign(b)[0] < 0:
            b = -b
        if b.is_zero():
            if a.is_zero():
                raise QpcountError(
                    f"gcd(0, 0) on the class t = {m}*u + {r}")
            leaves.append((m, r, a, eventual_sign(a)[1]))
            continue
        if b.is_constant():
            c = int(b.constant_value())
            split = c * denominator_lcm(a)
            for rho in range(split):
                val = math.gcd(c, int(a(rho)) % c)
                leaves.append((m * split, m * rho + r, Poly((val,)), 0))
            continue
        if a.degree < b.degree:
            work.append((m, r, b, a, depth + 1))
            continue
        floor_eqp = poly_floor_div(a, b, max_period=max_period)
        s = floor_eqp.qp.period
        for i in range(s):
            a_i = poly_substitute_affine_rational(a, s, i)
            b_i = poly_substitute_affine_rational(b, s, i)
            q_i = poly_substitute_affine_rational(floor_eqp.qp.constituents[i], s, i)
            work.append((m * s, m * i + r, b_i, a_i - b_i * q_i, depth + 1))

    period = 1
    for m, _, _, _ in leaves:
        period = lcm(period, m)
    constituents = [None] * period
    t_start = 1
    for m, r, p, thr_u in leaves:
        p_t = p(Poly((Fraction(-r, m), Fraction(1, m))))
        for rho in range(r % m, period, m):
            constituents[rho] = p_t
        t_start = max(t_start, m * thr_u + r)
    qp = QuasiPolynomial(period, tuple(constituents), integer_valued=True)
    qp = qp.canonicalize()

    def brute(t: int):
        fv, gv = f(t), g(t)
        if fv == 0 and gv == 0:
            return None
        return math.gcd(int(fv), int(gv))

    return _scan_exceptions(brute, qp, t_start).normalized()


# --- multivariate pieces ----------------------------------------------------


@dataclasses.dataclass(frozen=True)
class MPoly:
    """Multivariate polynomial with Fraction coefficients; evaluation only."""

    vars: tuple
    terms: tuple  # sorted ((exponents, Fraction), ...)

    @staticmethod
    def from_monomial_map(mm: parsing.MonomialMap, vars: tuple) -> "MPoly":
        index = {v: i for i, v in enumerate(vars)}
        terms = {}
        for mono, c in mm.items():
            exps = [0] * len(vars)
            for name, e in mono:
                if name not in index:
                    raise QpcountError(f"unknown variable {name!r} in polynomial")
                exps[index[name]] = e
            terms[tuple(exps)] = terms.get(tuple(exps), Fraction(0)) + c
        ordered = tuple(sorted(((e, c) for e, c in terms.items() if c),
                               key=lambda item: (-sum(item[0]), tuple(-x for x in item[0]))))
        return MPoly(tuple(vars), ordered)

    @staticmethod
    def parse(text: str, vars) -> "MPoly":
        return MPoly.from_monomial_map(parsing.parse_expression_text(text), tuple(vars))

    def eval(self, point):
        total = Fraction(0)
        for exps, c in self.terms:
            v = c
            for x, e in zip(point, exps):
                v *= Fraction(x) ** e
            total += v
        return int(total) if total.denominator == 1 else total

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.terms:
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}")
                for v, e in zip(self.vars, exps) if e)
            mag = abs(c)
            if not mono:
                body = format_coeff(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{format_coeff(mag)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"MPoly({self.format()!r})"


@dataclasses.dataclass(frozen=True)
class Chamber:
    """Conjunction of integer inequalities coeffs . t <= bound."""

    inequalities: tuple  # ((coeffs, bound), ...)

    def contains(self, point) -> bool:
        return all(sum(c * x for c, x in zip(coeffs, point)) <= bound
                   for coeffs, bound in self.inequalities)


@dataclasses.dataclass(frozen=True)
class Coset:
    """Rectangular lattice coset: one modulus and residue per parameter."""

    moduli: tuple
    residues: tuple

    def __post_init__(self):
        for m, r in zip(self.moduli, self.residues):
            if m < 1 or not 0 <= r < m:
                raise ValueError(f"bad coset entry residue {r} mod {m}")

    def contains(self, point) -> bool:
        return all(x % m == r
                   for x, m, r in zip(point, self.moduli, self.residues))


@dataclasses.dataclass(frozen=True)
class PQP:
    """Piecewise quasi-polynomial over integer parameter vectors."""

    params: tuple
    pieces: tuple  # ((Chamber, Coset, MPoly), ...)

    def matching_pieces(self, point):
        return [i for i, (chamber, coset, _) in enumerate(self.pieces)
                if chamber.contains(point) and coset.contains(point)]

    def eval(self, point):
        hits = self.matching_pieces(point)
        if not hits:
            raise NotCovered(f"no piece covers {tuple(point)}")
        if len(hits) > 1:
            raise AmbiguousPiece(
                f"pieces {hits} overlap at {tuple(point)}")
        return self.pieces[hits[0]][2].eval(point)

    def validate_partition(self, grid_points) -> None:
        """Check exactly-one-piece coverage on every grid point."""
        for point in grid_points:
            hits = self.matching_pieces(point)
            if not hits:
                raise NotCovered(f"no piece covers {tuple(point)}")
            if len(hits) > 1:
                raise AmbiguousPiece(f"pieces {hits} overlap at {tuple(point)}")


def pqp_eval(p: PQP, point):
    return p.eval(tuple(point))
