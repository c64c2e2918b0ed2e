"""Ground oracle: decide, count, enumerate and optimize over integer
solution sets of formulas at fixed parameter values.

Formulas are grounded, normalized and compiled to a light tuple tree, then
counted by recursive enumeration over derived boxes with constant folding
and an arithmetic fast path for the innermost variable.  Quantified blocks
are decided by finite search over jointly derived bounds, falling back to
an exact interval-plus-residue decision for a single unbounded variable.
Finiteness is never guessed silently: unbounded multivariate sets go
through the doubling probe, which either reports INFINITE or raises.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

from . import cooper
from .arith import Poly, lcm
from .errors import BoxTooLarge, CannotDecideFiniteness, QpcountError
from .formula import (
    And,
    Bool,
    Div,
    Eq,
    Exists,
    Forall,
    Le,
    Not,
    Or,
    ParsedFormula,
    Term,
    fold_constants,
    ground,
    make_and,
    nnf,
)


class _Infinite:
    def __repr__(self):
        return "INFINITE"

    def __eq__(self, other):
        return isinstance(other, _Infinite)

    def __hash__(self):
        return hash("INFINITE")


class _NoMax:
    def __repr__(self):
        return "NO_MAX"

    def __eq__(self, other):
        return isinstance(other, _NoMax)

    def __hash__(self):
        return hash("NO_MAX")


INFINITE = _Infinite()
NO_MAX = _NoMax()


@dataclasses.dataclass(frozen=True)
class Box:
    """Per-variable inclusive integer intervals.  An interval with
    lo > hi certifies that the constraint set is unsatisfiable."""

    intervals: dict  # name -> (lo, hi)


@dataclasses.dataclass(frozen=True)
class Unbounded:
    var: str


@dataclasses.dataclass(frozen=True)
class CountResult:
    cardinality: object  # nonnegative int or INFINITE

    @property
    def empty(self) -> bool:
        return self.cardinality == 0


# --- compiled form -----------------------------------------------------------
#
# ("t",) | ("f",)
# ("le", coeffs, k)      sum(c*x) + k <= 0
# ("eq", coeffs, k)      sum(c*x) + k == 0
# ("div", d, coeffs, k)  d | sum(c*x) + k
# ("and", parts) | ("or", parts)
# ("ex", v, body) | ("fa", v, body)
#
# coeffs is a tuple of (name, int) pairs, sorted by name.

_T = ("t",)
_F = ("f",)


def compile_node(node):
    """Compile a ground NNF formula (no Not nodes) for fast manipulation."""
    if isinstance(node, Bool):
        return _T if node.value else _F
    if isinstance(node, (Le, Eq)):
        gap = node.gap()
        coeffs = tuple((v, c.constant_value()) for v, c in gap.coeffs)
        k = gap.constant.constant_value()
        tag = "le" if isinstance(node, Le) else "eq"
        return _fold_atom((tag, coeffs, k))
    if isinstance(node, Div):
        coeffs = tuple((v, c.constant_value()) for v, c in node.term.coeffs)
        return _fold_atom(("div", node.divisor, coeffs,
                           node.term.constant.constant_value()))
    if isinstance(node, And):
        return _make_and([compile_node(p) for p in node.parts])
    if isinstance(node, Or):
        return _make_or([compile_node(p) for p in node.parts])
    if isinstance(node, Exists):
        return ("ex", node.var, compile_node(node.body))
    if isinstance(node, Forall):
        return ("fa", node.var, compile_node(node.body))
    if isinstance(node, Not):
        raise ValueError("compile_node expects negation normal form")
    raise TypeError(f"not a formula node: {node!r}")


def _fold_atom(ct):
    if ct[0] == "le" and not ct[1]:
        return _T if ct[2] <= 0 else _F
    if ct[0] == "eq" and not ct[1]:
        return _T if ct[2] == 0 else _F
    if ct[0] == "div" and not ct[2]:
        return _T if ct[3] % ct[1] == 0 else _F
    return ct


def _make_and(parts):
    out = []
    for p in parts:
        if p == _F:
            return _F
        if p == _T:
            continue
        if p[0] == "and":
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return _T
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def _make_or(parts):
    out = []
    for p in parts:
        if p == _T:
            return _T
        if p == _F:
            continue
        if p[0] == "or":
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return _F
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def subst(ct, var, value):
    """Substitute an integer for a variable and constant-fold."""
    tag = ct[0]
    if tag in ("t", "f"):
        return ct
    if tag in ("le", "eq"):
        coeffs, k = ct[1], ct[2]
        for v, c in coeffs:
            if v == var:
                new = tuple((u, d) for u, d in coeffs if u != var)
                return _fold_atom((tag, new, k + c * value))
        return ct
    if tag == "div":
        d, coeffs, k = ct[1], ct[2], ct[3]
        for v, c in coeffs:
            if v == var:
                new = tuple((u, e) for u, e in coeffs if u != var)
                return _fold_atom(("div", d, new, k + c * value))
        return ct
    if tag == "and":
        return _make_and([subst(p, var, value) for p in ct[1]])
    if tag == "or":
        return _make_or([subst(p, var, value) for p in ct[1]])
    if tag in ("ex", "fa"):
        body = subst(ct[2], var, value)
        if body in (_T, _F):
            return body
        return (tag, ct[1], body)
    raise AssertionError(f"bad compiled node {ct!r}")


def negate(ct):
    tag = ct[0]
    if tag == "t":
        return _F
    if tag == "f":
        return _T
    if tag == "le":  # not(s + k <= 0)  ->  -s - k + 1 <= 0
        coeffs = tuple((v, -c) for v, c in ct[1])
        return _fold_atom(("le", coeffs, 1 - ct[2]))
    if tag == "eq":
        lt = _fold_atom(("le", ct[1], ct[2] + 1))
        gt = _fold_atom(("le", tuple((v, -c) for v, c in ct[1]), 1 - ct[2]))
        return _make_or([lt, gt])
    if tag == "div":
        d, coeffs, k = ct[1], ct[2], ct[3]
        return _make_or([_fold_atom(("div", d, coeffs, k - j))
                         for j in range(1, d)])
    if tag == "and":
        return _make_or([negate(p) for p in ct[1]])
    if tag == "or":
        return _make_and([negate(p) for p in ct[1]])
    if tag == "ex":
        return ("fa", ct[1], negate(ct[2]))
    if tag == "fa":
        return ("ex", ct[1], negate(ct[2]))
    raise AssertionError(f"bad compiled node {ct!r}")


def ct_vars(ct) -> set:
    tag = ct[0]
    if tag in ("t", "f"):
        return set()
    if tag in ("le", "eq"):
        return {v for v, _ in ct[1]}
    if tag == "div":
        return {v for v, _ in ct[2]}
    if tag in ("and", "or"):
        out = set()
        for p in ct[1]:
            out |= ct_vars(p)
        return out
    if tag in ("ex", "fa"):
        return ct_vars(ct[2]) - {ct[1]}
    raise AssertionError(f"bad compiled node {ct!r}")


def ct_quantifier_free(ct) -> bool:
    tag = ct[0]
    if tag in ("ex", "fa"):
        return False
    if tag in ("and", "or"):
        return all(ct_quantifier_free(p) for p in ct[1])
    return True


# --- bounds ------------------------------------------------------------------

_FM_PASSES = 8


def _floor_div(num: int, den: int) -> int:
    return num // den  # Python floor division is exact floor for ints


def _merge_intersect(a: dict, b: dict) -> dict:
    out = dict(a)
    for v, (lo, hi) in b.items():
        olo, ohi = out.get(v, (None, None))
        lo = olo if lo is None else (lo if olo is None else max(lo, olo))
        hi = ohi if hi is None else (hi if ohi is None else min(hi, ohi))
        out[v] = (lo, hi)
    return out


def _merge_hull(a: dict, b: dict) -> dict:
    out = {}
    for v in set(a) | set(b):
        alo, ahi = a.get(v, (None, None))
        blo, bhi = b.get(v, (None, None))
        lo = None if alo is None or blo is None else min(alo, blo)
        hi = None if ahi is None or bhi is None else max(ahi, bhi)
        out[v] = (lo, hi)
    return out


def _atom_rows(ct):
    """Inequality rows (coeffs, k) meaning sum + k <= 0 from a le/eq atom."""
    if ct[0] == "le":
        return [(ct[1], ct[2])]
    if ct[0] == "eq":
        return [(ct[1], ct[2]), (tuple((v, -c) for v, c in ct[1]), -ct[2])]
    return []


def _bounds_of(ct) -> dict:
    """Per-variable (lo, hi) intervals containing all solutions; None ends
    mean unbounded.  Rational bounds are floored on both ends, which is
    exact on the upper side and conservative on the lower."""
    tag = ct[0]
    if tag in ("t", "f", "div", "ex", "fa"):
        return {}
    if tag in ("le", "eq"):
        out = {}
        for coeffs, k in _atom_rows(ct):
            if len(coeffs) == 1:
                v, c = coeffs[0]
                bound = _floor_div(-k, c) if c > 0 else None
                if c > 0:
                    out = _merge_intersect(out, {v: (None, _floor_div(-k, c))})
                else:
                    out = _merge_intersect(
                        out, {v: (math.floor(Fraction(-k, c)), None)})
        return out
    if tag == "or":
        boxes = [_bounds_of(p) for p in ct[1]]
        out = boxes[0]
        for b in boxes[1:]:
            out = _merge_hull(out, b)
        return out
    if tag == "and":
        out = {}
        rows = []
        for p in ct[1]:
            out = _merge_intersect(out, _bounds_of(p))
            rows.extend(_atom_rows(p) if p[0] in ("le", "eq") else [])
        # Feed interval knowledge from nested structure back in as rows, then
        # refine with Fourier-Motzkin elimination over the conjunct's rows.
        for v, (lo, hi) in out.items():
            if hi is not None:
                rows.append((((v, 1),), -hi))
            if lo is not None:
                rows.append((((v, -1),), lo))
        refined = _fm_bounds(rows)
        return _merge_intersect(out, refined)
    raise AssertionError(f"bad compiled node {ct!r}")


_FM_ROW_LIMIT = 600


def _fm_bounds(rows) -> dict:
    """Exact per-variable bounds of a conjunction of integer rows
    (sum c*x + k <= 0) by Fourier-Motzkin elimination; conservative (gives
    up) past a row-count cap."""
    base = []
    seen = set()
    for coeffs, k in rows:
        d = {}
        for v, c in coeffs:
            d[v] = d.get(v, 0) + c
        g = math.gcd(*[abs(c) for c in d.values()], 0) if d else 0
        vec = tuple(sorted((v, c) for v, c in d.items() if c))
        if g > 1:
            # sum(c/g * x) + ceil(k/g) <= 0 is equivalent over the integers
            vec = tuple((v, c // g) for v, c in vec)
            k = math.ceil(Fraction(k, g))
        row = (vec, k)
        if row not in seen:
            seen.add(row)
            base.append(row)
    variables = sorted({v for vec, _ in base for v, _ in vec})
    out: dict = {}
    for target in variables:
        cur = base
        ok = True
        for v in variables:
            if v == target:
                continue
            pos, neg, rest = [], [], []
            for vec, k in cur:
                c = dict(vec).get(v, 0)
                (pos if c > 0 else neg if c < 0 else rest).append((vec, k))
            if pos and neg:
                for (v1, k1) in pos:
                    c1 = dict(v1)[v]
                    for (v2, k2) in neg:
                        c2 = -dict(v2)[v]
                        combined = {}
                        for u, c in v1:
                            combined[u] = combined.get(u, 0) + c2 * c
                        for u, c in v2:
                            combined[u] = combined.get(u, 0) + c1 * c
                        combined.pop(v, None)
                        kk = c2 * k1 + c1 * k2
                        g = math.gcd(*[abs(c) for c in combined.values()], 0) \
                            if combined else 0
                        vec = tuple(sorted((u, c) for u, c in combined.items() if c))
                        if g > 1:
                            vec = tuple((u, c // g) for u, c in vec)
                            kk = math.ceil(Fraction(kk, g))
                        rest.append((vec, kk))
            cur = list(dict.fromkeys(rest))
            if len(cur) > _FM_ROW_LIMIT:
                ok = False
                break
        if not ok:
            continue
        lo, hi = None, None
        for vec, k in cur:
            if len(vec) == 1 and vec[0][0] == target:
                c = vec[0][1]
                if c > 0:
                    b = _floor_div(-k, c)
                    hi = b if hi is None else min(hi, b)
                else:
                    b = math.floor(Fraction(-k, c))
                    lo = b if lo is None else max(lo, b)
        if lo is not None or hi is not None:
            out[target] = (lo, hi)
    return out


def derive_bounds(f, vars) -> Box | Unbounded:
    """Box guaranteed to contain all solutions over `vars`, or UNBOUNDED
    naming the first offending variable.  f is a ground formula (AST node,
    ParsedFormula or compiled tree); quantified subformulas contribute no
    constraints."""
    ct = _as_compiled(f)
    found = _bounds_of(ct)
    intervals = {}
    for v in vars:
        lo, hi = found.get(v, (None, None))
        if lo is None or hi is None:
            return Unbounded(v)
        intervals[v] = (lo, hi)
    return Box(intervals)


def _as_compiled(f):
    if isinstance(f, ParsedFormula):
        return compile_node(nnf(f.root))
    if isinstance(f, tuple):
        return f
    return compile_node(nnf(f))


# --- equality elimination ------------------------------------------------------


def eliminate_equalities(node, var_order):
    """Substitute away equality-determined variables in the top-level
    conjunctive context of a ground NNF formula.

    Repeatedly: pick an equality atom with a unit-coefficient variable,
    solve, substitute everywhere and drop the variable; divide an equality
    through when all its coefficients and constant share the smallest
    coefficient as a factor.  Returns (formula, substitution log) where the
    log is a list of (var, Term) in elimination order; lifting a reduced
    solution replays the log in reverse.
    """
    parts = list(node.parts) if isinstance(node, And) else [node]
    subs = []
    progress = True
    while progress:
        progress = False
        for i, p in enumerate(parts):
            if not isinstance(p, Eq):
                continue
            gap = p.gap()
            # unit-coefficient solve, first eligible variable in declaration order
            for v in var_order:
                if v in {s[0] for s in subs}:
                    continue
                c = gap.coeff(v)
                if c.is_constant() and abs(c.constant_value()) == 1:
                    cval = c.constant_value()
                    rest = gap.drop(v)
                    expr = rest if cval == -1 else -rest
                    del parts[i]
                    parts = [_subst_atoms(q, v, expr) for q in parts]
                    subs.append((v, expr))
                    progress = True
                    break
            if progress:
                break
            # divide-through when the smallest coefficient divides everything
            coeffs = [c.constant_value() for _, c in gap.coeffs if c.is_constant()]
            if coeffs and len(coeffs) == len(gap.coeffs):
                m = min(abs(c) for c in coeffs)
                k = gap.constant.constant_value()
                if m > 1 and all(c % m == 0 for c in coeffs) and k % m == 0:
                    divided = Term.build(
                        {v: Poly((c.constant_value() // m,))
                         for v, c in gap.coeffs},
                        Poly((k // m,)))
                    parts[i] = Eq(Term((), Poly()), -divided)
                    progress = True
                    break
    out = fold_constants(make_and(parts))
    return out, subs


def _subst_atoms(node, var, expr):
    from .formula import map_atoms, _map_atom_terms
    return map_atoms(node, lambda a: _map_atom_terms(
        a, lambda t: t.substitute(var, expr)))


def lift_point(point: dict, subs) -> dict:
    """Recover a full solution from a reduced one using the substitution log."""
    env = dict(point)
    for v, expr in reversed(subs):
        env[v] = expr.eval(env)
    return env


# --- quantifier decision -------------------------------------------------------

_DEFAULT_DECISION_BUDGET = 10 ** 7


def decide(ct, budget: int = _DEFAULT_DECISION_BUDGET) -> bool:
    """Truth of a compiled formula whose free variables are all substituted."""
    tag = ct[0]
    if tag == "t":
        return True
    if tag == "f":
        return False
    if tag == "and":
        return all(decide(p, budget) for p in ct[1])
    if tag == "or":
        return any(decide(p, budget) for p in ct[1])
    if tag == "fa":
        return not decide(negate(ct), budget)
    if tag == "ex":
        block = []
        body = ct
        while body[0] == "ex":
            block.append(body[1])
            body = body[2]
        return _exists_block(body, block, budget)
    raise QpcountError(f"cannot decide open formula {ct!r}")


def _exists_block(body, block, budget) -> bool:
    bounds = _bounds_of(body)
    intervals = {}
    unbounded = []
    for v in block:
        lo, hi = bounds.get(v, (None, None))
        if lo is None or hi is None:
            unbounded.append(v)
        else:
            intervals[v] = (lo, hi)
    if not unbounded:
        total = 1
        for lo, hi in intervals.values():
            total *= max(0, hi - lo + 1)
        if total > budget:
            raise BoxTooLarge(
                f"quantifier search space of {total} points exceeds budget")
        return _search_block(body, block, intervals, budget)
    if len(block) == 1 and ct_quantifier_free(body):
        return _exists_1var(body, block[0]) is not None
    raise CannotDecideFiniteness(
        f"cannot bound quantified variables {unbounded} for finite search")


def _search_block(body, block, intervals, budget) -> bool:
    if not block:
        return decide(body, budget)
    v, rest = block[0], block[1:]
    lo, hi = intervals[v]
    if not rest and ct_quantifier_free(body):
        return _exists_1var(body, v, lo, hi) is not None
    for val in range(lo, hi + 1):
        child = subst(body, v, val)
        if child == _T:
            return True
        if child == _F:
            continue
        if _search_block(child, rest, intervals, budget):
            return True
    return False


def _exists_1var(ct, v, lo=None, hi=None):
    """Exact decision for one integer variable in a quantifier-free formula:
    returns a witness or None.  Inequalities cut an interval, divisibility
    constraints are periodic, so scanning one period inside the interval is
    complete; disjunctive structure distributes."""
    tag = ct[0]
    if tag == "f":
        return None
    if tag == "t":
        if lo is not None:
            return lo
        if hi is not None:
            return hi
        return 0
    if tag == "or":
        for p in ct[1]:
            w = _exists_1var(p, v, lo, hi)
            if w is not None:
                return w
        return None
    conjuncts = list(ct[1]) if tag == "and" else [ct]
    atoms = []
    complexes = []
    for p in conjuncts:
        if p[0] in ("le", "eq", "div"):
            atoms.append(p)
        elif p[0] == "t":
            continue
        elif p[0] == "f":
            return None
        else:
            complexes.append(p)
    if complexes:
        # distribute the first disjunctive conjunct and recurse
        first = complexes[0]
        rest = [q for q in conjuncts if q is not first]
        if first[0] != "or":
            raise AssertionError(f"unexpected node {first!r}")
        for branch in first[1]:
            w = _exists_1var(_make_and(rest + [branch]), v, lo, hi)
            if w is not None:
                return w
        return None
    divs = []
    for a in atoms:
        if a[0] == "div":
            d, coeffs, k = a[1], a[2], a[3]
            c = coeffs[0][1] if coeffs else 0
            divs.append((d, c, k))
            continue
        rows = _atom_rows(a)
        for coeffs, k in rows:
            if not coeffs:
                if k > 0:
                    return None
                continue
            c = coeffs[0][1]
            if c > 0:
                b = _floor_div(-k, c)
                hi = b if hi is None else min(hi, b)
            else:
                b = math.ceil(Fraction(-k, c))
                lo = b if lo is None else max(lo, b)
    if lo is not None and hi is not None and lo > hi:
        return None
    if not divs:
        if lo is not None:
            return lo
        if hi is not None:
            return hi
        return 0
    period = 1
    for d, _, _ in divs:
        period = lcm(period, d)
    anchor = lo if lo is not None else (hi - period + 1 if hi is not None else 0)
    for w in range(anchor, anchor + period):
        if lo is not None and w < lo:
            continue
        if hi is not None and w > hi:
            continue
        if all((c * w + k) % d == 0 for d, c, k in divs):
            return w
    return None


def _count_1var(ct, v, lo, hi, budget) -> int:
    """Count solutions for the last variable on [lo, hi]."""
    tag = ct[0]
    if tag == "f":
        return 0
    if tag == "t":
        return hi - lo + 1
    if tag in ("le", "eq", "div") or (
            tag == "and" and all(p[0] in ("le", "eq", "div") for p in ct[1])):
        atoms = list(ct[1]) if tag == "and" else [ct]
        divs = []
        for a in atoms:
            if a[0] == "div":
                coeffs = a[2]
                divs.append((a[1], coeffs[0][1] if coeffs else 0, a[3]))
                continue
            for coeffs, k in _atom_rows(a):
                if not coeffs:
                    if k > 0:
                        return 0
                    continue
                c = coeffs[0][1]
                if c > 0:
                    hi = min(hi, _floor_div(-k, c))
                else:
                    lo = max(lo, math.ceil(Fraction(-k, c)))
        if lo > hi:
            return 0
        if not divs:
            return hi - lo + 1
        period = 1
        for d, _, _ in divs:
            period = lcm(period, d)
        good = [r for r in range(period)
                if all((c * r + k) % d == 0 for d, c, k in divs)]
        full, rem = divmod(hi - lo + 1, period)
        count = full * len(good)
        for r in good:
            # residues taken relative to lo
            pos = (r - lo) % period
            if pos < rem:
                count += 1
        return count
    # general: loop with full decision (quantifiers allowed)
    total = 0
    for val in range(lo, hi + 1):
        child = subst(ct, v, val)
        if child == _T:
            total += 1
        elif child != _F and decide(child, budget):
            total += 1
    return total


# --- counting ------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    probe_start: int = 64
    probe_doublings: int = 3
    point_budget: int = 10 ** 7


def _prepare(pf: ParsedFormula, params, method: str):
    if params is None:
        params = {}
    g = ground(pf, params)
    root = nnf(g.root)
    root, subs = eliminate_equalities(root, g.frees)
    remaining = [v for v in g.frees if v not in {s[0] for s in subs}]
    if method == "qe-then-enumerate":
        root = cooper.eliminate_all(root)
        root = nnf(root)
    elif method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    ct = compile_node(fold_constants(root))
    return ct, remaining, subs


def _enumeration_order(ct, remaining, intervals):
    # widest range innermost: the last variable collapses arithmetically
    return sorted(remaining,
                  key=lambda v: (intervals[v][1] - intervals[v][0], v))


def _count_over_box(ct, order, intervals, budget) -> int:
    def rec(ct, idx):
        if ct == _F:
            return 0
        if ct == _T:
            total = 1
            for v in order[idx:]:
                lo, hi = intervals[v]
                total *= hi - lo + 1
            return total
        if idx == len(order):
            return 1 if decide(ct, budget) else 0
        v = order[idx]
        lo, hi = intervals[v]
        if idx == len(order) - 1 and ct_quantifier_free(ct):
            return _count_1var(ct, v, lo, hi, budget)
        total = 0
        for val in range(lo, hi + 1):
            total += rec(subst(ct, v, val), idx + 1)
        return total

    return rec(ct, 0)


def _check_budget(intervals, order, budget):
    total = 1
    for v in order[:-1] if order else []:
        lo, hi = intervals[v]
        total *= max(1, hi - lo + 1)
        if total > budget:
            raise BoxTooLarge(f"enumeration would visit over {budget} points")


@dataclasses.dataclass(frozen=True)
class _UnivariateSupport:
    infinite_below: bool
    infinite_above: bool
    window: list  # all solutions inside the breakpoint window, ascending
    period: int
    window_lo: int
    window_hi: int

    @property
    def finite(self) -> bool:
        return not (self.infinite_below or self.infinite_above)


def _univariate_analysis(ct, v) -> _UnivariateSupport:
    """Exact support analysis for a quantifier-free formula in one variable.

    Beyond every inequality breakpoint the truth value is periodic with the
    lcm of the divisibility moduli, so one period on each side decides
    (in)finiteness, and the window [min bp - period, max bp + period]
    carries all solutions of a finite set.
    """
    breakpoints = []
    period = 1

    def walk(node):
        nonlocal period
        tag = node[0]
        if tag in ("le", "eq"):
            for coeffs, k in _atom_rows(node):
                if coeffs:
                    c = coeffs[0][1]
                    breakpoints.append(math.floor(Fraction(-k, c)))
                    breakpoints.append(math.ceil(Fraction(-k, c)))
        elif tag == "div":
            period = lcm(period, node[1])
        elif tag in ("and", "or"):
            for p in node[1]:
                walk(p)

    walk(ct)
    if not breakpoints:
        hit = any(_truth_at(ct, w) for w in range(period))
        return _UnivariateSupport(hit, hit, [], period, 0, -1)
    lo_bp, hi_bp = min(breakpoints), max(breakpoints)
    above = any(_truth_at(ct, w) for w in range(hi_bp + 1, hi_bp + period + 1))
    below = any(_truth_at(ct, w) for w in range(lo_bp - period, lo_bp))
    lo_w, hi_w = lo_bp - period, hi_bp + period
    window = [w for w in range(lo_w, hi_w + 1) if _truth_at(ct, w)]
    return _UnivariateSupport(below, above, window, period, lo_w, hi_w)


def _truth_at(ct, value) -> bool:
    vs = ct_vars(ct)
    if not vs:
        return decide(ct)
    (v,) = vs
    return subst(ct, v, value) == _T


def _probe(ct, remaining, cfg: SolverConfig):
    """Doubling-box probe for sets with underivable bounds: INFINITE when
    every doubling finds new solutions, otherwise inconclusive."""
    counts = []
    size = cfg.probe_start
    for _ in range(cfg.probe_doublings + 1):
        intervals = {v: (-size, size) for v in remaining}
        order = _enumeration_order(ct, remaining, intervals)
        counts.append(_count_over_box(ct, order, intervals, cfg.point_budget))
        size *= 2
    if all(b > a for a, b in zip(counts, counts[1:])):
        return INFINITE
    raise CannotDecideFiniteness(
        f"bounds underivable and probe inconclusive (counts {counts}); "
        "supply an explicit box")


def count_points(pf: ParsedFormula, params=None, *, method: str = "enumerate",
                 box: dict | None = None,
                 config: SolverConfig = SolverConfig()) -> CountResult:
    """Exact cardinality of the solution set over the free variables."""
    ct, remaining, _subs = _prepare(pf, params, method)
    if not remaining:
        return CountResult(1 if decide(ct, config.point_budget) else 0)
    if box is not None:
        intervals = {v: box[v] for v in remaining}
    else:
        b = derive_bounds(ct, remaining)
        if isinstance(b, Unbounded):
            if len(remaining) == 1:
                support = _univariate_support(ct, remaining[0])
                if support is not None:
                    if not support.finite:
                        return CountResult(INFINITE)
                    return CountResult(len(support.window))
            return CountResult(_probe(ct, remaining, config))
        intervals = b.intervals
    order = _enumeration_order(ct, remaining, intervals)
    _check_budget(intervals, order, config.point_budget)
    return CountResult(_count_over_box(ct, order, intervals, config.point_budget))


def _decompile(ct):
    """Compiled tree back to AST nodes (for reuse of AST-level passes)."""
    tag = ct[0]
    if tag == "t":
        return Bool(True)
    if tag == "f":
        return Bool(False)
    if tag in ("le", "eq"):
        term = Term.build({v: Poly((c,)) for v, c in ct[1]}, Poly((ct[2],)))
        zero = Term((), Poly())
        return Le(term, zero) if tag == "le" else Eq(term, zero)
    if tag == "div":
        term = Term.build({v: Poly((c,)) for v, c in ct[2]}, Poly((ct[3],)))
        return Div(ct[1], term)
    if tag == "and":
        return And(tuple(_decompile(p) for p in ct[1]))
    if tag == "or":
        return Or(tuple(_decompile(p) for p in ct[1]))
    if tag == "ex":
        return Exists(ct[1], _decompile(ct[2]))
    if tag == "fa":
        return Forall(ct[1], _decompile(ct[2]))
    raise AssertionError(f"bad compiled node {ct!r}")


def iter_points(pf: ParsedFormula, params=None, *, box: dict | None = None,
                method: str = "enumerate",
                config: SolverConfig = SolverConfig()):
    """Yield solutions as dicts over the free variables, lexicographically in
    declaration order.  Requires derivable (or supplied) bounds."""
    ct, remaining, subs = _prepare(pf, params, method)
    g_frees = ground(pf, params or {}).frees
    if not remaining:
        if decide(ct, config.point_budget):
            yield lift_point({}, subs)
        return
    if box is not None:
        intervals = {v: box[v] for v in remaining}
    else:
        b = derive_bounds(ct, remaining)
        if isinstance(b, Unbounded):
            if len(remaining) == 1:
                support = _univariate_support(ct, remaining[0])
                if support is not None and support.finite:
                    for s in support.window:
                        yield lift_point({remaining[0]: s}, subs)
                    return
                if support is not None and not support.infinite_below:
                    # ascending stream of an infinite-above support
                    w = support.window_lo
                    while True:
                        if _truth_at(ct, w):
                            yield lift_point({remaining[0]: w}, subs)
                        w += 1
            raise CannotDecideFiniteness(
                f"cannot enumerate: no bounds for {b.var}")
        intervals = b.intervals

    order = [v for v in g_frees if v in set(remaining)]

    def rec(ct, idx, partial):
        if ct == _F:
            return
        if idx == len(order):
            if ct == _T or decide(ct, config.point_budget):
                yield dict(partial)
            return
        v = order[idx]
        lo, hi = intervals[v]
        for val in range(lo, hi + 1):
            partial[v] = val
            yield from rec(subst(ct, v, val), idx + 1, partial)
        partial.pop(v, None)

    for point in rec(ct, 0, {}):
        yield lift_point(point, subs)


def first_points(pf: ParsedFormula, params=None, n: int = 1, *,
                 box: dict | None = None) -> list:
    """First n solutions in lexicographic declaration order, as tuples."""
    frees = pf.frees
    out = []
    for env in iter_points(pf, params, box=box):
        out.append(tuple(env[v] for v in frees))
        if len(out) >= n:
            break
    return sorted(out)[:n]


def argmax_point(pf: ParsedFormula, params=None, direction: dict | None = None,
                 *, box: dict | None = None,
                 config: SolverConfig = SolverConfig()):
    """Maximize direction . x over the solution set.

    Returns the maximizing point as a tuple over the free variables in
    declaration order (lexicographically smallest among maximizers), or
    NO_MAX when the set is empty or unbounded in the direction.  A zero
    direction returns the lexicographically smallest witness.
    """
    frees = ground(pf, params or {}).frees
    direction = direction or {}
    cvec = [direction.get(v, 0) for v in frees]

    ct, remaining, subs = _prepare(pf, params, "enumerate")
    if box is None and remaining:
        b = derive_bounds(ct, remaining)
        if isinstance(b, Unbounded):
            if len(remaining) == 1:
                return _argmax_univariate(ct, remaining[0], frees, cvec, subs)
            result = _probe(ct, remaining, config)  # INFINITE or raises
            if result is INFINITE:
                return NO_MAX
    best = None
    for env in iter_points(pf, params, box=box, config=config):
        point = tuple(env[v] for v in frees)
        value = sum(c * x for c, x in zip(cvec, point))
        if best is None or value > best[0]:
            best = (value, point)
    return NO_MAX if best is None else best[1]


def _univariate_support(ct, v):
    """Support analysis after eliminating quantifiers if present; None when
    elimination cannot produce a quantifier-free form."""
    if not ct_quantifier_free(ct):
        ct = compile_node(fold_constants(nnf(
            cooper.eliminate_all(_decompile(ct)))))
    if not ct_quantifier_free(ct):
        return None
    return _univariate_analysis(ct, v)


def _argmax_univariate(ct, v, frees, cvec, subs):
    support = _univariate_support(ct, v)
    if support is None:
        raise CannotDecideFiniteness("cannot analyze quantified unbounded set")
    c = cvec[frees.index(v)] if v in frees else 0

    def to_point(value):
        env = lift_point({v: value}, subs)
        return tuple(env[u] for u in frees)

    if c > 0:
        if support.infinite_above:
            return NO_MAX
        return to_point(support.window[-1]) if support.window else NO_MAX
    if c < 0:
        if support.infinite_below:
            return NO_MAX
        return to_point(support.window[0]) if support.window else NO_MAX
    # zero direction: lexicographically smallest witness
    if support.infinite_below:
        return NO_MAX
    if support.window:
        return min(to_point(s) for s in support.window)
    return NO_MAX
