"""Quantifier elimination by virtual substitution with divisibility atoms.

Eliminates an existential over a variable whose coefficients are constant
integers (parameters may appear free inside polynomial coefficients of the
other variables).  No DNF conversion: the boolean skeleton is kept and each
atom is rewritten in place for every substitution candidate.

For ``exists v. F``: normalize F, give v one common coefficient L (adding
the guard L | v'), collect strict lower bounds b < v' and the divisibility
lcm D, then disjoin the "minus infinity" branch and the branches v' := b + j
for every lower bound b and j = 1..D.
"""
from __future__ import annotations

import dataclasses
import itertools

from .arith import Poly, lcm
from .errors import BoxTooLarge, NonconstantCoefficient
from .formula import (
    And,
    Bool,
    Div,
    Eq,
    Exists,
    FALSE,
    Forall,
    Le,
    Not,
    Or,
    ParsedFormula,
    TRUE,
    Term,
    eval_ground,
    fold_constants,
    has_quantifier,
    make_and,
    make_or,
    nnf,
)


def _const_coeff(term: Term, v: str) -> int:
    c = term.coeff(v)
    if c.is_zero():
        return 0
    if not c.is_constant():
        raise NonconstantCoefficient(
            f"variable {v!r} carries the parameter-dependent coefficient "
            f"{c}; ground the formula first")
    return c.constant_value()


def _split_eq(node):
    """Rewrite every equality as a pair of inequalities."""
    if isinstance(node, Eq):
        return make_and([Le(node.lhs, node.rhs), Le(node.rhs, node.lhs)])
    if isinstance(node, And):
        return make_and([_split_eq(p) for p in node.parts])
    if isinstance(node, Or):
        return make_or([_split_eq(p) for p in node.parts])
    return node


def eliminate_exists(f, v: str):
    """Equivalent quantifier-free-in-v formula for ``exists v. f``.

    f must itself be quantifier-free; every coefficient of v must be a
    constant integer.
    """
    if has_quantifier(f):
        raise ValueError("eliminate_exists expects a quantifier-free body "
                         "(eliminate innermost quantifiers first)")
    body = _split_eq(nnf(f))

    # Common coefficient L for v across all atoms that mention it.
    coeffs = []
    for atom in _atoms(body):
        if isinstance(atom, Le):
            c = _const_coeff(atom.gap(), v)
        else:  # Div
            c = _const_coeff(atom.term, v)
        if c:
            coeffs.append(abs(c))
    if not coeffs:
        # v is not mentioned: exists v. f == f
        return fold_constants(body)
    big_l = 1
    for c in coeffs:
        big_l = lcm(big_l, c)

    # Rewrite atoms in terms of w = L*v.  Each atom becomes one of:
    #   ("upper", a)  meaning w <= a
    #   ("lower", b)  meaning b < w
    #   ("div", d, e) meaning d | w + e
    # Atoms not mentioning v stay as themselves.
    lowers = []
    moduli = [big_l] if big_l > 1 else []

    def classify(atom):
        if isinstance(atom, Le):
            gap = atom.gap()  # gap <= 0
            c = _const_coeff(gap, v)
            if c == 0:
                return atom
            rest = gap.drop(v)
            k = big_l // abs(c)
            if c > 0:
                return ("upper", (-rest).scale(k))
            bound = rest.scale(k) - 1
            lowers.append(bound)
            return ("lower", bound)
        if isinstance(atom, Div):
            c = _const_coeff(atom.term, v)
            if c == 0:
                return atom
            term = atom.term if c > 0 else -atom.term
            c = abs(c)
            k = big_l // c
            d = atom.divisor * k
            moduli.append(d)
            return ("div", d, term.drop(v).scale(k))
        raise AssertionError(f"unexpected atom {atom!r}")

    skeleton = _map_marked(body, classify)
    if big_l > 1:
        # guard: w = L*v must be divisible by L
        skeleton = ("and", (skeleton, ("div", big_l, Term(()))))
    big_d = 1
    for d in moduli:
        big_d = lcm(big_d, d)

    branches = []
    for j in range(1, big_d + 1):
        branches.append(_instantiate(skeleton, big_l, j, None))
        for b in lowers:
            branches.append(_instantiate(skeleton, big_l, j, b))
    return fold_constants(make_or(branches))


def _atoms(node):
    if isinstance(node, (Le, Div)):
        yield node
    elif isinstance(node, (And, Or)):
        for p in node.parts:
            yield from _atoms(p)
    elif isinstance(node, Bool):
        return
    else:
        raise AssertionError(f"unexpected node {node!r} in NNF body")


def _map_marked(node, fn):
    if isinstance(node, (Le, Div)):
        return fn(node)
    if isinstance(node, Bool):
        return node
    if isinstance(node, And):
        return ("and", tuple(_map_marked(p, fn) for p in node.parts))
    if isinstance(node, Or):
        return ("or", tuple(_map_marked(p, fn) for p in node.parts))
    raise AssertionError(f"unexpected node {node!r} in NNF body")


def _instantiate(marked, big_l, j, base):
    """Substitute w := base + j (or w -> -infinity when base is None)."""
    if isinstance(marked, Bool):
        return marked
    if isinstance(marked, (Le, Div)):
        return marked
    kind = marked[0]
    if kind in ("and", "or"):
        parts = [_instantiate(p, big_l, j, base) for p in marked[1]]
        return make_and(parts) if kind == "and" else make_or(parts)
    if kind == "upper":
        if base is None:
            return TRUE
        return Le(base + j, marked[1])  # base + j <= a
    if kind == "lower":
        if base is None:
            return FALSE
        return Le(marked[1] + 1, base + j)  # b < base + j
    if kind == "div":
        d, e = marked[1], marked[2]
        w = Term((), Poly((j,))) if base is None else base + j
        return Div(d, w + e)
    raise AssertionError(f"unexpected marker {kind!r}")


def eliminate_all(pf):
    """Eliminate every quantifier, innermost first; forall as not-exists-not."""
    if isinstance(pf, ParsedFormula):
        return dataclasses.replace(pf, root=eliminate_all(pf.root))
    return _eliminate_node(pf)


def _eliminate_node(node):
    if isinstance(node, (Le, Eq, Div, Bool)):
        return node
    if isinstance(node, Not):
        return fold_constants(Not(_eliminate_node(node.body)))
    if isinstance(node, And):
        return make_and([_eliminate_node(p) for p in node.parts])
    if isinstance(node, Or):
        return make_or([_eliminate_node(p) for p in node.parts])
    if isinstance(node, Exists):
        return eliminate_exists(_eliminate_node(node.body), node.var)
    if isinstance(node, Forall):
        inner = eliminate_exists(nnf(_eliminate_node(node.body), negate=True),
                                 node.var)
        return fold_constants(nnf(inner, negate=True))
    raise TypeError(f"not a formula node: {node!r}")


def equivalent_on_box(f, g, box: dict, point_budget: int = 10 ** 7,
                      holds=None):
    """Exhaustively compare two formulas on a box of integer assignments.

    box maps each shared free variable to an inclusive (lo, hi) interval.
    Returns (True, None) or (False, first counterexample dict) in
    lexicographic order.  holds(formula, env) may be supplied to decide
    formulas with quantifiers; ground quantifier-free evaluation is the
    default.
    """
    names = list(box)
    total = 1
    for lo, hi in box.values():
        total *= max(0, hi - lo + 1)
        if total > point_budget:
            raise BoxTooLarge(f"box has more than {point_budget} points")
    if holds is None:
        holds = eval_ground
    ranges = [range(box[n][0], box[n][1] + 1) for n in names]
    for values in itertools.product(*ranges):
        env = dict(zip(names, values))
        if holds(f, env) != holds(g, env):
            return False, env
    return True, None
