"""Presburger-style formula language with polynomial parameter coefficients.

Grammar (semicolon/newline tolerant, ASCII identifiers)::

    program := decl* formula
    decl    := ("param" | "free") ident+ ";"
    formula := "exists" ident "." formula | "forall" ident "." formula | disj
    disj    := conj ("or" conj)*
    conj    := neg ("and" neg)*
    neg     := "not" neg | "(" formula ")" | atom | "true" | "false"
    atom    := term (("<="|"<"|">="|">"|"="|"!=") term) | intlit "|" term

Terms are arbitrary arithmetic expressions that must be linear in the
counted (free/bound) variables.  At most one parameter may appear with
nonconstant polynomial coefficients (it may multiply counted variables and
carry powers); additional parameters are allowed only linearly with
constant integer coefficients.  Products of counted variables are rejected.

``<``, ``>``, ``>=`` and ``!=`` are surface sugar desugared over the
integers during parsing, so the AST carries only ``<=``, ``=`` and
divisibility atoms (plus boolean structure and quantifiers).
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction

from . import parsing
from .arith import Poly, format_poly, lcm
from .errors import NonlinearTerm, ParseError, UndeclaredVariable
from .parsing import Cursor, Token, tokenize

# --- terms -------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Term:
    """Integer-linear combination of variables with Poly coefficients in the
    designated nonlinear parameter, plus a Poly constant."""

    coeffs: tuple  # sorted ((name, Poly), ...)
    constant: Poly = Poly()

    @staticmethod
    def build(coeffs: dict, constant=Poly()) -> "Term":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if not c.is_zero()))
        if not isinstance(constant, Poly):
            constant = Poly((constant,))
        return Term(items, constant)

    def coeff(self, name: str) -> Poly:
        for v, c in self.coeffs:
            if v == name:
                return c
        return Poly()

    def vars(self):
        return [v for v, _ in self.coeffs]

    def __add__(self, other):
        if isinstance(other, (int, Poly)):
            return Term(self.coeffs, self.constant + other)
        out = {v: c for v, c in self.coeffs}
        for v, c in other.coeffs:
            out[v] = out.get(v, Poly()) + c
        return Term.build(out, self.constant + other.constant)

    def __sub__(self, other):
        if isinstance(other, (int, Poly)):
            return Term(self.coeffs, self.constant - other)
        return self + (-other)

    def __neg__(self):
        return Term(tuple((v, -c) for v, c in self.coeffs), -self.constant)

    def scale(self, k) -> "Term":
        if isinstance(k, int):
            k = Poly((k,))
        if k.is_zero():
            return Term((), Poly())
        return Term.build({v: c * k for v, c in self.coeffs}, self.constant * k)

    def drop(self, name: str) -> "Term":
        return Term(tuple((v, c) for v, c in self.coeffs if v != name), self.constant)

    def substitute(self, name: str, replacement: "Term") -> "Term":
        c = self.coeff(name)
        if c.is_zero():
            return self
        return self.drop(name) + replacement.scale(c)

    def int_constant(self):
        """The integer value of a variable-free ground term, else None."""
        if self.coeffs or self.constant.degree > 0:
            return None
        return self.constant.constant_value()

    def eval(self, env: dict) -> int:
        """Evaluate a ground term (all polynomials degree <= 0)."""
        total = self.constant.constant_value()
        for v, c in self.coeffs:
            total += c.constant_value() * env[v]
        return total

    def format(self) -> str:
        parts = []

        def push(sign, body):
            if not parts:
                parts.append(body if sign > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if sign > 0 else f"- {body}")

        for v, c in self.coeffs:
            if c.is_constant():
                k = c.constant_value()
                mag = abs(k)
                push(1 if k > 0 else -1, v if mag == 1 else f"{mag}*{v}")
            elif len([x for x in c.coeffs if x != 0]) == 1:
                # single monomial like 2*t^3: print without parentheses
                push(1 if c.leading() > 0 else -1,
                     f"{format_poly(c if c.leading() > 0 else -c)}*{v}")
            else:
                push(1, f"({format_poly(c)})*{v}")
        if not self.constant.is_zero() or not parts:
            c = self.constant
            neg = c.leading() < 0
            mag = -c if neg else c
            nterms = len([x for x in c.coeffs if x != 0])
            body = format_poly(mag) if nterms <= 1 else f"({format_poly(mag)})"
            push(-1 if neg else 1, body)
        return " ".join(parts)

    def __str__(self):
        return self.format()


# --- AST nodes ---------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Bool:
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


@dataclasses.dataclass(frozen=True)
class Le:
    lhs: Term
    rhs: Term

    def gap(self) -> Term:
        """lhs - rhs; the atom is gap <= 0."""
        return self.lhs - self.rhs


@dataclasses.dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def gap(self) -> Term:
        return self.lhs - self.rhs


@dataclasses.dataclass(frozen=True)
class Div:
    divisor: int
    term: Term


@dataclasses.dataclass(frozen=True)
class Not:
    body: object


@dataclasses.dataclass(frozen=True)
class And:
    parts: tuple


@dataclasses.dataclass(frozen=True)
class Or:
    parts: tuple


@dataclasses.dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclasses.dataclass(frozen=True)
class Forall:
    var: str
    body: object


Atom = (Le, Eq, Div)
Quantifier = (Exists, Forall)


def make_and(parts) -> object:
    flat = []
    for p in parts:
        if isinstance(p, Bool):
            if not p.value:
                return FALSE
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def make_or(parts) -> object:
    flat = []
    for p in parts:
        if isinstance(p, Bool):
            if p.value:
                return TRUE
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


@dataclasses.dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str  # "param" | "free" | "bound"


@dataclasses.dataclass(frozen=True)
class ParsedFormula:
    decls: tuple
    root: object
    nonlinear_param: str | None = None

    @property
    def params(self):
        return [d.name for d in self.decls if d.kind == "param"]

    @property
    def frees(self):
        return [d.name for d in self.decls if d.kind == "free"]


# --- parser ------------------------------------------------------------------

_CMP_OPS = {"<=", "<", ">=", ">", "=", "!="}
_FORMULA_MARKERS = _CMP_OPS | {"|"}
_FORMULA_WORDS = {"and", "or", "not", "exists", "forall", "true", "false"}


class _TermBuilder:
    """Validates linearity and assembles Terms from monomial maps."""

    def __init__(self, kinds: dict):
        self.kinds = kinds  # name -> "param" | "free"
        self.nonlinear_param: str | None = None

    def _mark_nonlinear(self, p: str, tok: Token):
        if self.nonlinear_param is None:
            self.nonlinear_param = p
        elif self.nonlinear_param != p:
            raise NonlinearTerm(
                f"parameters {self.nonlinear_param!r} and {p!r} both require "
                "polynomial coefficients; only one parameter may be nonlinear",
                tok.line, tok.col)

    def term(self, mm: parsing.MonomialMap, bound: set, tok: Token) -> Term:
        coeffs: dict[str, Poly] = {}
        const = Poly()

        def add_coeff(v, p):
            coeffs[v] = coeffs.get(v, Poly()) + p

        for mono, c in mm.items():
            counted = []
            params = []
            for name, exp in mono:
                if name in bound or self.kinds.get(name) == "free":
                    counted.append((name, exp))
                elif self.kinds.get(name) == "param":
                    params.append((name, exp))
                else:
                    raise UndeclaredVariable(f"undeclared variable {name!r}",
                                             tok.line, tok.col)
            if sum(e for _, e in counted) > 1:
                raise NonlinearTerm(
                    "products of counted variables are not allowed "
                    f"(offending monomial involves {[n for n, _ in counted]})",
                    tok.line, tok.col)
            if len(params) > 1:
                raise NonlinearTerm(
                    f"parameters {[n for n, _ in params]} multiplied together",
                    tok.line, tok.col)
            if counted:
                v = counted[0][0]
                if params:
                    p, e = params[0]
                    self._mark_nonlinear(p, tok)
                    add_coeff(v, Poly([0] * e + [c]))
                else:
                    add_coeff(v, Poly((c,)))
            elif params:
                p, e = params[0]
                if e >= 2:
                    self._mark_nonlinear(p, tok)
                    const = const + Poly([0] * e + [c])
                else:
                    add_coeff(p, Poly((c,)))  # linear parameter; folded later
            else:
                const = const + Poly((c,))
        return Term.build(coeffs, const)


def _scan_is_formula(cur: Cursor) -> bool:
    """From an opening '(', decide formula vs arithmetic expression."""
    depth = 0
    for tok in cur.tokens[cur.pos:]:
        if tok.kind == "OP" and tok.text == "(":
            depth += 1
        elif tok.kind == "OP" and tok.text == ")":
            depth -= 1
            if depth == 0:
                return False
        elif tok.kind == "OP" and tok.text in _FORMULA_MARKERS:
            return True
        elif tok.kind == "IDENT" and tok.text in _FORMULA_WORDS:
            return True
        elif tok.kind == "END":
            return False
    return False


def _integerize(mms: list) -> list:
    denom = 1
    for mm in mms:
        for c in mm.values():
            denom = lcm(denom, c.denominator)
    return [parsing.mm_scale(mm, denom) for mm in mms], denom


def parse_formula(text: str) -> ParsedFormula:
    cur = Cursor(tokenize(text))
    decls: list[VarDecl] = []
    kinds: dict[str, str] = {}
    while cur.peek().kind == "IDENT" and cur.peek().text in ("param", "free"):
        kind = cur.next().text
        names = []
        while cur.peek().kind == "IDENT":
            tok = cur.next()
            if tok.text in parsing.KEYWORDS:
                raise ParseError(f"{tok.text!r} is a reserved word", tok.line, tok.col)
            if tok.text in kinds:
                raise ParseError(f"variable {tok.text!r} declared twice",
                                 tok.line, tok.col)
            names.append(tok.text)
        if not names:
            cur.error("expected at least one identifier after declaration keyword")
        cur.expect(";")
        for n in names:
            decls.append(VarDecl(n, kind))
            kinds[n] = kind
    builder = _TermBuilder(kinds)
    root = _parse_quantified(cur, builder, set())
    tok = cur.peek()
    if tok.kind != "END":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)

    tau = builder.nonlinear_param
    if tau is None:
        params = [d.name for d in decls if d.kind == "param"]
        if len(params) == 1:
            tau = params[0]
    if tau is not None:
        root = _fold_param(root, tau)
    return ParsedFormula(tuple(decls), root, tau)


def _parse_quantified(cur, builder, bound):
    tok = cur.peek()
    if tok.kind == "IDENT" and tok.text in ("exists", "forall"):
        cur.next()
        name_tok = cur.next()
        if name_tok.kind != "IDENT" or name_tok.text in parsing.KEYWORDS:
            raise ParseError("expected a variable after quantifier",
                             name_tok.line, name_tok.col)
        name = name_tok.text
        if name in builder.kinds or name in bound:
            raise ParseError(f"quantified variable {name!r} shadows an existing one",
                             name_tok.line, name_tok.col)
        cur.expect(".")
        body = _parse_quantified(cur, builder, bound | {name})
        return Exists(name, body) if tok.text == "exists" else Forall(name, body)
    return _parse_disj(cur, builder, bound)


def _parse_disj(cur, builder, bound):
    parts = [_parse_conj(cur, builder, bound)]
    while cur.peek().kind == "IDENT" and cur.peek().text == "or":
        cur.next()
        parts.append(_parse_conj(cur, builder, bound))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_conj(cur, builder, bound):
    parts = [_parse_neg(cur, builder, bound)]
    while cur.peek().kind == "IDENT" and cur.peek().text == "and":
        cur.next()
        parts.append(_parse_neg(cur, builder, bound))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_neg(cur, builder, bound):
    tok = cur.peek()
    if tok.kind == "IDENT" and tok.text == "not":
        cur.next()
        return Not(_parse_neg(cur, builder, bound))
    if tok.kind == "IDENT" and tok.text == "true":
        cur.next()
        return TRUE
    if tok.kind == "IDENT" and tok.text == "false":
        cur.next()
        return FALSE
    if tok.kind == "OP" and tok.text == "(" and _scan_is_formula(cur):
        cur.next()
        inner = _parse_quantified(cur, builder, bound)
        cur.expect(")")
        return inner
    return _parse_atom(cur, builder, bound)


def _parse_atom(cur, builder, bound):
    start = cur.peek()
    lhs_mm = parsing.parse_expression(cur)
    op_tok = cur.peek()
    if op_tok.kind == "OP" and op_tok.text == "|":
        cur.next()
        d = parsing.mm_as_const(lhs_mm)
        if d is None or d.denominator != 1 or d <= 0:
            raise ParseError("divisibility divisor must be a positive integer literal",
                             start.line, start.col)
        rhs_mm = parsing.parse_expression(cur)
        (rhs_mm,), denom = _integerize([rhs_mm])
        term = builder.term(rhs_mm, bound, start)
        return Div(int(d) * denom, term)
    if op_tok.kind != "OP" or op_tok.text not in _CMP_OPS:
        cur.error(f"expected a comparison operator, found {op_tok.text or 'end of input'!r}")
    cur.next()
    rhs_mm = parsing.parse_expression(cur)
    (lhs_mm, rhs_mm), _ = _integerize([lhs_mm, rhs_mm])
    lhs = builder.term(lhs_mm, bound, start)
    rhs = builder.term(rhs_mm, bound, start)
    op = op_tok.text
    if op == "<=":
        return Le(lhs, rhs)
    if op == ">=":
        return Le(rhs, lhs)
    if op == "<":
        return Le(lhs, rhs - 1)
    if op == ">":
        return Le(rhs, lhs - 1)
    if op == "=":
        return Eq(lhs, rhs)
    return Not(Eq(lhs, rhs))  # !=


def _fold_param(node, tau: str):
    """Move linear occurrences of the nonlinear parameter into Poly constants."""

    def fold_term(term: Term) -> Term:
        c = term.coeff(tau)
        if c.is_zero():
            return term
        return term.drop(tau) + c * Poly((0, 1))

    return map_atoms(node, lambda a: _map_atom_terms(a, fold_term))


def _map_atom_terms(atom, fn):
    if isinstance(atom, Le):
        return Le(fn(atom.lhs), fn(atom.rhs))
    if isinstance(atom, Eq):
        return Eq(fn(atom.lhs), fn(atom.rhs))
    if isinstance(atom, Div):
        return Div(atom.divisor, fn(atom.term))
    return atom


def map_atoms(node, fn):
    if isinstance(node, Atom):
        return fn(node)
    if isinstance(node, Bool):
        return node
    if isinstance(node, Not):
        return Not(map_atoms(node.body, fn))
    if isinstance(node, And):
        return And(tuple(map_atoms(p, fn) for p in node.parts))
    if isinstance(node, Or):
        return Or(tuple(map_atoms(p, fn) for p in node.parts))
    if isinstance(node, Exists):
        return Exists(node.var, map_atoms(node.body, fn))
    if isinstance(node, Forall):
        return Forall(node.var, map_atoms(node.body, fn))
    raise TypeError(f"not a formula node: {node!r}")


def iter_atoms(node):
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Not):
        yield from iter_atoms(node.body)
    elif isinstance(node, (And, Or)):
        for p in node.parts:
            yield from iter_atoms(p)
    elif isinstance(node, Quantifier):
        yield from iter_atoms(node.body)


def bound_vars(node) -> list:
    out = []
    if isinstance(node, Quantifier):
        out.append(node.var)
        out.extend(bound_vars(node.body))
    elif isinstance(node, Not):
        out.extend(bound_vars(node.body))
    elif isinstance(node, (And, Or)):
        for p in node.parts:
            out.extend(bound_vars(p))
    return out


def has_quantifier(node) -> bool:
    if isinstance(node, Quantifier):
        return True
    if isinstance(node, Not):
        return has_quantifier(node.body)
    if isinstance(node, (And, Or)):
        return any(has_quantifier(p) for p in node.parts)
    return False


# --- grounding ----------------------------------------------------------------


def ground(pf: ParsedFormula, values) -> ParsedFormula:
    """Specialize all parameters to integers; the result has only constant
    integer coefficients and no parameter declarations."""
    params = pf.params
    if not isinstance(values, dict):
        values = dict(zip(params, values))
    missing = [p for p in params if p not in values]
    if missing:
        raise ValueError(f"missing parameter values for {missing}")
    tau_value = values.get(pf.nonlinear_param, 0)

    def ground_term(term: Term) -> Term:
        const = term.constant(tau_value)
        coeffs = {}
        for v, c in term.coeffs:
            k = c(tau_value)
            if v in values:
                const += k * values[v]
            else:
                coeffs[v] = Poly((k,))
        return Term.build(coeffs, Poly((const,)))

    root = map_atoms(pf.root, lambda a: _map_atom_terms(a, ground_term))
    decls = tuple(d for d in pf.decls if d.kind != "param")
    return ParsedFormula(decls, root, None)


# --- negation normal form ------------------------------------------------------


def nnf(node, negate: bool = False):
    """Negation normal form over the integers.

    not (a <= b)  ->  b + 1 <= a
    not (a = b)   ->  (a <= b - 1) or (b <= a - 1)
    not (d | e)   ->  (d | e - 1) or ... or (d | e - (d-1))
    Negation is pushed through boolean connectives and quantifiers; the
    result contains no Not nodes.
    """
    if isinstance(node, Bool):
        return Bool(node.value != negate)
    if isinstance(node, Le):
        return Le(node.rhs + 1, node.lhs) if negate else node
    if isinstance(node, Eq):
        if not negate:
            return node
        return make_or([Le(node.lhs, node.rhs - 1), Le(node.rhs, node.lhs - 1)])
    if isinstance(node, Div):
        if not negate:
            return node
        return make_or([Div(node.divisor, node.term - j)
                        for j in range(1, node.divisor)])
    if isinstance(node, Not):
        return nnf(node.body, not negate)
    if isinstance(node, And):
        parts = [nnf(p, negate) for p in node.parts]
        return make_or(parts) if negate else make_and(parts)
    if isinstance(node, Or):
        parts = [nnf(p, negate) for p in node.parts]
        return make_and(parts) if negate else make_or(parts)
    if isinstance(node, Exists):
        body = nnf(node.body, negate)
        return Forall(node.var, body) if negate else Exists(node.var, body)
    if isinstance(node, Forall):
        body = nnf(node.body, negate)
        return Exists(node.var, body) if negate else Forall(node.var, body)
    raise TypeError(f"not a formula node: {node!r}")


def normalize_nnf(pf_or_node):
    if isinstance(pf_or_node, ParsedFormula):
        return dataclasses.replace(pf_or_node, root=nnf(pf_or_node.root))
    return nnf(pf_or_node)


def fold_constants(node):
    """Decide variable-free atoms and prune trivial boolean structure."""
    if isinstance(node, Bool):
        return node
    if isinstance(node, (Le, Eq)):
        k = node.gap().int_constant()
        if k is None:
            return node
        if isinstance(node, Le):
            return Bool(k <= 0)
        return Bool(k == 0)
    if isinstance(node, Div):
        k = node.term.int_constant()
        if k is None:
            return node
        return Bool(k % node.divisor == 0)
    if isinstance(node, Not):
        inner = fold_constants(node.body)
        if isinstance(inner, Bool):
            return Bool(not inner.value)
        return Not(inner)
    if isinstance(node, And):
        return make_and([fold_constants(p) for p in node.parts])
    if isinstance(node, Or):
        return make_or([fold_constants(p) for p in node.parts])
    if isinstance(node, Exists):
        body = fold_constants(node.body)
        return body if isinstance(body, Bool) else Exists(node.var, body)
    if isinstance(node, Forall):
        body = fold_constants(node.body)
        return body if isinstance(body, Bool) else Forall(node.var, body)
    raise TypeError(f"not a formula node: {node!r}")


# --- evaluation (ground formulas, no quantifiers) -------------------------------


def eval_ground(node, env: dict) -> bool:
    """Truth value of a quantifier-free ground formula at an assignment."""
    if isinstance(node, Bool):
        return node.value
    if isinstance(node, Le):
        return node.gap().eval(env) <= 0
    if isinstance(node, Eq):
        return node.gap().eval(env) == 0
    if isinstance(node, Div):
        return node.term.eval(env) % node.divisor == 0
    if isinstance(node, Not):
        return not eval_ground(node.body, env)
    if isinstance(node, And):
        return all(eval_ground(p, env) for p in node.parts)
    if isinstance(node, Or):
        return any(eval_ground(p, env) for p in node.parts)
    raise TypeError(f"cannot evaluate {type(node).__name__} without quantifier search")


# --- printing -------------------------------------------------------------------

_LEVEL_QUANT = 0
_LEVEL_OR = 1
_LEVEL_AND = 2
_LEVEL_NEG = 3


def _format_node(node, level: int) -> str:
    if isinstance(node, Bool):
        return "true" if node.value else "false"
    if isinstance(node, Le):
        return f"{node.lhs.format()} <= {node.rhs.format()}"
    if isinstance(node, Eq):
        return f"{node.lhs.format()} = {node.rhs.format()}"
    if isinstance(node, Div):
        return f"{node.divisor} | {node.term.format()}"
    if isinstance(node, Not):
        return f"not ({_format_node(node.body, _LEVEL_QUANT)})"
    if isinstance(node, And):
        body = " and ".join(_format_node(p, _LEVEL_AND) for p in node.parts)
        return f"({body})" if level > _LEVEL_AND else body
    if isinstance(node, Or):
        body = " or ".join(_format_node(p, _LEVEL_OR + 1) for p in node.parts)
        return f"({body})" if level > _LEVEL_OR else body
    if isinstance(node, Exists):
        body = f"exists {node.var}. {_format_node(node.body, _LEVEL_QUANT)}"
        return f"({body})" if level > _LEVEL_QUANT else body
    if isinstance(node, Forall):
        body = f"forall {node.var}. {_format_node(node.body, _LEVEL_QUANT)}"
        return f"({body})" if level > _LEVEL_QUANT else body
    raise TypeError(f"not a formula node: {node!r}")


def format_formula(pf: ParsedFormula) -> str:
    decls = " ".join(f"{d.kind} {d.name};" for d in pf.decls)
    body = _format_node(pf.root, _LEVEL_QUANT)
    return f"{decls} {body}".strip()
