"""Tokenizer and exact arithmetic-expression parsing.

Expressions parse into monomial maps ``{((var, exp), ...): Fraction}`` so the
same machinery serves univariate polynomial strings ("t^2 - 2*t + 2"),
multivariate piece polynomials ("1/4*t^2 + t + 1"), and the terms of the
formula language.  Division is permitted only by nonzero constants.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError

Monomial = tuple[tuple[str, int], ...]  # sorted ((name, exponent), ...)
MonomialMap = dict[Monomial, Fraction]

KEYWORDS = {
    "param", "free", "exists", "forall", "and", "or", "not", "true", "false",
}

_TWO_CHAR_OPS = ("<=", ">=", "!=")
_ONE_CHAR_OPS = "+-*/^()<>=|;.,:"


@dataclass(frozen=True)
class Token:
    kind: str  # INT | IDENT | OP | END
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("OP", two, line, col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(Token("OP", c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("END", "", line, col))
    return tokens


class Cursor:
    """Position in a token stream with the usual peek/advance helpers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "END":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok.text == text and tok.kind in ("OP", "IDENT"):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)


# --- monomial-map arithmetic ---

def mm_const(c) -> MonomialMap:
    c = Fraction(c)
    return {(): c} if c else {}


def mm_var(name: str) -> MonomialMap:
    return {((name, 1),): Fraction(1)}


def mm_add(a: MonomialMap, b: MonomialMap) -> MonomialMap:
    out = dict(a)
    for mono, c in b.items():
        s = out.get(mono, Fraction(0)) + c
        if s:
            out[mono] = s
        else:
            out.pop(mono, None)
    return out


def mm_neg(a: MonomialMap) -> MonomialMap:
    return {m: -c for m, c in a.items()}


def mm_scale(a: MonomialMap, c) -> MonomialMap:
    c = Fraction(c)
    if not c:
        return {}
    return {m: cc * c for m, cc in a.items()}


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    exps: dict[str, int] = dict(m1)
    for name, e in m2:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


def mm_mul(a: MonomialMap, b: MonomialMap) -> MonomialMap:
    out: dict[Monomial, Fraction] = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            mono = _mono_mul(m1, m2)
            s = out.get(mono, Fraction(0)) + c1 * c2
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
    return out


def mm_pow(a: MonomialMap, n: int) -> MonomialMap:
    out = mm_const(1)
    for _ in range(n):
        out = mm_mul(out, a)
    return out


def mm_as_const(a: MonomialMap) -> Fraction | None:
    if not a:
        return Fraction(0)
    if len(a) == 1 and () in a:
        return a[()]
    return None


# --- expression grammar ---
#
# expr    := prod (("+"|"-") prod)*
# prod    := unary (("*"|"/") unary)*
# unary   := "-" unary | atom
# atom    := INT | IDENT | "(" expr ")"  followed by optional "^" INT

def parse_expression(cur: Cursor) -> MonomialMap:
    out = _parse_prod(cur)
    while True:
        tok = cur.peek()
        if tok.text == "+" and tok.kind == "OP":
            cur.next()
            out = mm_add(out, _parse_prod(cur))
        elif tok.text == "-" and tok.kind == "OP":
            cur.next()
            out = mm_add(out, mm_neg(_parse_prod(cur)))
        else:
            return out


def _parse_prod(cur: Cursor) -> MonomialMap:
    out = _parse_unary(cur)
    while True:
        tok = cur.peek()
        if tok.kind == "OP" and tok.text == "*":
            cur.next()
            out = mm_mul(out, _parse_unary(cur))
        elif tok.kind == "OP" and tok.text == "/":
            cur.next()
            rhs = _parse_unary(cur)
            c = mm_as_const(rhs)
            if c is None:
                raise ParseError("division is only allowed by constants",
                                 tok.line, tok.col)
            if c == 0:
                raise ParseError("division by zero", tok.line, tok.col)
            out = mm_scale(out, Fraction(1) / c)
        else:
            return out


def _parse_unary(cur: Cursor) -> MonomialMap:
    if cur.peek().kind == "OP" and cur.peek().text == "-":
        cur.next()
        return mm_neg(_parse_unary(cur))
    return _parse_atom(cur)


def _parse_atom(cur: Cursor) -> MonomialMap:
    tok = cur.peek()
    if tok.kind == "INT":
        cur.next()
        base = mm_const(int(tok.text))
    elif tok.kind == "IDENT":
        if tok.text in KEYWORDS:
            cur.error(f"{tok.text!r} is a reserved word")
        cur.next()
        base = mm_var(tok.text)
    elif tok.kind == "OP" and tok.text == "(":
        cur.next()
        base = parse_expression(cur)
        cur.expect(")")
    else:
        cur.error(f"expected a number, variable or '(', found {tok.text or 'end of input'!r}")
    if cur.peek().kind == "OP" and cur.peek().text == "^":
        cur.next()
        etok = cur.next()
        if etok.kind != "INT":
            raise ParseError("exponent must be a nonnegative integer literal",
                             etok.line, etok.col)
        base = mm_pow(base, int(etok.text))
    return base


def parse_expression_text(text: str) -> MonomialMap:
    cur = Cursor(tokenize(text))
    out = parse_expression(cur)
    tok = cur.peek()
    if tok.kind != "END":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return out
