"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured error objects; the message is for humans.
"""
from __future__ import annotations


class QpcountError(Exception):
    code = "ERROR"


class ParseError(QpcountError):
    code = "PARSE_ERROR"

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class UndeclaredVariable(ParseError):
    code = "UNDECLARED_VARIABLE"


class NonlinearTerm(ParseError):
    code = "NONLINEAR_TERM"


class PolyDivisionByZero(QpcountError):
    code = "DIVISION_BY_ZERO_POLY"


class ZeroDivisorAt(QpcountError):
    code = "ZERO_DIVISOR_AT"

    def __init__(self, t):
        self.t = t
        super().__init__(f"divisor polynomial vanishes at t = {t}")


class FitFailed(QpcountError):
    code = "FIT_FAILED"


class NonterminationGuard(QpcountError):
    code = "NONTERMINATION_GUARD"


class NotCovered(QpcountError):
    code = "NOT_COVERED"


class AmbiguousPiece(QpcountError):
    code = "AMBIGUOUS"


class NonconstantCoefficient(QpcountError):
    code = "NONCONSTANT_COEFFICIENT"


class BoxTooLarge(QpcountError):
    code = "BOX_TOO_LARGE"


class CannotDecideFiniteness(QpcountError):
    code = "CANNOT_DECIDE_FINITENESS"


class NotCoprime(QpcountError):
    code = "NOT_COPRIME"


class NeverCoprime(QpcountError):
    code = "NEVER_COPRIME"


class NonIntegralVertex(QpcountError):
    code = "NON_INTEGRAL_VERTEX"


class UnboundedPolyhedron(QpcountError):
    code = "UNBOUNDED_POLYHEDRON"


class EmptySet(QpcountError):
    code = "EMPTY_SET"


class VertexCountUnstable(QpcountError):
    code = "VERTEX_COUNT_UNSTABLE"


class NonRationalInput(QpcountError):
    code = "NON_RATIONAL_INPUT"
