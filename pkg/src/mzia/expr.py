"""Predicate expressions used inside schemas.

An atom is an expression tree.  Evaluated under an assignment of the discrete
variables, it either yields a plain boolean or, when continuous variables are
left symbolic, a single exact linear constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Union

from .errors import SchemaError
from .linear import Constraint

__all__ = [
    "Expr",
    "Num",
    "Name",
    "Neg",
    "Not",
    "BinOp",
    "BoolOp",
    "Call",
    "Cmp",
    "In",
    "LinExpr",
    "evaluate",
    "eval_atom",
    "names",
    "rename",
    "to_text",
]

Value = Union[Fraction, str, bool]


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / div mod
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str  # and / or
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # floor ceil even odd abs
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= = /= >= >
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class In:
    arg: "Expr"
    items: tuple["Expr", ...]


Expr = Union[Num, Name, Neg, Not, BinOp, BoolOp, Call, Cmp, In]


class LinExpr:
    """``const + sum(coeff * var)`` with exact coefficients."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[str, Fraction] | None = None, const: Fraction = Fraction(0)):
        self.terms = {v: c for v, c in (terms or {}).items() if c != 0}
        self.const = Fraction(const)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        t = dict(self.terms)
        for v, c in other.terms.items():
            t[v] = t.get(v, Fraction(0)) + c
        return LinExpr(t, self.const + other.const)

    def scale(self, k: Fraction) -> "LinExpr":
        return LinExpr({v: c * k for v, c in self.terms.items()}, self.const * k)

    def __neg__(self) -> "LinExpr":
        return self.scale(Fraction(-1))


def _lin(x) -> LinExpr:
    if isinstance(x, LinExpr):
        return x
    if isinstance(x, Fraction):
        return LinExpr(const=x)
    raise SchemaError(f"expected a number, got {x!r}")


def _num(x, what: str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, LinExpr):
        raise SchemaError(f"{what} needs discrete operands, continuous variable(s) {sorted(x.terms)} found")
    raise SchemaError(f"{what} needs numbers, got {x!r}")


def _is_true_bool(x) -> bool:
    if isinstance(x, bool):
        return x
    raise SchemaError(f"expected a truth value, got {x!r}")


_FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<", "/=": "/="}


def evaluate(
    e: Expr,
    env: Mapping[str, Value],
    symbolic: frozenset[str] | set[str] = frozenset(),
    constants: Mapping[str, Fraction] | None = None,
):
    """Evaluate ``e``; names in ``symbolic`` stay as :class:`LinExpr`.

    Unknown names evaluate to themselves as enumeration labels.
    """
    constants = constants or {}

    def ev(e):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Name):
            if e.id in env:
                return env[e.id]
            if e.id in symbolic:
                return LinExpr({e.id: Fraction(1)})
            if e.id in constants:
                return Fraction(constants[e.id])
            return e.id
        if isinstance(e, Neg):
            v = ev(e.arg)
            return -v if isinstance(v, (Fraction, LinExpr)) else _num(v, "negation")
        if isinstance(e, Not):
            return not _is_true_bool(ev(e.arg))
        if isinstance(e, BinOp):
            a, b = ev(e.left), ev(e.right)
            if e.op in ("+", "-"):
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a + b if e.op == "+" else a - b
                la, lb = _lin(a), _lin(b)
                return la + (lb if e.op == "+" else -lb)
            if e.op == "*":
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a * b
                if isinstance(a, Fraction):
                    return _lin(b).scale(a)
                if isinstance(b, Fraction):
                    return _lin(a).scale(b)
                raise SchemaError("product of two continuous expressions is not linear")
            if e.op == "/":
                d = _num(b, "division")
                if d == 0:
                    raise SchemaError("division by zero")
                return a / d if isinstance(a, Fraction) else _lin(a).scale(1 / d)
            if e.op in ("div", "mod"):
                x, y = _num(a, e.op), _num(b, e.op)
                if y == 0:
                    raise SchemaError("division by zero")
                q = (x / y).__floor__()
                return Fraction(q) if e.op == "div" else x - q * y
            raise SchemaError(f"unknown operator {e.op!r}")
        if isinstance(e, BoolOp):
            a = _is_true_bool(ev(e.left))
            if e.op == "and":
                return a and _is_true_bool(ev(e.right))
            return a or _is_true_bool(ev(e.right))
        if isinstance(e, Call):
            args = [ev(a) for a in e.args]
            if len(args) != 1:
                raise SchemaError(f"{e.fn} takes one argument")
            x = _num(args[0], e.fn)
            if e.fn == "floor":
                return Fraction(x.__floor__())
            if e.fn == "ceil":
                return Fraction(x.__ceil__())
            if e.fn == "abs":
                return abs(x)
            if e.fn in ("even", "odd"):
                if x.denominator != 1:
                    return False
                return (x.numerator % 2 == 0) == (e.fn == "even")
            raise SchemaError(f"unknown function {e.fn!r}")
        if isinstance(e, In):
            x = ev(e.arg)
            if isinstance(x, LinExpr):
                raise SchemaError("membership test on a continuous variable")
            return any(x == ev(i) for i in e.items)
        if isinstance(e, Cmp):
            a, b = ev(e.left), ev(e.right)
            if isinstance(a, LinExpr) or isinstance(b, LinExpr):
                diff = _lin(a) + (-_lin(b))
                if not diff.terms:
                    return _compare(e.op, diff.const, Fraction(0))
                if e.op == "/=":
                    raise SchemaError("disequality over continuous variables is outside the zone fragment")
                rel = "==" if e.op == "=" else e.op
                return Constraint.make(diff.terms, rel, -diff.const)
            return _compare(e.op, a, b)
        raise SchemaError(f"not an expression: {e!r}")

    return ev(e)


def _compare(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "/=":
        return a != b
    if isinstance(a, str) or isinstance(b, str):
        raise SchemaError(f"ordering comparison on labels {a!r} {op} {b!r}")
    return {"<": a < b, "<=": a <= b, ">=": a >= b, ">": a > b}[op]


def eval_atom(e: Expr, env, symbolic=frozenset(), constants=None) -> bool | Constraint:
    r = evaluate(e, env, symbolic, constants)
    if isinstance(r, (bool, Constraint)):
        return r
    raise SchemaError(f"atom does not evaluate to a truth value: {to_text(e)}")


def names(e: Expr) -> set[str]:
    if isinstance(e, Name):
        return {e.id}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Not)):
        return names(e.arg)
    if isinstance(e, (BinOp, BoolOp, Cmp)):
        return names(e.left) | names(e.right)
    if isinstance(e, Call):
        return set().union(*(names(a) for a in e.args))
    if isinstance(e, In):
        return names(e.arg).union(*(names(i) for i in e.items))
    raise TypeError(e)


def rename(e: Expr, mapping: Mapping[str, str]) -> Expr:
    f: Callable[[Expr], Expr] = lambda x: rename(x, mapping)
    if isinstance(e, Name):
        return Name(mapping.get(e.id, e.id))
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(f(e.arg))
    if isinstance(e, Not):
        return Not(f(e.arg))
    if isinstance(e, BinOp):
        return BinOp(e.op, f(e.left), f(e.right))
    if isinstance(e, BoolOp):
        return BoolOp(e.op, f(e.left), f(e.right))
    if isinstance(e, Cmp):
        return Cmp(e.op, f(e.left), f(e.right))
    if isinstance(e, Call):
        return Call(e.fn, tuple(f(a) for a in e.args))
    if isinstance(e, In):
        return In(f(e.arg), tuple(f(i) for i in e.items))
    raise TypeError(e)


# -- printing ---------------------------------------------------------------

_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6, "div": 6, "mod": 6, "neg": 7}


def fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_text(e: Expr) -> str:
    """Concrete syntax accepted back by the schema parser."""

    def go(e, ctx: int) -> str:
        if isinstance(e, Num):
            s = fmt_fraction(e.value)
            # fractions bind like division, negatives like unary minus
            if (e.value.denominator != 1 and ctx >= _PREC["/"]) or (e.value < 0 and ctx >= _PREC["neg"]):
                return f"({s})"
            return s
        if isinstance(e, Name):
            return e.id
        if isinstance(e, Neg):
            s = "-" + go(e.arg, _PREC["neg"])
            return f"({s})" if ctx > _PREC["neg"] else s
        if isinstance(e, Not):
            s = "not " + go(e.arg, _PREC["not"])
            return f"({s})" if ctx > _PREC["not"] else s
        if isinstance(e, BinOp):
            p = _PREC[e.op]
            op = f" {e.op} " if e.op in ("div", "mod") else f" {e.op} "
            s = go(e.left, p) + op + go(e.right, p + 1)
            return f"({s})" if ctx > p else s
        if isinstance(e, BoolOp):
            p = _PREC[e.op]
            s = go(e.left, p) + f" {e.op} " + go(e.right, p + 1)
            return f"({s})" if ctx > p else s
        if isinstance(e, Cmp):
            p = _PREC["cmp"]
            s = go(e.left, p + 1) + f" {e.op} " + go(e.right, p + 1)
            return f"({s})" if ctx > p else s
        if isinstance(e, Call):
            return f"{e.fn}(" + ", ".join(go(a, 0) for a in e.args) + ")"
        if isinstance(e, In):
            return go(e.arg, _PREC["cmp"] + 1) + " in {" + ", ".join(go(i, 0) for i in e.items) + "}"
        raise TypeError(e)

    return go(e, 0)
