"""Parser and printer for ``.mzia`` model documents and schema literals.

Grammar::

    model     := "automaton" ID "{" decl* "}"
    decl      := varDecl | clockDecl | locvarDecl | constDecl | actionDecl
               | locationDecl | transDecl | initDecl | schemaDecl
    varDecl   := ("continuous" | "discrete") varName (":" type)? ";"
    clockDecl := "clock" ID ";"
    locvarDecl:= "locvar" ID ";"
    constDecl := "const" ID "=" rational ";"
    actionDecl:= ("input" | "output" | "internal") ID ("," ID)* ";"
    locationDecl := "location" ID "{" ("rate" varName "=" rational ";")*
                    ("inv" rect ("," rect)* ";")? "}"
    transDecl := "trans" ID "->" ID "on" ID ("when" rect ("," rect)*)?
                 ("reset" varName ":=" rational (","? varName ":=" rational)*)? ";"
    initDecl  := "init" ID "{" (varName "=" rational ";")+ "}"
    schemaDecl:= "schema" ("state" ID | "action" ID) schema ";"?
    rect      := varName ("<=" | "<" | ">=" | ">") rational
               | rational ("<=" | "<") varName
    schema    := "[" (decl (";" decl)*)? ("|" atom (";" atom)*)? "]"
    type      := "real" | "nat" | "int" | "int" INT ".." INT | INT ".." INT
               | "{" ID ("," ID)* "}"

Comments run from ``//`` or ``#`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import ModelError, MziaError, ParseError, SchemaError
from .expr import BinOp, BoolOp, Call, Cmp, Expr, In, Name, Neg, Not, Num, to_text
from .model import ACTION_KINDS, MZIA, ActionDecl, Location, RectConstraint, TransitionDecl, ValidationReport, validate_model
from .zschema import DEFAULT_CONSTANTS, EnumSet, IntRange, Integer, Real, VarDecl, ZSchema, ZType

__all__ = [
    "ModelSource",
    "ValidationFailed",
    "parse_model",
    "parse_schema",
    "parse_rational",
    "format_model",
    "format_schema",
]

_UNICODE = {"≤": "<=", "≥": ">=", "≠": "/=", "−": "-", "∈": "in", "∧": ";", "⌊": "floor(", "⌋": ")", "×": "*", "·": "*"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<num>\d+(\.\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*[?!]?)
  | (?P<op>:=|<=|>=|/=|->|\.\.|[-+*/<>=(){}\[\];,:|])
    """,
    re.VERBOSE,
)

_FUNCS = ("floor", "ceil", "even", "odd", "abs")
_KEYWORDS = {"and", "or", "not", "in", "div", "mod"}


@dataclass(frozen=True)
class ModelSource:
    text: str
    name: str = "<string>"


@dataclass(frozen=True)
class Token:
    kind: str  # num id op eof
    text: str
    line: int
    col: int


class ValidationFailed(MziaError):
    """Parsed model violates structural rules; ``report`` holds the findings."""

    def __init__(self, report: ValidationReport, name: str = ""):
        self.report = report
        lines = [f"{name}: model is invalid" if name else "model is invalid"]
        lines += [f"  error {f}" for f in report.errors]
        super().__init__("\n".join(lines))


def _normalise_unicode(text: str) -> str:
    for k, v in _UNICODE.items():
        text = text.replace(k, v)
    return text


def tokenize(text: str) -> list[Token]:
    text = _normalise_unicode(text)
    out, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            src = text.splitlines()[line - 1] if text.splitlines() else ""
            raise ParseError(line, col, "a token", repr(text[pos]), src)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("num", "id", "op"):
                out.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "end of input", line, col))
    return out


class _Parser:
    def __init__(self, text: str, constants: Mapping[str, Fraction] | None = None):
        self.lines = _normalise_unicode(text).splitlines()
        self.toks = tokenize(text)
        self.i = 0
        self.constants = dict(DEFAULT_CONSTANTS if constants is None else constants)

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        src = self.lines[tok.line - 1] if 0 < tok.line <= len(self.lines) else ""
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(tok.line, tok.col, expected, found, src)

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "id") and self.tok.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(repr(text))
        return t

    def ident(self, what: str = "an identifier") -> Token:
        if self.tok.kind != "id" or self.tok.text in _KEYWORDS:
            raise self.error(what)
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        neg = bool(self.accept("-"))
        if self.tok.kind != "num" or "." in self.tok.text:
            raise self.error("an integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    def rational(self) -> Fraction:
        neg = bool(self.accept("-"))
        if self.tok.kind == "id" and self.tok.text in self.constants:
            v = Fraction(self.constants[self.tok.text])
            self.i += 1
            return -v if neg else v
        if self.tok.kind != "num":
            raise self.error("a rational number")
        v = Fraction(self.tok.text)
        self.i += 1
        if self.at("/") and self.peek().kind == "num":
            self.i += 1
            d = Fraction(self.tok.text)
            self.i += 1
            if d == 0:
                raise self.error("a non-zero denominator", self.toks[self.i - 1])
            v = v / d
        return -v if neg else v

    # -- types and schemas ----------------------------------------------------

    def ztype(self) -> ZType:
        if self.accept("real"):
            return Real()
        if self.accept("nat"):
            return Integer(True)
        if self.accept("int"):
            if self.tok.kind == "num" or self.at("-"):
                lo = self.integer()
                self.expect("..")
                return IntRange(lo, self.integer())
            return Integer(False)
        if self.tok.kind == "num" or self.at("-"):
            lo = self.integer()
            self.expect("..")
            return IntRange(lo, self.integer())
        if self.accept("{"):
            labels = [self.ident("a label").text]
            while self.accept(","):
                labels.append(self.ident("a label").text)
            self.expect("}")
            return EnumSet(tuple(labels))
        raise self.error("a type (real, nat, int, int LO..HI, {labels})")

    def schema(self) -> ZSchema:
        self.expect("[")
        decls: list[VarDecl] = []
        atoms: list[Expr] = []
        if not self.at("|", "]"):
            decls.append(self.var_decl())
            while self.accept(";", ","):
                if self.at("|", "]"):
                    break
                decls.append(self.var_decl())
        if self.accept("|"):
            atoms.extend(self.atom_list())
            while self.accept(";"):
                if self.at("]"):
                    break
                atoms.extend(self.atom_list())
        self.expect("]")
        try:
            return ZSchema(tuple(decls), tuple(atoms), constants=tuple(sorted(self.constants.items())))
        except SchemaError as exc:
            raise ParseError(self.tok.line, self.tok.col, "a well-formed schema", str(exc)) from None

    def var_decl(self) -> VarDecl:
        name = self.ident("a variable name").text
        self.expect(":")
        return VarDecl(name, self.ztype())

    # -- expressions ---------------------------------------------------------

    def atom_list(self) -> list[Expr]:
        """One atom; top-level conjunctions and chained comparisons are split."""
        e = self.or_expr()
        out: list[Expr] = []

        def flatten(x):
            if isinstance(x, BoolOp) and x.op == "and":
                flatten(x.left)
                flatten(x.right)
            else:
                out.append(x)

        flatten(e)
        return out

    def or_expr(self) -> Expr:
        e = self.and_expr()
        while self.accept("or"):
            e = BoolOp("or", e, self.and_expr())
        return e

    def and_expr(self) -> Expr:
        e = self.not_expr()
        while self.accept("and"):
            e = BoolOp("and", e, self.not_expr())
        return e

    def not_expr(self) -> Expr:
        if self.accept("not"):
            return Not(self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        first = self.sum()
        if self.accept("in"):
            self.expect("{")
            items = [self.sum()]
            while self.accept(","):
                items.append(self.sum())
            self.expect("}")
            return In(first, tuple(items))
        chain: list[Expr] = []
        left = first
        while self.at("<", "<=", "=", "/=", ">=", ">"):
            op = self.tok.text
            self.i += 1
            right = self.sum()
            chain.append(Cmp(op, left, right))
            left = right
        if not chain:
            return first
        e = chain[0]
        for c in chain[1:]:
            e = BoolOp("and", e, c)
        return e

    def sum(self) -> Expr:
        e = self.term()
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.at("*", "/", "div", "mod"):
                op = self.tok.text
                self.i += 1
                e = BinOp(op, e, self.unary())
            elif isinstance(e, Num) and self.tok.kind == "id" and self.tok.text not in _KEYWORDS:
                # implicit product such as 30x!
                e = BinOp("*", e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        if self.accept("-"):
            inner = self.unary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(Fraction(t.text))
        if self.accept("("):
            e = self.or_expr()
            self.expect(")")
            return e
        if t.kind == "id" and t.text not in _KEYWORDS:
            self.i += 1
            if t.text in _FUNCS and self.accept("("):
                args = [self.sum()]
                while self.accept(","):
                    args.append(self.sum())
                self.expect(")")
                return Call(t.text, tuple(args))
            return Name(t.text)
        raise self.error("an expression")

    # -- model -----------------------------------------------------------------

    def rect(self) -> RectConstraint:
        if self.tok.kind == "num" or self.at("-"):
            value = self.rational()
            if not self.at("<=", "<"):
                raise self.error("'<=' or '<'")
            op = self.tok.text
            self.i += 1
            var = self.ident("a variable name").text
            return RectConstraint(var, {"<=": ">=", "<": ">"}[op], value)
        var = self.ident("a variable name").text
        if not self.at("<=", "<", ">=", ">"):
            raise self.error("a comparison operator")
        op = self.tok.text
        self.i += 1
        return RectConstraint(var, op, self.rational())

    def rects(self) -> list[RectConstraint]:
        out = [self.rect()]
        while self.accept(","):
            out.append(self.rect())
        return out

    def model(self) -> MZIA:
        self.expect("automaton")
        name = self.ident("an automaton name").text
        self.expect("{")
        continuous: list[VarDecl] = []
        discrete: list[VarDecl] = []
        actions: list[tuple[str, str]] = []
        locations: list[Location] = []
        transitions: list[TransitionDecl] = []
        action_schemas: dict[str, ZSchema] = {}
        state_templates: dict[str, ZSchema] = {}
        init_loc = None
        init_val: list[tuple[str, Fraction]] = []
        clock = "clock"
        loc_var = "l"
        while not self.accept("}"):
            t = self.tok
            if self.accept("continuous", "discrete"):
                vname = self.ident("a variable name").text
                vtype: ZType = Real()
                if self.accept(":"):
                    vtype = self.ztype()
                elif t.text == "discrete":
                    raise self.error("':' and a type for a discrete variable")
                (continuous if t.text == "continuous" else discrete).append(VarDecl(vname, vtype))
                self.expect(";")
            elif self.accept("clock"):
                clock = self.ident("a clock name").text
                self.expect(";")
            elif self.accept("locvar"):
                loc_var = self.ident("a variable name").text
                self.expect(";")
            elif self.accept("const"):
                cname = self.ident("a constant name").text
                self.expect("=")
                self.constants[cname] = self.rational()
                self.expect(";")
            elif self.at(*ACTION_KINDS):
                kind = self.tok.text
                self.i += 1
                actions.append((self.ident("an action name").text, kind))
                while self.accept(","):
                    actions.append((self.ident("an action name").text, kind))
                self.expect(";")
            elif self.accept("location"):
                lname = self.ident("a location name").text
                self.expect("{")
                rates: list[tuple[str, Fraction]] = []
                inv: list[RectConstraint] = []
                while self.accept("rate"):
                    v = self.ident("a variable name").text
                    self.expect("=")
                    rates.append((v, self.rational()))
                    self.expect(";")
                if self.accept("inv"):
                    inv = self.rects()
                    self.expect(";")
                self.expect("}")
                locations.append(Location(lname, tuple(rates), tuple(inv), line=t.line))
            elif self.accept("trans"):
                src = self.ident("a location name").text
                self.expect("->")
                dst = self.ident("a location name").text
                self.expect("on")
                act = self.ident("an action name").text
                guard: list[RectConstraint] = []
                resets: list[tuple[str, Fraction]] = []
                if self.accept("when"):
                    guard = self.rects()
                if self.accept("reset"):
                    while True:
                        v = self.ident("a variable name").text
                        self.expect(":=")
                        resets.append((v, self.rational()))
                        self.accept(",")
                        if self.at(";"):
                            break
                self.expect(";")
                transitions.append(TransitionDecl(src, act, dst, tuple(guard), tuple(resets), line=t.line))
            elif self.accept("init"):
                if init_loc is not None:
                    raise self.error("a single init declaration", t)
                init_loc = self.ident("a location name").text
                self.expect("{")
                while not self.accept("}"):
                    v = self.ident("a variable name").text
                    self.expect("=")
                    init_val.append((v, self.rational()))
                    self.expect(";")
            elif self.accept("schema"):
                if self.accept("state"):
                    target, table = self.ident("a location name").text, state_templates
                elif self.accept("action"):
                    target, table = self.ident("an action name").text, action_schemas
                else:
                    raise self.error("'state' or 'action'")
                table[target] = self.schema()
                self.accept(";")
            else:
                raise self.error("a declaration")
        if self.tok.kind != "eof":
            raise self.error("end of input")
        if init_loc is None:
            raise self.error("an init declaration")
        consts = tuple(sorted(self.constants.items()))
        action_decls = tuple(
            ActionDecl(n, k, action_schemas.get(n, ZSchema(constants=consts))) for n, k in actions
        )
        for n in action_schemas:
            if n not in {a for a, _ in actions}:
                raise ModelError(f"schema given for undeclared action {n!r}")
        locs = []
        for loc in locations:
            tmpl = state_templates.pop(loc.name, None)
            locs.append(Location(loc.name, loc.rates, loc.invariant, tmpl, line=loc.line))
        if state_templates:
            raise ModelError(f"state schema for undeclared location(s) {sorted(state_templates)}")
        return MZIA(
            name=name,
            continuous=tuple(continuous),
            discrete=tuple(discrete),
            locations=tuple(locs),
            transitions=tuple(transitions),
            actions=action_decls,
            initial_location=init_loc,
            initial_valuation=tuple(init_val),
            clock=clock,
            loc_var=loc_var,
            constants=consts,
        )


def parse_rational(text: str) -> Fraction:
    p = _Parser(text)
    v = p.rational()
    if p.tok.kind != "eof":
        raise p.error("end of input")
    return v


def parse_schema(text: str, constants: Mapping[str, Fraction] | None = None) -> ZSchema:
    p = _Parser(text, constants)
    s = p.schema()
    if p.tok.kind != "eof":
        raise p.error("end of input")
    return s


def parse_model(src: ModelSource | str, validate: bool = True) -> MZIA:
    """Parse a model document; with ``validate`` structural errors raise :class:`ValidationFailed`."""
    if isinstance(src, str):
        src = ModelSource(src)
    m = _Parser(src.text).model()
    if validate:
        report = validate_model(m)
        if report.errors:
            raise ValidationFailed(report, src.name)
    return m


# -- printing ------------------------------------------------------------------


def _num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_schema(s: ZSchema) -> str:
    if s.hidden:
        raise ValueError("schemas with hidden variables have no literal syntax")
    decls = "; ".join(f"{d.name} : {d.type}" for d in s.decls)
    atoms = "; ".join(to_text(a) for a in s.atoms)
    if atoms:
        return f"[ {decls} | {atoms} ]" if decls else f"[ | {atoms} ]"
    return f"[ {decls} ]" if decls else "[ ]"


def format_model(m: MZIA) -> str:
    out = [f"automaton {m.name} {{"]
    defaults = dict(DEFAULT_CONSTANTS)
    for k, v in m.constants:
        if defaults.get(k) != v:
            out.append(f"  const {k} = {_num(v)};")
    for d in m.continuous:
        out.append(f"  continuous {d.name};")
    for d in m.discrete:
        out.append(f"  discrete {d.name} : {d.type};")
    if m.clock != "clock":
        out.append(f"  clock {m.clock};")
    if m.loc_var != "l":
        out.append(f"  locvar {m.loc_var};")
    for a in m.actions:
        out.append(f"  {a.kind} {a.name};")
    for loc in m.locations:
        body = " ".join(f"rate {v} = {_num(r)};" for v, r in loc.rates)
        if loc.invariant:
            body += " inv " + ", ".join(str(r) for r in loc.invariant) + ";"
        out.append(f"  location {loc.name} {{ {body} }}")
    for t in m.transitions:
        s = f"  trans {t.source} -> {t.target} on {t.action}"
        if t.guard:
            s += " when " + ", ".join(str(r) for r in t.guard)
        if t.resets:
            s += " reset " + ", ".join(f"{v} := {_num(x)}" for v, x in t.resets)
        out.append(s + ";")
    init = " ".join(f"{v} = {_num(x)};" for v, x in m.initial_valuation)
    out.append(f"  init {m.initial_location} {{ {init} }}")
    for loc in m.locations:
        if loc.template is not None:
            out.append(f"  schema state {loc.name} {format_schema(loc.template)};")
    for a in m.actions:
        if a.schema.decls or a.schema.atoms:
            out.append(f"  schema action {a.name} {format_schema(a.schema)};")
    out.append("}")
    return "\n".join(out) + "\n"
