"""Z schemas over finite discrete domains and zone-constrained reals.

A schema is a set of declarations and a conjunction of atoms, optionally
preceded by an existential prefix of *hidden* declarations (the result of
hiding).  For a fixed assignment of the visible discrete variables its
continuous part is a finite union of convex polyhedra, one per assignment of
the hidden discrete variables, each projected with Fourier-Motzkin.  All
decision procedures below reduce to that representation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

from . import linear
from .dcm import Bound, LowerBound, Relative, ZoneConstraint
from .errors import OracleCapacityError, SchemaError, UndecidableFragmentError
from .expr import BinOp, Cmp, Expr, Name, Num, eval_atom, evaluate, names, rename, to_text

__all__ = [
    "EnumSet",
    "IntRange",
    "Integer",
    "Real",
    "ZType",
    "VarDecl",
    "ZSchema",
    "Implies",
    "And",
    "Forall",
    "DEFAULT_CONSTANTS",
    "evaluate_schema",
    "hide",
    "conj",
    "tv",
    "counterexample",
    "rcl",
    "rcl_counterexample",
    "rcz",
    "geq_bruteforce",
    "bruteforce_valid",
    "satisfiable",
    "atoms_from_zone",
    "GUARDED",
    "STRICT",
]

GUARDED = "guarded"
STRICT = "strict"
_MODES = (GUARDED, STRICT)

DEFAULT_CONSTANTS: tuple[tuple[str, Fraction], ...] = (("pi", Fraction(314159, 100000)),)


# -- types ---------------------------------------------------------------


@dataclass(frozen=True)
class EnumSet:
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise SchemaError("enumeration type needs at least one label")

    def values(self) -> tuple[str, ...]:
        return self.labels

    def __str__(self) -> str:
        return "{" + ", ".join(self.labels) + "}"


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise SchemaError(f"empty integer range {self.lo}..{self.hi}")

    def values(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(i) for i in range(self.lo, self.hi + 1))

    def __str__(self) -> str:
        return f"int {self.lo}..{self.hi}"


@dataclass(frozen=True)
class Integer:
    """Unbounded integers (``nat``/``int``); outside the decidable fragment."""

    natural: bool = True

    def __str__(self) -> str:
        return "nat" if self.natural else "int"


@dataclass(frozen=True)
class Real:
    def __str__(self) -> str:
        return "real"


ZType = Union[EnumSet, IntRange, Integer, Real]


@dataclass(frozen=True)
class VarDecl:
    """A declared variable; the decoration is the trailing ``?`` or ``!``."""

    name: str
    type: ZType = Real()

    @property
    def decoration(self) -> str:
        if self.name.endswith("?"):
            return "input"
        if self.name.endswith("!"):
            return "output"
        return "internal"

    @property
    def continuous(self) -> bool:
        return isinstance(self.type, Real)

    def __str__(self) -> str:
        return f"{self.name} : {self.type}"


# -- schemas ---------------------------------------------------------------


@dataclass(frozen=True)
class ZSchema:
    decls: tuple[VarDecl, ...] = ()
    atoms: tuple[Expr, ...] = ()
    hidden: tuple[VarDecl, ...] = ()
    constants: tuple[tuple[str, Fraction], ...] = DEFAULT_CONSTANTS

    def __post_init__(self):
        seen = set()
        for d in self.decls + self.hidden:
            if d.name in seen:
                raise SchemaError(f"variable {d.name!r} declared twice")
            seen.add(d.name)
        consts = dict(self.constants)
        labels = {lab for d in self.decls + self.hidden if isinstance(d.type, EnumSet) for lab in d.type.labels}
        cont = {d.name for d in self.decls + self.hidden if d.continuous}
        for a in self.atoms:
            used = names(a)
            for n in used:
                if n not in seen and n not in consts and n not in labels:
                    raise SchemaError(f"undeclared name {n!r} in atom {to_text(a)}")
            if len(used & cont) > 2:
                raise SchemaError(f"atom {to_text(a)} mentions more than two continuous variables")

    @classmethod
    def parse(cls, text: str, constants: Mapping[str, Fraction] | None = None) -> "ZSchema":
        from .dsl import parse_schema

        return parse_schema(text, constants=constants)

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls)

    @property
    def inputs(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls if d.decoration == "input")

    @property
    def outputs(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls if d.decoration == "output")

    @property
    def internals(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls if d.decoration == "internal")

    def decl(self, name: str) -> VarDecl:
        for d in self.decls + self.hidden:
            if d.name == name:
                return d
        raise SchemaError(f"unknown variable {name!r}")

    @property
    def constant_map(self) -> dict[str, Fraction]:
        return dict(self.constants)

    def region(self, discrete: Mapping[str, object]) -> tuple[tuple[linear.Constraint, ...], ...]:
        """Continuous part under a visible discrete assignment, as a union of polyhedra."""
        key = tuple(sorted((d.name, discrete[d.name]) for d in self.decls if not d.continuous))
        return _region(self, key)

    def __str__(self) -> str:
        decls = "; ".join(str(d) for d in self.decls)
        body = "; ".join(to_text(a) for a in self.atoms)
        s = f"[{decls}" + (f" | {body}]" if self.atoms else "]")
        if self.hidden:
            s = "∃ " + "; ".join(str(d) for d in self.hidden) + " • " + s
        return s


def _domain(d: VarDecl):
    if isinstance(d.type, Integer):
        raise UndecidableFragmentError(f"variable {d.name!r} has an unbounded integer type", d.name)
    return d.type.values()


@lru_cache(maxsize=65536)
def _region(schema: ZSchema, key: tuple) -> tuple[tuple[linear.Constraint, ...], ...]:
    env = dict(key)
    consts = schema.constant_map
    hidden_disc = [d for d in schema.hidden if not d.continuous]
    hidden_cont = [d.name for d in schema.hidden if d.continuous]
    symbolic = frozenset(d.name for d in schema.decls + schema.hidden if d.continuous)
    polys: list[tuple[linear.Constraint, ...]] = []
    seen = set()
    for combo in itertools.product(*(_domain(d) for d in hidden_disc)):
        local = dict(env)
        local.update(zip((d.name for d in hidden_disc), combo))
        cons = []
        ok = True
        for a in schema.atoms:
            r = eval_atom(a, local, symbolic, consts)
            if r is False:
                ok = False
                break
            if r is not True:
                cons.append(r)
        if not ok:
            continue
        proj = linear.project(cons, hidden_cont)
        if proj is None:
            continue
        poly = tuple(sorted(proj, key=str))
        if poly not in seen:
            seen.add(poly)
            polys.append(poly)
    return tuple(polys)


def _check_value(d: VarDecl, v) -> object:
    t = d.type
    if isinstance(t, Real):
        if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
            raise SchemaError(f"{d.name} expects a rational value, got {v!r}")
        return Fraction(v)
    if isinstance(t, EnumSet):
        if v not in t.labels:
            raise SchemaError(f"{d.name} expects one of {t.labels}, got {v!r}")
        return v
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)) or Fraction(v).denominator != 1:
        raise SchemaError(f"{d.name} expects an integer, got {v!r}")
    v = Fraction(v)
    if isinstance(t, IntRange) and not t.lo <= v <= t.hi:
        raise SchemaError(f"{d.name} = {v} outside {t}")
    if isinstance(t, Integer) and t.natural and v < 0:
        raise SchemaError(f"{d.name} = {v} is not a natural number")
    return v


def evaluate_schema(sigma: Mapping[str, object], schema: ZSchema) -> bool:
    """``sigma ⊨ schema`` for an assignment of every declared variable."""
    missing = schema.vars - set(sigma)
    if missing:
        raise SchemaError(f"assignment misses {sorted(missing)}")
    vals = {d.name: _check_value(d, sigma[d.name]) for d in schema.decls}
    if not schema.hidden:
        consts = schema.constant_map
        return all(eval_atom(a, vals, frozenset(), consts) is True for a in schema.atoms)
    disc = {d.name: vals[d.name] for d in schema.decls if not d.continuous}
    point = {d.name: vals[d.name] for d in schema.decls if d.continuous}
    return any(all(linear.holds(c, point) for c in poly) for poly in schema.region(disc))


def satisfiable(schema: ZSchema) -> bool:
    """Some assignment satisfies ``schema``."""
    disc = [d for d in schema.decls if not d.continuous]
    for combo in itertools.product(*(_domain(d) for d in disc)):
        if schema.region(dict(zip((d.name for d in disc), combo))):
            return True
    return False


def _fresh(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}#{i}" in taken:
        i += 1
    return f"{base}#{i}"


def hide(schema: ZSchema, to_hide: Iterable[str]) -> ZSchema:
    """Existentially quantify ``to_hide`` (Z schema hiding ``S \\ (x1, ..., xm)``)."""
    to_hide = set(to_hide)
    unknown = to_hide - schema.vars
    if unknown:
        raise SchemaError(f"cannot hide undeclared variable(s) {sorted(unknown)}")
    if not to_hide:
        return schema
    keep = tuple(d for d in schema.decls if d.name not in to_hide)
    moved = tuple(d for d in schema.decls if d.name in to_hide)
    return replace(schema, decls=keep, hidden=schema.hidden + moved)


def _rename_hidden(schema: ZSchema, taken: set[str]) -> ZSchema:
    mapping = {}
    for d in schema.hidden:
        if d.name in taken:
            mapping[d.name] = _fresh(d.name, taken | set(mapping.values()))
    if not mapping:
        return schema
    return replace(
        schema,
        atoms=tuple(rename(a, mapping) for a in schema.atoms),
        hidden=tuple(VarDecl(mapping.get(d.name, d.name), d.type) for d in schema.hidden),
    )


def conj(a: ZSchema, b: ZSchema) -> ZSchema:
    """Schema conjunction: merged declarations, both predicates."""
    decls = list(a.decls)
    by_name = {d.name: d for d in a.decls}
    for d in b.decls:
        if d.name not in by_name:
            decls.append(d)
        elif by_name[d.name].type != d.type:
            raise SchemaError(f"type clash on {d.name!r}: {by_name[d.name].type} vs {d.type}")
    ca, cb = dict(a.constants), dict(b.constants)
    for k in set(ca) & set(cb):
        if ca[k] != cb[k]:
            raise SchemaError(f"constant {k!r} bound differently")
    visible = {d.name for d in decls}
    a2 = _rename_hidden(a, visible | {d.name for d in b.hidden})
    b2 = _rename_hidden(b, visible | {d.name for d in a2.hidden})
    return ZSchema(tuple(decls), a2.atoms + b2.atoms, a2.hidden + b2.hidden, tuple(sorted({**ca, **cb}.items())))


# -- formulas and validity --------------------------------------------------


@dataclass(frozen=True)
class Implies:
    antecedent: ZSchema
    consequent: ZSchema


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Forall:
    """Universal prefix; free variables are universal anyway, so it only documents intent."""

    vars: frozenset[str]
    body: "Formula"


Formula = Union[Implies, And, Forall]


def _merged_decls(a: ZSchema, b: ZSchema) -> list[VarDecl]:
    out: dict[str, VarDecl] = {}
    for d in a.decls + b.decls:
        if d.name in out and out[d.name].type != d.type:
            raise SchemaError(f"type clash on {d.name!r}: {out[d.name].type} vs {d.type}")
        out.setdefault(d.name, d)
    return [out[k] for k in sorted(out)]


def _implication_counterexample(a: ZSchema, b: ZSchema) -> dict | None:
    decls = _merged_decls(a, b)
    for d in a.hidden + b.hidden:
        if not d.continuous:
            _domain(d)
    disc = [d for d in decls if not d.continuous]
    cont = [d.name for d in decls if d.continuous]
    doms = [_domain(d) for d in disc]
    for combo in itertools.product(*doms):
        env = dict(zip((d.name for d in disc), combo))
        ra = a.region({k: env[k] for k in env if k in a.vars})
        if not ra:
            continue
        rb = b.region({k: env[k] for k in env if k in b.vars})
        for poly in ra:
            pt = linear.point_outside_union(poly, rb, cont)
            if pt is not None:
                return {**env, **{v: pt.get(v, Fraction(0)) for v in cont}}
    return None


def counterexample(formula: Formula) -> dict | None:
    """An assignment falsifying ``formula``, or ``None`` when it is valid."""
    if isinstance(formula, Implies):
        return _implication_counterexample(formula.antecedent, formula.consequent)
    if isinstance(formula, Forall):
        return counterexample(formula.body)
    if isinstance(formula, And):
        for part in formula.parts:
            cex = counterexample(part)
            if cex is not None:
                return cex
        return None
    raise TypeError(f"not a formula: {formula!r}")


def tv(formula: Formula) -> bool:
    """Validity of a schema-implication formula over its finite discrete domains."""
    return counterexample(formula) is None


# -- refinement between schemas ---------------------------------------------


def _check_mode(mode: str) -> None:
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")


def rcl_counterexample(m: ZSchema, n: ZSchema, mode: str = GUARDED) -> tuple[bool, dict | None]:
    """``M ≥ N`` with a falsifying assignment when it fails (``None`` if structural)."""
    _check_mode(mode)
    if m.internals or n.internals:
        raise SchemaError("rcl expects schemas whose internal variables are already hidden")
    if m.outputs != n.outputs:
        return False, None
    ins, outs = m.inputs, m.outputs
    if not ins and not outs:
        return True, None
    if not ins:
        f: Formula = Implies(n, m)
    elif not outs:
        f = Implies(m, n)
    elif mode == STRICT:
        f = And((Forall(ins, Implies(n, m)), Forall(outs, Implies(m, n))))
    else:
        dom_m, dom_n = hide(m, outs), hide(n, outs)
        f = And((Implies(dom_m, dom_n), Implies(conj(dom_m, n), m)))
    cex = counterexample(f)
    return cex is None, cex


def rcl(m: ZSchema, n: ZSchema, mode: str = GUARDED) -> bool:
    return rcl_counterexample(m, n, mode)[0]


def rcz(s: ZSchema, t: ZSchema, mode: str = GUARDED) -> bool:
    """Schema refinement ``S ⊒ T``."""
    _check_mode(mode)
    if not s.inputs <= t.inputs or not s.outputs <= t.outputs:
        return False
    io = s.inputs | s.outputs
    return rcl(hide(s, s.vars - io), hide(t, t.vars - io), mode)


# -- brute-force oracle -------------------------------------------------------


def _grid(box: tuple[Fraction, Fraction], step: Fraction) -> list[Fraction]:
    lo, hi = Fraction(box[0]), Fraction(box[1])
    out, v = [], lo
    while v <= hi:
        out.append(v)
        v += step
    return out


class _Brute:
    """Backtracking enumeration straight from the quantifier structure.

    Continuous variables range over a grid plus the boundary values of atoms
    whose other variables are already fixed.  No projection or entailment is
    used.
    """

    def __init__(self, box, step, cap):
        self.grid = _grid(box, step)
        self.eps = Fraction(step) / 2
        self.cap = cap
        self.visited = 0

    def tick(self):
        self.visited += 1
        if self.visited > self.cap:
            raise OracleCapacityError(f"brute-force oracle exceeded {self.cap} assignments")

    def candidates(self, d: VarDecl, atoms: Sequence[Expr], env: dict, consts) -> list:
        if not d.continuous:
            return list(_domain(d))
        vals = set(self.grid)
        for a in atoms:
            used = names(a)
            if d.name not in used:
                continue
            try:
                r = evaluate(a, env, frozenset({d.name}), consts)
            except Exception:
                continue
            if isinstance(r, linear.Constraint) and r.vars == {d.name}:
                c = r.bound / r.coeff(d.name)
                vals.update((c, c - self.eps, c + self.eps))
        return sorted(vals)

    @staticmethod
    def _ready(a: Expr, env: dict, declared: set[str]) -> bool:
        return all(n in env for n in names(a) if n in declared)

    def sat_exists(self, schema: ZSchema, env: dict, free: Sequence[VarDecl], extra_atoms=()) -> bool:
        """Does some assignment of ``free`` (plus hidden vars) satisfy ``schema``?"""
        consts = schema.constant_map
        order = [d for d in free if not d.continuous] + [d for d in schema.hidden if not d.continuous]
        order += sorted((d for d in list(free) + list(schema.hidden) if d.continuous), key=lambda d: d.name)
        declared = {d.name for d in schema.decls + schema.hidden}
        atoms = list(schema.atoms)

        def ok(env):
            for a in atoms:
                if self._ready(a, env, declared) and eval_atom(a, env, frozenset(), consts) is not True:
                    return False
            return True

        def go(i, env):
            self.tick()
            if not ok(env):
                return False
            if i == len(order):
                return True
            d = order[i]
            for v in self.candidates(d, atoms + list(extra_atoms), env, consts):
                env[d.name] = v
                if go(i + 1, env):
                    del env[d.name]
                    return True
                del env[d.name]
            return False

        return go(0, dict(env))

    def assignments(self, decls: Sequence[VarDecl], schemas: Sequence[ZSchema], base: dict) -> Iterator[dict]:
        disc = [d for d in decls if not d.continuous]
        cont = sorted((d for d in decls if d.continuous), key=lambda d: d.name)
        atoms = [a for s in schemas for a in s.atoms]
        consts: dict = {}
        for s in schemas:
            consts.update(s.constant_map)
        for combo in itertools.product(*(_domain(d) for d in disc)):
            env = dict(base)
            env.update(zip((d.name for d in disc), combo))

            def go(i, env):
                if i == len(cont):
                    self.tick()
                    yield dict(env)
                    return
                d = cont[i]
                for v in self.candidates(d, atoms, env, consts):
                    env[d.name] = v
                    yield from go(i + 1, env)
                    del env[d.name]

            yield from go(0, env)


def geq_bruteforce(
    a: ZSchema,
    b: ZSchema,
    mode: str = GUARDED,
    box: tuple[Fraction, Fraction] = (Fraction(-3), Fraction(3)),
    step: Fraction = Fraction(1, 6),
    cap: int = 2_000_000,
) -> bool:
    """Decide ``A ≥ B`` by enumeration; independent oracle for :func:`rcl`."""
    _check_mode(mode)
    if a.internals or b.internals:
        raise SchemaError("geq_bruteforce expects schemas without visible internal variables")
    if a.inputs != b.inputs or a.outputs != b.outputs:
        return False
    bf = _Brute(box, step, cap)
    ins = [a.decl(n) for n in sorted(a.inputs)]
    outs = [a.decl(n) for n in sorted(a.outputs)]
    for d in ins + outs:
        if b.decl(d.name).type != d.type:
            raise SchemaError(f"type clash on {d.name!r}")

    def sat(s, env):
        return bf.sat_exists(s, env, [])

    if not ins and not outs:
        return True
    if not ins:
        return all(not sat(b, s) or sat(a, s) for s in bf.assignments(outs, [a, b], {}))
    if not outs:
        return all(not sat(a, r) or sat(b, r) for r in bf.assignments(ins, [a, b], {}))
    if mode == STRICT:
        return all(sat(a, s) == sat(b, s) for s in bf.assignments(ins + outs, [a, b], {}))
    for rho in bf.assignments(ins, [a, b], {}):
        if not bf.sat_exists(a, rho, outs):
            continue
        if not bf.sat_exists(b, rho, outs):
            return False
        if any(sat(b, s) and not sat(a, s) for s in bf.assignments(outs, [a, b], rho)):
            return False
    return True


def bruteforce_valid(f: Implies, box=(Fraction(-3), Fraction(3)), step=Fraction(1, 6), cap: int = 2_000_000) -> bool:
    """Validity of ``A ⇒ B`` by enumeration (oracle for :func:`tv`)."""
    a, b = f.antecedent, f.consequent
    bf = _Brute(box, step, cap)
    decls = _merged_decls(a, b)
    for s in bf.assignments(decls, [a, b], {}):
        if bf.sat_exists(a, {k: s[k] for k in a.vars}, []) and not bf.sat_exists(b, {k: s[k] for k in b.vars}, []):
            return False
    return True


# -- zones as atoms -------------------------------------------------------


def _bound_atom(lhs: Expr, lower: Bound | None, upper: Bound | None) -> list[Expr]:
    out: list[Expr] = []
    if lower is not None and upper is not None and not lower.is_inf and not upper.is_inf \
            and lower.value == upper.value and not lower.strict and not upper.strict:
        return [Cmp("=", lhs, Num(upper.value))]
    if lower is not None and not lower.is_inf:
        out.append(Cmp("<" if lower.strict else "<=", Num(lower.value), lhs))
    if upper is not None and not upper.is_inf:
        out.append(Cmp("<" if upper.strict else "<=", lhs, Num(upper.value)))
    return out


def atoms_from_zone(constraints: Sequence[ZoneConstraint]) -> list[Expr]:
    """Schema atoms for a list of zone constraints (equalities collapsed)."""
    lowers: dict[str, Bound] = {}
    uppers: dict[str, Bound] = {}
    order: list[str] = []
    out: list[Expr] = []
    rels = []
    for c in constraints:
        if isinstance(c, Relative):
            rels.append(c)
            continue
        if c.var not in order:
            order.append(c.var)
        (lowers if isinstance(c, LowerBound) else uppers)[c.var] = c.bound
    singles, points = [], []
    for v in order:
        atoms = _bound_atom(Name(v), lowers.get(v), uppers.get(v))
        (points if len(atoms) == 1 and isinstance(atoms[0], Cmp) and atoms[0].op == "=" else singles).extend(atoms)
    for r in rels:
        lhs = BinOp("-", _scaled(r.coeff_a, r.var_a), _scaled(r.coeff_b, r.var_b))
        out.extend(_bound_atom(lhs, r.lower, r.upper))
    return singles + out + points


def _scaled(k: Fraction, v: str) -> Expr:
    return Name(v) if k == 1 else BinOp("*", Num(Fraction(k)), Name(v))
