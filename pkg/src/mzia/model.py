"""The automaton data model and its structural validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .dcm import LE, LT, LowerBound, UpperBound, ZoneConstraint
from .errors import ModelError, SchemaError
from .expr import Cmp, Name, Num
from .zschema import (
    DEFAULT_CONSTANTS,
    EnumSet,
    Implies,
    Real,
    VarDecl,
    ZSchema,
    atoms_from_zone,
    conj,
    satisfiable,
    tv,
)

__all__ = [
    "RectConstraint",
    "ActionDecl",
    "Location",
    "TransitionDecl",
    "MZIA",
    "Finding",
    "ValidationReport",
    "validate_model",
    "enabled_actions",
    "ACTION_KINDS",
]

ACTION_KINDS = ("input", "output", "internal")


@dataclass(frozen=True)
class RectConstraint:
    """``var op value`` with ``op`` in ``<=, <, >=, >``."""

    var: str
    op: str
    value: Fraction

    def __post_init__(self):
        if self.op not in ("<=", "<", ">=", ">"):
            raise ModelError(f"bad rectangle operator {self.op!r}")

    def zone_constraint(self) -> ZoneConstraint:
        if self.op in ("<=", "<"):
            return UpperBound(self.var, LT(self.value) if self.op == "<" else LE(self.value))
        return LowerBound(self.var, LT(self.value) if self.op == ">" else LE(self.value))

    def holds(self, value: Fraction) -> bool:
        return {
            "<=": value <= self.value,
            "<": value < self.value,
            ">=": value >= self.value,
            ">": value > self.value,
        }[self.op]

    def atom(self):
        return Cmp(self.op, Name(self.var), Num(self.value))

    def __str__(self) -> str:
        v = self.value
        num = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"{self.var} {self.op} {num}"


@dataclass(frozen=True)
class ActionDecl:
    name: str
    kind: str
    schema: ZSchema = ZSchema()


@dataclass(frozen=True)
class Location:
    name: str
    rates: tuple[tuple[str, Fraction], ...]
    invariant: tuple[RectConstraint, ...] = ()
    template: ZSchema | None = None
    line: int = field(default=0, compare=False)

    @property
    def rate_map(self) -> dict[str, Fraction]:
        return dict(self.rates)


@dataclass(frozen=True)
class TransitionDecl:
    source: str
    action: str
    target: str
    guard: tuple[RectConstraint, ...] = ()
    resets: tuple[tuple[str, Fraction], ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def reset_vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.resets)

    def __str__(self) -> str:
        return f"{self.source} -{self.action}-> {self.target}"


@dataclass(frozen=True)
class MZIA:
    name: str
    continuous: tuple[VarDecl, ...]
    locations: tuple[Location, ...]
    transitions: tuple[TransitionDecl, ...]
    actions: tuple[ActionDecl, ...]
    initial_location: str
    initial_valuation: tuple[tuple[str, Fraction], ...]
    discrete: tuple[VarDecl, ...] = ()
    clock: str = "clock"
    loc_var: str = "l"
    constants: tuple[tuple[str, Fraction], ...] = DEFAULT_CONSTANTS

    @property
    def continuous_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.continuous)

    @property
    def zone_vars(self) -> tuple[str, ...]:
        return self.continuous_names + (self.clock,)

    @property
    def location_names(self) -> tuple[str, ...]:
        return tuple(loc.name for loc in self.locations)

    @property
    def action_names(self) -> tuple[str, ...]:
        seen: list[str] = []
        for a in self.actions:
            if a.name not in seen:
                seen.append(a.name)
        return tuple(seen)

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise ModelError(f"unknown location {name!r}")

    def action(self, name: str) -> ActionDecl:
        for a in self.actions:
            if a.name == name:
                return a
        raise ModelError(f"unknown action {name!r}")

    def rates(self, loc: str) -> dict[str, Fraction]:
        """Flow rates in ``loc`` including the clock (rate 1)."""
        r = dict(self.location(loc).rates)
        r[self.clock] = Fraction(1)
        return r

    def outgoing(self, loc: str) -> list[TransitionDecl]:
        self.location(loc)
        return [t for t in self.transitions if t.source == loc]

    def enabled_actions(self, loc: str) -> frozenset[str]:
        return frozenset(t.action for t in self.outgoing(loc))

    def location_schema(self, loc: str) -> ZSchema:
        """Model-level state schema: template, location equality and invariant."""
        location = self.location(loc)
        decls = (VarDecl(self.loc_var, EnumSet(self.location_names)),) + self.continuous
        atoms = (Cmp("=", Name(self.loc_var), Name(loc)),) + tuple(
            atoms_from_zone([r.zone_constraint() for r in location.invariant])
        )
        schema = ZSchema(decls, atoms, constants=self.constants)
        if location.template is not None:
            schema = conj(location.template, schema)
        return schema


def enabled_actions(system, state) -> frozenset[str]:
    """Actions labelling outgoing transitions of ``state`` (model location or zone state)."""
    return system.enabled_actions(state)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    rule: str
    message: str
    context: str = ""

    def __str__(self) -> str:
        ctx = f" [{self.context}]" if self.context else ""
        return f"{self.rule}: {self.message}{ctx}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def rules(self) -> list[str]:
        return [f.rule for f in self.errors]


def _ctx(obj) -> str:
    line = getattr(obj, "line", 0)
    base = f"location {obj.name}" if isinstance(obj, Location) else f"transition {obj}"
    return f"{base}, line {line}" if line else base


def _check_rects(rep: ValidationReport, rects: Iterable[RectConstraint], declared: set[str], ctx: str) -> None:
    lows: dict[str, RectConstraint] = {}
    highs: dict[str, RectConstraint] = {}
    for r in rects:
        if r.var not in declared:
            rep.errors.append(Finding("undeclared-reference", f"undeclared continuous variable {r.var!r}", ctx))
            continue
        bucket = highs if r.op in ("<=", "<") else lows
        old = bucket.get(r.var)
        if old is None or (r.value < old.value if bucket is highs else r.value > old.value):
            bucket[r.var] = r
    for v, lo in lows.items():
        hi = highs.get(v)
        if hi is None:
            continue
        if lo.value > hi.value or (lo.value == hi.value and (lo.op == ">" or hi.op == "<")):
            rep.errors.append(Finding("rectangle", f"empty interval for {v}: {lo} and {hi}", ctx))


def validate_model(m: MZIA) -> ValidationReport:
    rep = ValidationReport()
    cont = set(m.continuous_names)
    locs = set(m.location_names)

    kinds: dict[str, str] = {}
    for a in m.actions:
        if a.kind not in ACTION_KINDS:
            rep.errors.append(Finding("action-kind", f"unknown action kind {a.kind!r}", a.name))
        if a.name in kinds and kinds[a.name] != a.kind:
            rep.errors.append(
                Finding("action-kind-disjointness", f"action {a.name!r} declared both {kinds[a.name]} and {a.kind}", a.name)
            )
        kinds.setdefault(a.name, a.kind)

    bases: dict[str, str] = {}
    for d in m.continuous + m.discrete:
        base = d.name.rstrip("?!")
        if base in bases and bases[base] != d.name:
            rep.errors.append(
                Finding("variable-kind-disjointness", f"{bases[base]!r} and {d.name!r} share a base name", d.name)
            )
        elif base in bases:
            rep.errors.append(Finding("variable-kind-disjointness", f"variable {d.name!r} declared twice", d.name))
        bases[base] = d.name
        if d.name in cont and not isinstance(d.type, Real):
            rep.errors.append(Finding("variable-type", f"continuous variable {d.name!r} must be real", d.name))
    for d in m.discrete:
        if isinstance(d.type, Real):
            rep.errors.append(Finding("variable-type", f"discrete variable {d.name!r} cannot be real", d.name))
    all_vars = {d.name for d in m.continuous + m.discrete}
    if m.clock in all_vars:
        rep.errors.append(Finding("clock-not-variable", f"clock {m.clock!r} clashes with a declared variable", m.clock))
    if m.loc_var in all_vars or m.loc_var == m.clock:
        rep.errors.append(Finding("location-variable", f"location variable {m.loc_var!r} clashes with a declared name"))
    if len(locs) != len(m.locations):
        rep.errors.append(Finding("duplicate-location", "a location is declared twice"))
    if not m.locations:
        rep.errors.append(Finding("initial-location", "automaton has no locations"))

    for loc in m.locations:
        ctx = _ctx(loc)
        rates = loc.rate_map
        for v, r in loc.rates:
            if v == m.clock:
                if r != 1:
                    rep.errors.append(Finding("positive-rate", f"clock rate is fixed at 1, got {r}", ctx))
                continue
            if v not in cont:
                rep.errors.append(Finding("undeclared-reference", f"rate for undeclared variable {v!r}", ctx))
            elif r <= 0:
                rep.errors.append(Finding("positive-rate", f"rate of {v} must be positive, got {r}", ctx))
        for v in sorted(cont - set(rates)):
            rep.errors.append(Finding("rate-coverage", f"no rate given for {v}", ctx))
        _check_rects(rep, loc.invariant, cont, ctx)

    for t in m.transitions:
        ctx = _ctx(t)
        for end in (t.source, t.target):
            if end not in locs:
                rep.errors.append(Finding("undeclared-reference", f"unknown location {end!r}", ctx))
        if t.action not in kinds:
            rep.errors.append(Finding("undeclared-reference", f"unknown action {t.action!r}", ctx))
        _check_rects(rep, t.guard, cont, ctx)
        for v, _ in t.resets:
            if v not in cont:
                rep.errors.append(Finding("undeclared-reference", f"reset of undeclared variable {v!r}", ctx))
        if t.source in locs and t.target in locs:
            src, dst = m.location(t.source).rate_map, m.location(t.target).rate_map
            for v in sorted(cont):
                if v in src and v in dst and src[v] != dst[v] and v not in t.reset_vars:
                    rep.errors.append(
                        Finding(
                            "initialized-rate",
                            f"rate of {v} changes {src[v]} -> {dst[v]} but {v} is not reset",
                            ctx,
                        )
                    )

    if m.initial_location not in locs:
        rep.errors.append(Finding("initial-location", f"initial location {m.initial_location!r} is not declared"))
    init = dict(m.initial_valuation)
    for v in sorted(cont - set(init)):
        rep.errors.append(Finding("initial-valuation", f"no initial value for {v}"))
    for v in sorted(set(init) - cont):
        rep.errors.append(Finding("initial-valuation", f"initial value for undeclared variable {v!r}"))
    if m.initial_location in locs and not rep.errors:
        for r in m.location(m.initial_location).invariant:
            if r.var in init and not r.holds(init[r.var]):
                rep.errors.append(
                    Finding("initial-invariant", f"initial value {r.var} = {init[r.var]} violates {r}", m.initial_location)
                )

    if not rep.errors:
        _schema_compatibility(m, rep)
    return rep


def _schema_compatibility(m: MZIA, rep: ValidationReport) -> None:
    # Literal reading: (F(s) ∧ F(a)) with all of F(s)'s variables hidden is a
    # closed proposition; it must be equivalent to F(t).
    for t in m.transitions:
        try:
            src = m.location_schema(t.source)
            act = m.action(t.action).schema
            dst = m.location_schema(t.target)
            pre_ok = satisfiable(conj(src, act))
            if pre_ok:
                holds = tv(Implies(ZSchema(dst.decls, constants=dst.constants), dst))
            else:
                holds = not satisfiable(dst)
        except SchemaError as exc:
            rep.warnings.append(Finding("schema-compatibility", f"could not be checked: {exc}", _ctx(t)))
            continue
        if not holds:
            why = "source and action schemas are jointly satisfiable" if pre_ok else "source and action schemas contradict"
            rep.warnings.append(
                Finding("schema-compatibility", f"{why} but the target state schema is not equivalent", _ctx(t))
            )
