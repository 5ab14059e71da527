"""Concrete semantics and the finite zone automaton of a model.

Symbolic states are entry zones: the set of valuations (clock included) in
which a location can be entered.  Successors follow the pipeline

    intersect invariant, elapse, intersect invariant, intersect guard,
    reset, intersect target invariant

and exploration stops at a state whose zone is already covered by an
earlier state of the same location.  The global clock grows without bound
and is never reset, so coverage is decided on the zone with the clock
projected away.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .dcm import DCM, LT, LowerBound, UpperBound
from .errors import CapacityError, ModelError
from .expr import Cmp, Name
from .model import MZIA, TransitionDecl
from .zschema import EnumSet, Real, VarDecl, ZSchema, atoms_from_zone, conj

__all__ = [
    "SymState",
    "ZoneState",
    "ZoneAutomaton",
    "initial_symstate",
    "post",
    "build_zone_automaton",
    "synthesize_state_schema",
    "ConcreteState",
    "Step",
    "Trajectory",
    "delay",
    "max_delay",
    "fire",
    "simulate",
    "trajectory_covered",
    "LEAF",
    "REDIRECT",
]

LEAF = "leaf"
REDIRECT = "redirect"


@dataclass(frozen=True)
class SymState:
    location: str
    zone: DCM

    def render(self, unicode: bool = True, hide_clock: str | None = None) -> str:
        return self.zone.render(unicode=unicode, hide=[hide_clock] if hide_clock else ())


@dataclass(frozen=True)
class ZoneState:
    id: str
    sym: SymState
    schema: ZSchema

    @property
    def location(self) -> str:
        return self.sym.location

    @property
    def zone(self) -> DCM:
        return self.sym.zone


@dataclass
class ZoneAutomaton:
    model: MZIA
    states: list[ZoneState]
    initial: list[str]
    transitions: list[tuple[str, str, str]]
    subsumed: dict[str, str] = field(default_factory=dict)
    redirected: set[tuple[str, str, str]] = field(default_factory=set)
    mode: str = LEAF

    def __post_init__(self):
        self._by_id = {s.id: s for s in self.states}
        self._out: dict[str, list[tuple[str, str]]] = {s.id: [] for s in self.states}
        for src, a, dst in self.transitions:
            self._out[src].append((a, dst))

    @property
    def clock(self) -> str:
        return self.model.clock

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.states]

    def state(self, sid: str) -> ZoneState:
        try:
            return self._by_id[sid]
        except KeyError:
            raise ModelError(f"unknown zone state {sid!r}") from None

    def successors(self, sid: str, action: str | None = None) -> list[str]:
        self.state(sid)
        return [d for a, d in self._out[sid] if action is None or a == action]

    def edges(self, sid: str) -> list[tuple[str, str]]:
        return list(self._out[sid])

    def enabled_actions(self, sid: str) -> frozenset[str]:
        self.state(sid)
        return frozenset(a for a, _ in self._out[sid])

    def schema(self, sid: str) -> ZSchema:
        return self.state(sid).schema

    def action_schema(self, action: str) -> ZSchema:
        return self.model.action(action).schema

    def has_action(self, action: str) -> bool:
        return action in self.model.action_names

    def can_delay(self, sid: str) -> bool:
        """Some valuation of the state may let positive time pass within the invariant."""
        s = self.state(sid)
        strict = [UpperBound(r.var, LT(r.value)) for r in self.model.location(s.location).invariant if r.op in ("<=", "<")]
        room = DCM.from_constraints(s.zone.vars, s.zone.rate_map, strict)
        return not s.zone.intersect(room).is_empty()

    def clockless(self, sid: str) -> DCM:
        return self.state(sid).zone.project(self.clock)

    def __len__(self) -> int:
        return len(self.states)


# -- symbolic successor -------------------------------------------------------


def _rect_zone(m: MZIA, loc: str, rects) -> DCM:
    return DCM.from_constraints(m.zone_vars, m.rates(loc), [r.zone_constraint() for r in rects])


def initial_symstate(m: MZIA) -> SymState:
    val = dict(m.initial_valuation)
    val[m.clock] = Fraction(0)
    loc = m.location(m.initial_location)
    for r in loc.invariant:
        if not r.holds(val[r.var]):
            raise ModelError(f"initial value {r.var} = {val[r.var]} violates invariant {r} of {loc.name}")
    return SymState(loc.name, DCM.point(val, m.rates(loc.name), m.zone_vars))


def post(m: MZIA, s: SymState, t: TransitionDecl, trace: list[tuple[str, DCM]] | None = None) -> SymState | None:
    """Entry zone reached from ``s`` through ``t``; ``None`` if unreachable.

    When ``trace`` is a list, every intermediate matrix is appended with a label.
    """
    if t.source != s.location:
        raise ModelError(f"transition {t} does not leave {s.location}")

    def note(label: str, d: DCM) -> DCM:
        if trace is not None:
            trace.append((label, d))
        return d

    inv = note("invariant", _rect_zone(m, s.location, m.location(s.location).invariant))
    z = note("zone ∧ invariant", s.zone.intersect(inv))
    z = note("elapse", z.elapse())
    z = note("elapse ∧ invariant", z.intersect(inv))
    guard = note("guard", _rect_zone(m, s.location, t.guard))
    z = note("elapse ∧ invariant ∧ guard", z.intersect(guard))
    if z.is_empty():
        return None
    z = note("reset", z.reset(t.reset_vars, dict(t.resets), m.rates(t.target)))
    tinv = _rect_zone(m, t.target, m.location(t.target).invariant)
    z = note("reset ∧ target invariant", z.intersect(tinv))
    if z.is_empty():
        return None
    return SymState(t.target, z)


def synthesize_state_schema(m: MZIA, s: SymState) -> ZSchema:
    """Location equality, the zone over the continuous variables, then clock bounds."""
    decls = (
        (VarDecl(m.loc_var, EnumSet(m.location_names)),)
        + tuple(VarDecl(d.name, Real()) for d in m.continuous)
        + (VarDecl(m.clock, Real()),)
    )
    plain = s.zone.project(m.clock)
    lo, hi = s.zone.lower(m.clock), s.zone.upper(m.clock)
    clock_cons = []
    if not lo.is_inf:
        clock_cons.append(LowerBound(m.clock, lo))
    if not hi.is_inf:
        clock_cons.append(UpperBound(m.clock, hi))
    atoms = (
        (Cmp("=", Name(m.loc_var), Name(s.location)),)
        + tuple(atoms_from_zone(plain.to_zone_constraints()))
        + tuple(atoms_from_zone(clock_cons))
    )
    schema = ZSchema(decls, atoms, constants=m.constants)
    tmpl = m.location(s.location).template
    return conj(schema, tmpl) if tmpl is not None else schema


def build_zone_automaton(m: MZIA, subsumption: str = LEAF, cap: int = 10_000) -> ZoneAutomaton:
    """Breadth-first exploration; ids ``s0, s1, ...`` follow discovery order."""
    if subsumption not in (LEAF, REDIRECT):
        raise ValueError(f"subsumption must be {LEAF!r} or {REDIRECT!r}")
    syms: list[SymState] = [initial_symstate(m)]
    clockless: list[DCM] = [syms[0].zone.project(m.clock)]
    transitions: list[tuple[int, str, int]] = []
    subsumed: dict[int, int] = {}
    redirected: set[tuple[int, str, int]] = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for t in m.outgoing(syms[i].location):
            nxt = post(m, syms[i], t)
            if nxt is None:
                continue
            same = next((j for j, s in enumerate(syms) if s == nxt), None)
            if same is not None:
                transitions.append((i, t.action, same))
                continue
            flat = nxt.zone.project(m.clock)
            cover = next(
                (
                    j
                    for j, s in enumerate(syms)
                    if j not in subsumed and s.location == nxt.location and clockless[j].includes(flat)
                ),
                None,
            )
            if cover is not None and subsumption == REDIRECT:
                transitions.append((i, t.action, cover))
                redirected.add((i, t.action, cover))
                continue
            if len(syms) >= cap:
                raise CapacityError(f"zone exploration exceeded {cap} states")
            syms.append(nxt)
            clockless.append(flat)
            j = len(syms) - 1
            transitions.append((i, t.action, j))
            if cover is not None:
                subsumed[j] = cover
            else:
                queue.append(j)

    def sid(i: int) -> str:
        return f"s{i}"

    states = [ZoneState(sid(i), s, synthesize_state_schema(m, s)) for i, s in enumerate(syms)]
    for st in states:
        inv = _rect_zone(m, st.location, m.location(st.location).invariant)
        assert not st.zone.is_empty() and inv.includes(st.zone), st.id
    return ZoneAutomaton(
        model=m,
        states=states,
        initial=[sid(0)],
        transitions=[(sid(a), act, sid(b)) for a, act, b in transitions],
        subsumed={sid(a): sid(b) for a, b in subsumed.items()},
        redirected={(sid(a), act, sid(b)) for a, act, b in redirected},
        mode=subsumption,
    )


# -- concrete semantics -------------------------------------------------------


@dataclass(frozen=True)
class ConcreteState:
    location: str
    valuation: tuple[tuple[str, Fraction], ...]

    @classmethod
    def make(cls, location: str, valuation: Mapping[str, Fraction]) -> "ConcreteState":
        return cls(location, tuple(sorted((k, Fraction(v)) for k, v in valuation.items())))

    @property
    def values(self) -> dict[str, Fraction]:
        return dict(self.valuation)

    def __getitem__(self, var: str) -> Fraction:
        return self.values[var]


@dataclass(frozen=True)
class Step:
    kind: str  # "delay" or "action"
    label: object  # delay amount or action name
    state: ConcreteState


@dataclass
class Trajectory:
    start: ConcreteState
    steps: list[Step] = field(default_factory=list)
    deadlock: bool = False

    @property
    def states(self) -> list[ConcreteState]:
        return [self.start] + [s.state for s in self.steps]


def initial_state(m: MZIA) -> ConcreteState:
    val = dict(m.initial_valuation)
    val[m.clock] = Fraction(0)
    return ConcreteState.make(m.initial_location, val)


def _inv_ok(m: MZIA, loc: str, val: Mapping[str, Fraction]) -> bool:
    return all(r.holds(val[r.var]) for r in m.location(loc).invariant)


def max_delay(m: MZIA, s: ConcreteState) -> tuple[Fraction | None, bool]:
    """Supremum of legal delays and whether it is excluded; ``None`` means unbounded."""
    rates = m.rates(s.location)
    val = s.values
    best: Fraction | None = None
    strict = False
    for r in m.location(s.location).invariant:
        if r.op not in ("<=", "<"):
            continue
        d = (r.value - val[r.var]) / rates[r.var]
        if best is None or d < best or (d == best and r.op == "<"):
            best, strict = d, r.op == "<"
    return best, strict


def delay(m: MZIA, s: ConcreteState, d: Fraction) -> ConcreteState | None:
    """Let ``d`` time units pass, or ``None`` if the invariant breaks on the way."""
    d = Fraction(d)
    if d < 0:
        return None
    rates = m.rates(s.location)
    # invariants are boxes and flows are straight lines, so checking both ends suffices
    if not _inv_ok(m, s.location, s.values):
        return None
    val = {v: x + rates[v] * d for v, x in s.values.items()}
    if not _inv_ok(m, s.location, val):
        return None
    return ConcreteState.make(s.location, val)


def fire(m: MZIA, s: ConcreteState, t: TransitionDecl) -> ConcreteState | None:
    """Take ``t`` from ``s`` if its guard holds and the target invariant admits the result."""
    if t.source != s.location:
        return None
    val = s.values
    if not all(r.holds(val[r.var]) for r in t.guard):
        return None
    new = dict(val)
    new.update({v: Fraction(x) for v, x in t.resets})
    if not _inv_ok(m, t.target, new):
        return None
    return ConcreteState.make(t.target, new)


def _window(m: MZIA, s: ConcreteState, t: TransitionDecl):
    """Delays after which ``t`` can fire: ``(lo, lo_strict, hi, hi_strict)`` or ``None``."""
    rates = m.rates(s.location)
    val = s.values
    lo, lo_s = Fraction(0), False
    hi, hi_s = max_delay(m, s)
    checks = list(m.location(s.location).invariant) + list(t.guard)
    checks += [r for r in m.location(t.target).invariant if r.var not in t.reset_vars]
    for v, x in t.resets:
        if not all(r.holds(Fraction(x)) for r in m.location(t.target).invariant if r.var == v):
            return None
    for r in checks:
        d = (r.value - val[r.var]) / rates[r.var]
        strict = r.op in ("<", ">")
        if r.op in ("<=", "<"):
            if hi is None or d < hi or (d == hi and strict):
                hi, hi_s = d, strict
        else:
            if d > lo or (d == lo and strict):
                lo, lo_s = d, strict
    if hi is not None and (hi < lo or (hi == lo and (lo_s or hi_s))):
        return None
    return lo, lo_s, hi, hi_s


def _pick(rng: random.Random, lo: Fraction, lo_s: bool, hi: Fraction | None, hi_s: bool) -> Fraction:
    if hi is None:
        hi, hi_s = lo + 50, False
    if hi == lo:
        return lo
    choices = []
    if not lo_s:
        choices.append(lo)
    if not hi_s:
        choices.append(hi)
    if choices and rng.random() < 0.3:
        return rng.choice(choices)
    n = 64
    return lo + (hi - lo) * Fraction(rng.randint(1, n - 1), n)


def simulate(m: MZIA, seed: int, steps: int = 12) -> Trajectory:
    """Seeded random run alternating delays and action transitions."""
    rng = random.Random(seed)
    s = initial_state(m)
    traj = Trajectory(s)
    while len(traj.steps) < steps:
        windows = [(t, w) for t in m.outgoing(s.location) if (w := _window(m, s, t)) is not None]
        hi, hi_s = max_delay(m, s)
        can_wait = hi is None or hi > 0
        if not windows and not can_wait:
            traj.deadlock = True
            break
        if windows and (not can_wait or rng.random() < 0.8):
            t, (lo, lo_s, whi, whi_s) = rng.choice(windows)
            d = _pick(rng, lo, lo_s, whi, whi_s)
            if d > 0:
                s = delay(m, s, d)
                traj.steps.append(Step("delay", d, s))
                if len(traj.steps) >= steps:
                    break
            s = fire(m, s, t)
            assert s is not None
            traj.steps.append(Step("action", t.action, s))
        else:
            d = _pick(rng, Fraction(0), True, hi, hi_s)
            s = delay(m, s, d)
            assert s is not None
            traj.steps.append(Step("delay", d, s))
    return traj


def _member(z: ZoneAutomaton, sid: str, c: ConcreteState, clockless: bool) -> bool:
    st = z.state(sid)
    if st.location != c.location:
        return False
    if clockless:
        vals = {k: v for k, v in c.values.items() if k != z.clock}
        return z.clockless(sid).contains(vals)
    return st.zone.contains(c.values)


def trajectory_covered(z: ZoneAutomaton, traj: Trajectory) -> bool:
    """Some path of ``z`` has states containing the start and every post-action state.

    Past a subsumed leaf or a redirected edge the covering state stands in and
    membership ignores the clock, which is how coverage was decided.
    """
    frontier = {(sid, False) for sid in z.initial if _member(z, sid, traj.start, False)}
    for step in traj.steps:
        if not frontier:
            return False
        if step.kind != "action":
            continue
        nxt = set()
        for sid, loose in frontier:
            src, loose_src = sid, loose
            if not z.edges(sid) and sid in z.subsumed:
                src, loose_src = z.subsumed[sid], True
            for a, dst in z.edges(src):
                if a != step.label:
                    continue
                flag = loose_src or (src, a, dst) in z.redirected
                if _member(z, dst, step.state, flag):
                    nxt.add((dst, flag))
        frontier = nxt
    return bool(frontier)
