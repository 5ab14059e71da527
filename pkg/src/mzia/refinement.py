"""Refinement checking between two zone automata.

``rc(P, Q)`` decides whether P refines Q by searching for a simulation over
pairs of zone states.  A pair ``(p, q)`` is related when the state schema
of ``p`` refines that of ``q`` and, for every action either side enables,
every ``a``-successor ``q'`` of ``q`` is matched by some ``a``-successor
``p'`` of ``p`` with related action schemas, related state schemas and a
related pair ``(p', q')``.

Pairs are memoised.  A pair met again while still on the search stack is
assumed related (the greatest-fixpoint reading); if any pair is refuted in a
round that relied on such an assumption, the search is rerun with the
refuted pairs fixed to false until nothing changes.  Every round evaluates
each pair at most once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import ModelError
from .model import MZIA
from .zonegraph import LEAF, ZoneAutomaton, build_zone_automaton
from .zschema import GUARDED, ZSchema, rcz

__all__ = [
    "Verdict",
    "Witness",
    "RefinementChecker",
    "rc",
    "ALGORITHM",
    "DEFINITION",
    "RCZ_STATE",
    "RCZ_ACTION",
    "MISSING",
    "DELAY",
]

ALGORITHM = "algorithm"
DEFINITION = "definition"

RCZ_STATE = "RCZ-state"
RCZ_ACTION = "RCZ-action"
MISSING = "missing-transition"
DELAY = "delay"

_IN_PROGRESS = object()

Pair = tuple[str, str]


@dataclass(frozen=True)
class Witness:
    """Path of ``(p, q, action)`` steps from an initial pair to the failing pair."""

    path: tuple[tuple[str, str, str], ...]
    pair: Pair
    check: str
    action: str | None = None
    detail: str = ""

    def describe(self) -> str:
        lines = [f"({p}, {q}) --{a}-->" for p, q, a in self.path]
        where = f"({self.pair[0]}, {self.pair[1]})"
        tail = f"{where} fails {self.check}"
        if self.action:
            tail += f" on {self.action}"
        if self.detail:
            tail += f": {self.detail}"
        return "\n".join(lines + [tail])

    def to_dict(self) -> dict:
        return {
            "path": [{"p": p, "q": q, "action": a} for p, q, a in self.path],
            "pair": list(self.pair),
            "check": self.check,
            "action": self.action,
            "detail": self.detail,
        }


@dataclass
class Verdict:
    refines: bool
    mode: str
    direction: str = ALGORITHM
    witness: Witness | None = None
    related: frozenset[Pair] = frozenset()
    refuted: frozenset[Pair] = frozenset()
    stats: dict[str, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.refines

    def to_dict(self) -> dict:
        return {
            "refines": self.refines,
            "mode": self.mode,
            "direction": self.direction,
            "witness": self.witness.to_dict() if self.witness else None,
            "related": sorted(list(p) for p in self.related),
            "stats": dict(sorted(self.stats.items())),
        }


# failure reasons, kept per refuted pair to rebuild witnesses
@dataclass(frozen=True)
class _Local:
    check: str
    action: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class _Via:
    action: str
    child: Pair


_Reason = Union[_Local, _Via]


class RefinementChecker:
    """One refinement question ``P ⪰ Q`` with its caches and counters."""

    def __init__(
        self,
        p: ZoneAutomaton,
        q: ZoneAutomaton,
        mode: str = GUARDED,
        direction: str = ALGORITHM,
        check_delays: bool = False,
    ):
        if direction not in (ALGORITHM, DEFINITION):
            raise ValueError(f"direction must be {ALGORITHM!r} or {DEFINITION!r}")
        self.P, self.Q = p, q
        self.mode = mode
        self.direction = direction
        self.check_delays = check_delays
        self._rcz_cache: dict[tuple[int, int], bool] = {}
        self._schemas: list[ZSchema] = []
        self.false: dict[Pair, _Reason] = {}
        self.memo: dict[Pair, object] = {}
        self._assumed = False
        self.stats = {"rounds": 0, "rcs_evaluations": 0, "max_round_evaluations": 0, "rcz_calls": 0}
        self._round_evals = 0

    # -- schema relations, cached on schema identity --------------------------

    def _schema_key(self, s: ZSchema) -> int:
        for i, t in enumerate(self._schemas):
            if t is s:
                return i
        self._schemas.append(s)
        return len(self._schemas) - 1

    def rcz(self, s: ZSchema, t: ZSchema) -> bool:
        key = (self._schema_key(s), self._schema_key(t))
        if key not in self._rcz_cache:
            self.stats["rcz_calls"] += 1
            self._rcz_cache[key] = rcz(s, t, self.mode)
        return self._rcz_cache[key]

    def state_ok(self, p: str, q: str) -> bool:
        return self.rcz(self.P.schema(p), self.Q.schema(q))

    def action_ok(self, a: str) -> bool:
        return self.rcz(self.P.action_schema(a), self.Q.action_schema(a))

    # -- search ------------------------------------------------------------------

    def actions(self, p: str, q: str) -> list[str]:
        return sorted(self.P.enabled_actions(p) | self.Q.enabled_actions(q))

    def rcs(self, p: str, q: str) -> bool:
        pair = (p, q)
        if pair in self.false:
            return False
        got = self.memo.get(pair)
        if got is _IN_PROGRESS:
            self._assumed = True
            return True
        if got is not None:
            return got  # type: ignore[return-value]
        self.memo[pair] = _IN_PROGRESS
        self._round_evals += 1
        self.stats["rcs_evaluations"] += 1
        reason = self._evaluate(p, q)
        if reason is None:
            self.memo[pair] = True
            return True
        self.memo[pair] = False
        self.false[pair] = reason
        return False

    def _evaluate(self, p: str, q: str) -> _Reason | None:
        if not self.state_ok(p, q):
            return _Local(RCZ_STATE)
        if self.check_delays and self.P.can_delay(p) and not self.Q.can_delay(q):
            return _Local(DELAY, detail=f"{p} lets time pass but {q} cannot")
        for a in self.actions(p, q):
            reason = self.match_action(p, q, a)
            if reason is not None:
                return reason
        return None

    def match_action(self, p: str, q: str, a: str) -> _Reason | None:
        """``None`` when action ``a`` is matched at ``(p, q)``, else why not."""
        for side, auto in (("P", self.P), ("Q", self.Q)):
            if not auto.has_action(a):
                raise ModelError(f"action {a!r} is not declared in {side} ({auto.model.name})")
        ps, qs = self.P.successors(p, a), self.Q.successors(q, a)
        lead, follow = (qs, ps) if self.direction == ALGORITHM else (ps, qs)
        if not lead:
            return None
        if not follow:
            who = p if self.direction == ALGORITHM else q
            return _Local(MISSING, a, f"{who} has no {a} transition")
        if not self.action_ok(a):
            return _Local(RCZ_ACTION, a)
        for x in lead:
            matched = False
            for y in follow:
                pi, qj = (y, x) if self.direction == ALGORITHM else (x, y)
                if self.state_ok(pi, qj) and self.rcs(pi, qj):
                    matched = True
                    break
            if not matched:
                first = follow[0]
                pi, qj = (first, x) if self.direction == ALGORITHM else (x, first)
                return _Via(a, (pi, qj))
        return None

    def run(self) -> Verdict:
        pairs = [(p, q) for p in self.P.initial for q in self.Q.initial]
        while True:
            self.memo = {}
            self._assumed = False
            self._round_evals = 0
            before = len(self.false)
            self.stats["rounds"] += 1
            results = [self.rcs(p, q) for p, q in pairs]
            self.stats["max_round_evaluations"] = max(self.stats["max_round_evaluations"], self._round_evals)
            if not self._assumed or len(self.false) == before:
                break
        refines = any(results)
        related = frozenset(k for k, v in self.memo.items() if v is True)
        witness = None if refines or not pairs else self.witness(pairs[0])
        return Verdict(
            refines=refines,
            mode=self.mode,
            direction=self.direction,
            witness=witness,
            related=related,
            refuted=frozenset(self.false),
            stats=dict(self.stats),
        )

    def witness(self, start: Pair) -> Witness:
        path: list[tuple[str, str, str]] = []
        pair = start
        seen = set()
        while True:
            reason = self.false[pair]
            if isinstance(reason, _Local):
                return Witness(tuple(path), pair, reason.check, reason.action, reason.detail)
            seen.add(pair)
            path.append((pair[0], pair[1], reason.action))
            child = reason.child
            if child not in self.false:
                # the child pair itself is fine; its schemas are not
                return Witness(tuple(path), child, RCZ_STATE)
            if child in seen:  # pragma: no cover - reasons are discovered in order
                raise RuntimeError("cyclic failure explanation")
            pair = child


def _as_automaton(x: Union[ZoneAutomaton, MZIA], subsumption: str) -> ZoneAutomaton:
    # anything that is not a model is taken to be an explored automaton
    return build_zone_automaton(x, subsumption) if isinstance(x, MZIA) else x


def rc(
    p: Union[ZoneAutomaton, MZIA],
    q: Union[ZoneAutomaton, MZIA],
    mode: str = GUARDED,
    direction: str = ALGORITHM,
    check_delays: bool = False,
    subsumption: str = LEAF,
) -> Verdict:
    """Does ``p`` refine ``q``?  Models are explored first if given directly."""
    checker = RefinementChecker(
        _as_automaton(p, subsumption), _as_automaton(q, subsumption), mode, direction, check_delays
    )
    return checker.run()
