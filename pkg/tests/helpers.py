"""Shared builders for the test suite."""

from __future__ import annotations

import random
import re
from fractions import Fraction

from mzia.model import MZIA, ActionDecl, Location, RectConstraint, TransitionDecl
from mzia.zschema import Real, VarDecl, ZSchema

F = Fraction


def normalize_zone(text: str) -> str:
    """Canonical spacing/ASCII for comparing rendered zones with published strings."""
    t = text.replace("?", "!").replace("−", "-").replace("≤", "<=").replace("∧", "&&")
    t = re.sub(r"\s+", "", t)
    return t


def random_model(rng: random.Random, n_locs: int | None = None, n_vars: int = 2) -> MZIA:
    """Initialized model with positive rates and bounded invariants on every variable."""
    n_locs = n_locs or rng.randint(1, 4)
    names = [f"x{i}!" for i in range(n_vars)]
    locs = []
    for li in range(n_locs):
        rates = tuple((v, F(rng.choice([1, 2, 3]))) for v in names)
        inv = tuple(RectConstraint(v, "<=", F(rng.randint(5, 20))) for v in names)
        locs.append(Location(f"l{li}", rates, inv))
    actions = ("a", "b")
    transitions = []
    for _ in range(rng.randint(0, 2 * n_locs)):
        src, dst = rng.randrange(n_locs), rng.randrange(n_locs)
        srates, drates = dict(locs[src].rates), dict(locs[dst].rates)
        must = [v for v in names if srates[v] != drates[v]]
        extra = [v for v in names if v not in must and rng.random() < 0.5]
        resets = tuple((v, F(rng.randint(0, 4))) for v in must + extra)
        guard = ()
        if rng.random() < 0.7:
            v = rng.choice(names)
            guard = (RectConstraint(v, rng.choice([">=", ">", "<="]), F(rng.randint(0, 12))),)
        transitions.append(TransitionDecl(f"l{src}", rng.choice(actions), f"l{dst}", guard, resets))
    init = tuple((v, F(rng.randint(0, 4))) for v in names)
    return MZIA(
        name="R",
        continuous=tuple(VarDecl(v, Real()) for v in names),
        locations=tuple(locs),
        transitions=tuple(transitions),
        actions=tuple(ActionDecl(a, "output", ZSchema()) for a in actions),
        initial_location="l0",
        initial_valuation=init,
    )


class FakeModel:
    def __init__(self, name: str):
        self.name = name


class FakeAutomaton:
    """Finite labelled transition system with trivial schemas, shaped like a zone automaton."""

    def __init__(self, n: int, edges: list[tuple[int, str, int]], actions=("a", "b"), name="T"):
        self.ids = [f"s{i}" for i in range(n)]
        self.initial = ["s0"]
        self.transitions = [(f"s{a}", act, f"s{b}") for a, act, b in edges]
        self.actions = frozenset(actions)
        self.model = FakeModel(name)
        self._schema = ZSchema()

    def successors(self, sid: str, action: str | None = None) -> list[str]:
        return [t for s, a, t in self.transitions if s == sid and (action is None or a == action)]

    def enabled_actions(self, sid: str) -> frozenset[str]:
        return frozenset(a for s, a, _ in self.transitions if s == sid)

    def schema(self, sid: str) -> ZSchema:
        return self._schema

    def action_schema(self, action: str) -> ZSchema:
        return self._schema

    def has_action(self, action: str) -> bool:
        return action in self.actions

    def can_delay(self, sid: str) -> bool:
        return True

    def __len__(self) -> int:
        return len(self.ids)


def random_lts(rng: random.Random, name: str = "T", max_states: int = 8) -> FakeAutomaton:
    n = rng.randint(1, max_states)
    edges = [(rng.randrange(n), rng.choice("ab"), rng.randrange(n)) for _ in range(rng.randint(0, 2 * n))]
    return FakeAutomaton(n, sorted(set(edges)), name=name)


def gfp_simulation(p: FakeAutomaton, q: FakeAutomaton) -> set[tuple[str, str]]:
    """Largest R where every a-move of q is answered by an a-move of p staying in R."""
    rel = {(x, y) for x in p.ids for y in q.ids}
    changed = True
    while changed:
        changed = False
        for x, y in sorted(rel):
            for a in p.actions | q.actions:
                ok = all(any((x2, y2) in rel for x2 in p.successors(x, a)) for y2 in q.successors(y, a))
                if not ok:
                    rel.discard((x, y))
                    changed = True
                    break
    return rel
