"""Exact linear constraints over the rationals.

Constraints have the form ``sum(coeff * var) REL bound`` with REL one of
``<=``, ``<`` or ``==``.  Satisfiability, projection and point sampling are
done by Fourier-Motzkin elimination on :class:`fractions.Fraction` values, so
every answer is exact (strict inequalities included).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Constraint",
    "satisfiable",
    "project",
    "sample_point",
    "entails",
    "point_outside_union",
    "holds",
]

_RELS = ("<=", "<", "==")


@dataclass(frozen=True)
class Constraint:
    """``sum(c * v for v, c in coeffs) rel bound``.

    ``coeffs`` is a sorted tuple of ``(var, coeff)`` pairs without zeros.
    """

    coeffs: tuple[tuple[str, Fraction], ...]
    rel: str
    bound: Fraction

    @classmethod
    def make(cls, coeffs: Mapping[str, Fraction] | Iterable[tuple[str, Fraction]], rel: str, bound) -> "Constraint":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, Fraction] = {}
        for var, c in items:
            acc[var] = acc.get(var, Fraction(0)) + Fraction(c)
        bound = Fraction(bound)
        if rel == ">=":
            acc = {v: -c for v, c in acc.items()}
            rel, bound = "<=", -bound
        elif rel == ">":
            acc = {v: -c for v, c in acc.items()}
            rel, bound = "<", -bound
        if rel not in _RELS:
            raise ValueError(f"unknown relation {rel!r}")
        return cls(tuple(sorted((v, c) for v, c in acc.items() if c != 0)), rel, bound)

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> Fraction:
        for v, c in self.coeffs:
            if v == var:
                return c
        return Fraction(0)

    def lhs(self, point: Mapping[str, Fraction]) -> Fraction:
        return sum((c * Fraction(point[v]) for v, c in self.coeffs), Fraction(0))

    def trivial_truth(self) -> bool | None:
        """Truth value for variable-free constraints, ``None`` otherwise."""
        if self.coeffs:
            return None
        if self.rel == "<=":
            return 0 <= self.bound
        if self.rel == "<":
            return 0 < self.bound
        return self.bound == 0

    def negations(self) -> list["Constraint"]:
        """Constraints whose disjunction is the complement of this one."""
        neg = tuple((v, -c) for v, c in self.coeffs)
        if self.rel == "<=":
            return [Constraint(neg, "<", -self.bound)]
        if self.rel == "<":
            return [Constraint(neg, "<=", -self.bound)]
        return [Constraint(self.coeffs, "<", self.bound), Constraint(neg, "<", -self.bound)]

    def substitute(self, values: Mapping[str, Fraction]) -> "Constraint":
        bound = self.bound
        rest = []
        for v, c in self.coeffs:
            if v in values:
                bound -= c * Fraction(values[v])
            else:
                rest.append((v, c))
        return Constraint(tuple(rest), self.rel, bound)

    def __str__(self) -> str:
        if not self.coeffs:
            lhs = "0"
        else:
            parts = []
            for i, (v, c) in enumerate(self.coeffs):
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                term = v if mag == 1 else f"{mag}*{v}"
                parts.append(("-" + term) if (i == 0 and sign == "-") else (term if i == 0 else f" {sign} {term}"))
            lhs = "".join(parts)
        return f"{lhs} {self.rel} {self.bound}"


def holds(c: Constraint, point: Mapping[str, Fraction]) -> bool:
    value = c.lhs(point)
    if c.rel == "<=":
        return value <= c.bound
    if c.rel == "<":
        return value < c.bound
    return value == c.bound


# -- Fourier-Motzkin core ----------------------------------------------------

# Internal form: inequalities only, keyed by normalised coefficient vector so
# that parallel constraints collapse to the tightest one.

_Key = tuple[tuple[str, Fraction], ...]


def _split(cons: Iterable[Constraint]) -> list[Constraint] | None:
    out = []
    for c in cons:
        t = c.trivial_truth()
        if t is False:
            return None
        if t is True:
            continue
        if c.rel == "==":
            out.append(Constraint(c.coeffs, "<=", c.bound))
            out.append(Constraint(tuple((v, -k) for v, k in c.coeffs), "<=", -c.bound))
        else:
            out.append(c)
    return out


def _normalise(c: Constraint) -> tuple[_Key, Fraction, bool]:
    scale = abs(c.coeffs[0][1])
    key = tuple((v, k / scale) for v, k in c.coeffs)
    return key, c.bound / scale, c.rel == "<"


def _tighten(cons: Iterable[Constraint]) -> dict[_Key, tuple[Fraction, bool]] | None:
    table: dict[_Key, tuple[Fraction, bool]] = {}
    for c in cons:
        t = c.trivial_truth()
        if t is False:
            return None
        if t is True:
            continue
        key, b, strict = _normalise(c)
        old = table.get(key)
        if old is None or b < old[0] or (b == old[0] and strict and not old[1]):
            table[key] = (b, strict)
    # opposite pairs a <= b, -a <= -b' with b' > b make the system empty
    for key, (b, strict) in table.items():
        opp = tuple((v, -k) for v, k in key)
        other = table.get(opp)
        if other is not None:
            total = b + other[0]
            if total < 0 or (total == 0 and (strict or other[1])):
                return None
    return table


def _from_table(table: Mapping[_Key, tuple[Fraction, bool]]) -> list[Constraint]:
    return [Constraint(key, "<" if s else "<=", b) for key, (b, s) in table.items()]


def _eliminate(cons: list[Constraint], var: str) -> list[Constraint] | None:
    uppers, lowers, rest = [], [], []
    for c in cons:
        k = c.coeff(var)
        if k > 0:
            uppers.append(c)
        elif k < 0:
            lowers.append(c)
        else:
            rest.append(c)
    for u in uppers:
        a = u.coeff(var)
        for lo in lowers:
            b = -lo.coeff(var)
            acc: dict[str, Fraction] = {}
            for v, k in u.coeffs:
                acc[v] = acc.get(v, Fraction(0)) + b * k
            for v, k in lo.coeffs:
                acc[v] = acc.get(v, Fraction(0)) + a * k
            acc.pop(var, None)
            rel = "<" if (u.rel == "<" or lo.rel == "<") else "<="
            rest.append(Constraint(tuple(sorted((v, k) for v, k in acc.items() if k != 0)), rel, b * u.bound + a * lo.bound))
    table = _tighten(rest)
    if table is None:
        return None
    return _from_table(table)


def _order(cons: Sequence[Constraint], targets: Iterable[str]) -> list[str]:
    # eliminate variables with the fewest occurrences first
    count: dict[str, int] = {}
    for c in cons:
        for v in c.vars:
            count[v] = count.get(v, 0) + 1
    return sorted(set(targets), key=lambda v: (count.get(v, 0), v))


def project(cons: Iterable[Constraint], eliminate: Iterable[str]) -> list[Constraint] | None:
    """Existentially eliminate ``eliminate``; ``None`` when the system is empty."""
    work = _split(cons)
    if work is None:
        return None
    table = _tighten(work)
    if table is None:
        return None
    work = _from_table(table)
    for var in _order(work, eliminate):
        work = _eliminate(work, var)
        if work is None:
            return None
    return work


def satisfiable(cons: Iterable[Constraint]) -> bool:
    cons = list(cons)
    allvars = set().union(*(c.vars for c in cons)) if cons else set()
    return project(cons, allvars) is not None


def _pick(lo: Fraction | None, lo_strict: bool, hi: Fraction | None, hi_strict: bool) -> Fraction:
    if lo is not None and hi is not None:
        if lo == hi:
            return lo
        # prefer an integer strictly inside, else the midpoint
        cand = Fraction(lo.__floor__() + 1) if lo_strict or lo != lo.__floor__() else lo
        if cand < hi or (cand == hi and not hi_strict):
            if cand > lo or not lo_strict:
                return cand
        return (lo + hi) / 2
    if lo is not None:
        return Fraction(lo.__floor__() + 1) if lo_strict or lo != lo.__floor__() else lo
    if hi is not None:
        return Fraction(hi.__ceil__() - 1) if hi_strict or hi != hi.__ceil__() else hi
    return Fraction(0)


def sample_point(cons: Iterable[Constraint], variables: Iterable[str] = ()) -> dict[str, Fraction] | None:
    """A satisfying point over ``variables`` plus every constrained variable."""
    work = _split(cons)
    if work is None:
        return None
    table = _tighten(work)
    if table is None:
        return None
    work = _from_table(table)
    allvars = set(variables).union(*(c.vars for c in work)) if work else set(variables)
    order = _order(work, allvars)
    stages = []
    for var in order:
        stages.append((var, work))
        work = _eliminate(work, var)
        if work is None:
            return None
    point: dict[str, Fraction] = {}
    for var, stage in reversed(stages):
        lo = hi = None
        lo_s = hi_s = False
        for c in stage:
            k = c.coeff(var)
            if k == 0:
                continue
            rest = c.substitute(point)
            value = rest.bound / k
            strict = c.rel == "<"
            if k > 0:
                if hi is None or value < hi or (value == hi and strict):
                    hi, hi_s = value, strict
            else:
                if lo is None or value > lo or (value == lo and strict):
                    lo, lo_s = value, strict
        point[var] = _pick(lo, lo_s, hi, hi_s)
    return point


def entails(cons: Sequence[Constraint], target: Constraint) -> bool:
    """True iff every point satisfying ``cons`` satisfies ``target``."""
    return all(not satisfiable([*cons, neg]) for neg in target.negations())


def point_outside_union(
    base: Sequence[Constraint],
    union: Sequence[Sequence[Constraint]],
    variables: Iterable[str] = (),
) -> dict[str, Fraction] | None:
    """A point of ``base`` lying in none of the polyhedra of ``union``.

    Returns ``None`` when ``base`` is covered by the union.  Search is a DFS
    choosing one violated constraint per union member, pruned by feasibility.
    """
    variables = tuple(variables)

    def search(current: list[Constraint], idx: int) -> dict[str, Fraction] | None:
        if not satisfiable(current):
            return None
        if idx == len(union):
            return sample_point(current, variables)
        member = union[idx]
        for c in member:
            for neg in c.negations():
                found = search([*current, neg], idx + 1)
                if found is not None:
                    return found
        return None

    return search(list(base), 0)
