"""Difference constraint matrices for multirate zones.

A DCM over variables ``v_1 .. v_n`` with positive rates ``k_1 .. k_n`` keeps,
for every ordered pair ``(i, j)`` (index 0 is the constant-zero reference
``x0`` with rate 1), a bound ``c`` on ``k_j * v_i - k_i * v_j``.  That quantity
does not change while time flows, which is what makes elapse cheap.
Dividing the entry by ``k_i * k_j`` gives an ordinary clock difference in the
scaled coordinates ``v / k``; the closure below is Floyd-Warshall in that
space written directly on the unscaled entries.

All arithmetic uses :class:`fractions.Fraction`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from . import linear
from .errors import IncompatibleContextError, InitializedConditionError, UnsupportedRateError

__all__ = [
    "Bound",
    "INF",
    "LE",
    "LT",
    "DCM",
    "LowerBound",
    "UpperBound",
    "Relative",
    "ZoneConstraint",
    "format_zone",
    "X0",
]

X0 = "x0"


@functools.total_ordering
@dataclass(frozen=True)
class Bound:
    """``value`` with strictness, or +infinity when ``value`` is ``None``."""

    value: Fraction | None
    strict: bool = False

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def _key(self):
        if self.value is None:
            return (1, 0, 0)
        return (0, self.value, 0 if self.strict else 1)

    def __lt__(self, other: "Bound") -> bool:
        return self._key() < other._key()

    def __str__(self) -> str:
        if self.value is None:
            return "inf"
        return f"{'<' if self.strict else '<='}{self.value}"


INF = Bound(None, False)


def LE(c) -> Bound:
    return Bound(Fraction(c), False)


def LT(c) -> Bound:
    return Bound(Fraction(c), True)


def _fmt_num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- zone constraints ---------------------------------------------------------


@dataclass(frozen=True)
class LowerBound:
    """``var >= bound.value`` (``>`` when strict)."""

    var: str
    bound: Bound


@dataclass(frozen=True)
class UpperBound:
    """``var <= bound.value`` (``<`` when strict)."""

    var: str
    bound: Bound


@dataclass(frozen=True)
class Relative:
    """``lower <(=) coeff_a*var_a - coeff_b*var_b <(=) upper``.

    ``lower``/``upper`` may be :data:`INF` for a missing side.
    """

    var_a: str
    var_b: str
    coeff_a: Fraction
    coeff_b: Fraction
    lower: Bound = INF
    upper: Bound = INF


ZoneConstraint = Union[LowerBound, UpperBound, Relative]


def _term(coeff: Fraction, var: str, unicode: bool) -> str:
    if coeff == 1:
        return var
    return f"{_fmt_num(coeff)}{var}" if unicode else f"{_fmt_num(coeff)}*{var}"


def format_zone(constraints: Sequence[ZoneConstraint], unicode: bool = True) -> str:
    """Render zone constraints in the ``620 ≤ x ≤ 920 ∧ ...`` style."""
    le, lt, minus, conj = ("≤", "<", "−", " ∧ ") if unicode else ("<=", "<", "-", " && ")
    lowers: dict[str, Bound] = {}
    uppers: dict[str, Bound] = {}
    order: list[str] = []
    rels: list[Relative] = []
    for c in constraints:
        if isinstance(c, Relative):
            rels.append(c)
            continue
        if c.var not in order:
            order.append(c.var)
        (lowers if isinstance(c, LowerBound) else uppers)[c.var] = c.bound

    def op(b: Bound) -> str:
        return lt if b.strict else le

    def num(q: Fraction) -> str:
        s = _fmt_num(q)
        return s.replace("-", minus) if unicode else s

    intervals, points = [], []
    for v in order:
        lo, hi = lowers.get(v), uppers.get(v)
        if lo is not None and hi is not None and lo.value == hi.value and not lo.strict and not hi.strict:
            points.append(f"{v} = {num(lo.value)}")
        elif lo is not None and hi is not None:
            intervals.append(f"{num(lo.value)} {op(lo)} {v} {op(hi)} {num(hi.value)}")
        elif lo is not None:
            intervals.append(f"{num(lo.value)} {op(lo)} {v}")
        else:
            intervals.append(f"{v} {op(hi)} {num(hi.value)}")
    rel_txt = []
    for r in rels:
        expr = f"{_term(r.coeff_a, r.var_a, unicode)} {minus} {_term(r.coeff_b, r.var_b, unicode)}"
        if not r.lower.is_inf and not r.upper.is_inf and r.lower.value == r.upper.value and not (r.lower.strict or r.upper.strict):
            rel_txt.append(f"{expr} = {num(r.upper.value)}")
            continue
        s = expr
        if not r.lower.is_inf:
            s = f"{num(r.lower.value)} {op(r.lower)} {s}"
        if not r.upper.is_inf:
            s = f"{s} {op(r.upper)} {num(r.upper.value)}"
        rel_txt.append(s)
    return conj.join(intervals + rel_txt + points)


# -- the matrix ---------------------------------------------------------------


def _chain(c1: Bound, c2: Bound, k_i: Fraction, k_j: Fraction, k_l: Fraction) -> Bound:
    """Combine (i,j) and (j,l) into a bound on (i,l)."""
    if c1.value is None or c2.value is None:
        return INF
    return Bound((k_l * c1.value + k_i * c2.value) / k_j, c1.strict or c2.strict)


def _close(bounds: list[list[Bound]], k: Sequence[Fraction]) -> bool:
    """In-place closure; returns ``False`` when the zone is empty.

    Dividing entry (i, j) by ``k_i * k_j`` turns the chaining rule into plain
    addition, so the loop runs on integers: the divided values are brought
    to a common denominator and encoded as ``2*v + 1`` (non-strict) or
    ``2*v`` (strict), which orders and adds bounds exactly.
    """
    n = len(bounds)
    den = 1
    scaled: list[list[Fraction | None]] = []
    for i in range(n):
        row = []
        for j in range(n):
            b = bounds[i][j]
            if b.value is None:
                row.append(None)
            else:
                q = b.value / (k[i] * k[j])
                den = math.lcm(den, q.denominator)
                row.append(q)
        scaled.append(row)
    enc: list[list[int | None]] = [
        [None if q is None else 2 * int(q * den) + (0 if bounds[i][j].strict else 1) for j, q in enumerate(row)]
        for i, row in enumerate(scaled)
    ]
    orig = [list(r) for r in enc]
    for j in range(n):
        row_j = enc[j]
        for i in range(n):
            a = enc[i][j]
            if a is None:
                continue
            row_i = enc[i]
            a_even = a & ~1
            for l in range(n):
                b = row_j[l]
                if b is None:
                    continue
                c = (a_even + (b & ~1)) | (a & b & 1)
                cur = row_i[l]
                if cur is None or c < cur:
                    row_i[l] = c
        if enc[j][j] < 1:
            return False
    for i in range(n):
        if enc[i][i] < 1:
            return False
        for j in range(n):
            c = enc[i][j]
            if c != orig[i][j]:
                bounds[i][j] = Bound(Fraction(c >> 1, den) * k[i] * k[j], not (c & 1))
    return True


@dataclass(frozen=True)
class DCM:
    """Immutable multirate zone.

    ``bounds[i][j]`` bounds ``k_j * v_i - k_i * v_j`` where index 0 is ``x0``.
    Empty zones carry ``empty=True``; their matrix content is not meaningful.
    """

    vars: tuple[str, ...]
    rates: tuple[Fraction, ...]
    bounds: tuple[tuple[Bound, ...], ...] = field(repr=False)
    canonical: bool = True
    empty: bool = False

    # -- construction --------------------------------------------------------

    @staticmethod
    def _check_rates(vars: Sequence[str], rates: Mapping[str, Fraction]) -> tuple[Fraction, ...]:
        out = []
        for v in vars:
            if v not in rates:
                raise UnsupportedRateError(f"no rate given for {v!r}")
            r = Fraction(rates[v])
            if r <= 0:
                raise UnsupportedRateError(f"rate of {v!r} must be positive, got {r}")
            out.append(r)
        return tuple(out)

    @classmethod
    def universal(cls, vars: Sequence[str], rates: Mapping[str, Fraction]) -> "DCM":
        vars = tuple(vars)
        ks = cls._check_rates(vars, rates)
        n = len(vars) + 1
        b = tuple(tuple(LE(0) if i == j else INF for j in range(n)) for i in range(n))
        return cls(vars, ks, b)

    @classmethod
    def from_constraints(
        cls,
        vars: Sequence[str],
        rates: Mapping[str, Fraction],
        constraints: Iterable[ZoneConstraint] = (),
    ) -> "DCM":
        vars = tuple(vars)
        ks = cls._check_rates(vars, rates)
        n = len(vars) + 1
        index = {v: i + 1 for i, v in enumerate(vars)}
        k = (Fraction(1),) + ks
        m = [[LE(0) if i == j else INF for j in range(n)] for i in range(n)]

        def put(i: int, j: int, b: Bound) -> None:
            if b < m[i][j]:
                m[i][j] = b

        def idx(v: str) -> int:
            try:
                return index[v]
            except KeyError:
                raise IncompatibleContextError(f"constraint mentions undeclared variable {v!r}") from None

        for c in constraints:
            if isinstance(c, UpperBound):
                if not c.bound.is_inf:
                    put(idx(c.var), 0, c.bound)
            elif isinstance(c, LowerBound):
                if not c.bound.is_inf:
                    put(0, idx(c.var), Bound(-c.bound.value, c.bound.strict))
            elif isinstance(c, Relative):
                a, b = idx(c.var_a), idx(c.var_b)
                # coeff_a * va - coeff_b * vb must be a multiple of k_b*va - k_a*vb
                ca, cb = Fraction(c.coeff_a), Fraction(c.coeff_b)
                if ca <= 0 or cb <= 0 or ca * k[a] != cb * k[b]:
                    raise IncompatibleContextError(
                        f"relative constraint {ca}*{c.var_a} - {cb}*{c.var_b} does not match rates"
                    )
                scale = k[b] / ca
                if not c.upper.is_inf:
                    put(a, b, Bound(c.upper.value * scale, c.upper.strict))
                if not c.lower.is_inf:
                    put(b, a, Bound(-c.lower.value * scale, c.lower.strict))
            else:
                raise TypeError(f"not a zone constraint: {c!r}")
        return cls._closed(vars, ks, m)

    @classmethod
    def point(cls, valuation: Mapping[str, Fraction], rates: Mapping[str, Fraction], vars: Sequence[str] | None = None) -> "DCM":
        vars = tuple(vars) if vars is not None else tuple(valuation)
        cons: list[ZoneConstraint] = []
        for v in vars:
            cons.append(LowerBound(v, LE(valuation[v])))
            cons.append(UpperBound(v, LE(valuation[v])))
        return cls.from_constraints(vars, rates, cons)

    @classmethod
    def _closed(cls, vars, ks, m: list[list[Bound]]) -> "DCM":
        k = (Fraction(1),) + tuple(ks)
        if not _close(m, k):
            return cls._make_empty(vars, ks)
        return cls(tuple(vars), tuple(ks), tuple(tuple(r) for r in m))

    @classmethod
    def _make_empty(cls, vars, ks) -> "DCM":
        n = len(vars) + 1
        b = tuple(tuple(LT(0) for _ in range(n)) for _ in range(n))
        return cls(tuple(vars), tuple(ks), b, True, True)

    # -- accessors -----------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.vars) + 1

    @property
    def rate_map(self) -> dict[str, Fraction]:
        return dict(zip(self.vars, self.rates))

    def _k(self) -> tuple[Fraction, ...]:
        return (Fraction(1),) + self.rates

    def index(self, var: str) -> int:
        if var == X0:
            return 0
        try:
            return self.vars.index(var) + 1
        except ValueError:
            raise IncompatibleContextError(f"unknown variable {var!r}") from None

    def entry(self, row: str, col: str) -> Bound:
        return self.bounds[self.index(row)][self.index(col)]

    def cell(self, row: str, col: str) -> tuple[Fraction, Fraction, Fraction | None, str]:
        """Display 4-tuple ``(rate(col), rate(row), c, rel)``."""
        i, j = self.index(row), self.index(col)
        k = self._k()
        b = self.bounds[i][j]
        return (k[j], k[i], b.value, "<" if b.strict else "<=")

    def upper(self, var: str) -> Bound:
        return self.entry(var, X0)

    def lower(self, var: str) -> Bound:
        """Lower bound on ``var``; returned as ``Bound(value, strict)`` meaning ``var >= value``."""
        b = self.entry(X0, var)
        return INF if b.is_inf else Bound(-b.value, b.strict)

    def is_empty(self) -> bool:
        if self.empty:
            return True
        if self.canonical:
            return False
        return self.canonicalize().empty

    def __contains__(self, point: Mapping[str, Fraction]) -> bool:
        return self.contains(point)

    def contains(self, point: Mapping[str, Fraction]) -> bool:
        if self.empty:
            return False
        k = self._k()
        vals = (Fraction(0),) + tuple(Fraction(point[v]) for v in self.vars)
        for i in range(self.size):
            for j in range(self.size):
                b = self.bounds[i][j]
                if b.value is None or i == j:
                    continue
                lhs = k[j] * vals[i] - k[i] * vals[j]
                if lhs > b.value or (b.strict and lhs == b.value):
                    return False
        return True

    def linear_constraints(self) -> list[linear.Constraint]:
        """The zone as exact linear constraints over its variables."""
        k = self._k()
        names = (X0,) + self.vars
        out = []
        for i in range(self.size):
            for j in range(self.size):
                b = self.bounds[i][j]
                if i == j or b.value is None:
                    continue
                coeffs = {}
                if i:
                    coeffs[names[i]] = k[j]
                if j:
                    coeffs[names[j]] = coeffs.get(names[j], Fraction(0)) - k[i]
                out.append(linear.Constraint.make(coeffs, "<" if b.strict else "<=", b.value))
        return out

    # -- operations ----------------------------------------------------------

    def canonicalize(self) -> "DCM":
        if self.canonical or self.empty:
            return self
        return self._closed(self.vars, self.rates, [list(r) for r in self.bounds])

    def _same_context(self, other: "DCM") -> None:
        if self.vars != other.vars:
            raise IncompatibleContextError(f"variable mismatch: {self.vars} vs {other.vars}")
        if self.rates != other.rates:
            raise IncompatibleContextError(f"rate mismatch: {self.rates} vs {other.rates}")

    def intersect(self, other: "DCM") -> "DCM":
        self._same_context(other)
        if self.empty:
            return self
        if other.empty:
            return other
        m = [[min(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.bounds, other.bounds)]
        return self._closed(self.vars, self.rates, m)

    def elapse(self) -> "DCM":
        d = self.canonicalize()
        if d.empty:
            return d
        m = [list(r) for r in d.bounds]
        for i in range(1, d.size):
            m[i][0] = INF
        return self._closed(d.vars, d.rates, m)

    def reset(
        self,
        to_reset: Iterable[str],
        values: Mapping[str, Fraction],
        new_rates: Mapping[str, Fraction] | None = None,
    ) -> "DCM":
        """Reset ``to_reset`` to ``values`` and switch to ``new_rates``.

        Variables whose rate changes must be reset (initialized condition).
        """
        lam = set(to_reset)
        for v in lam:
            self.index(v)
            if v not in values:
                raise IncompatibleContextError(f"no reset value for {v!r}")
        merged = dict(self.rate_map)
        if new_rates:
            for v, r in new_rates.items():
                self.index(v)
                r = Fraction(r)
                if r != merged[v] and v not in lam:
                    raise InitializedConditionError(f"rate of {v!r} changes from {merged[v]} to {r} but it is not reset")
                merged[v] = r
        ks = self._check_rates(self.vars, merged)
        d = self.canonicalize()
        if d.empty:
            return DCM._make_empty(self.vars, ks)
        n = d.size
        k = (Fraction(1),) + ks
        m = [list(r) for r in d.bounds]
        reset_idx = [d.index(v) for v in self.vars if v in lam]
        for r in reset_idx:
            for j in range(n):
                m[r][j] = INF
                m[j][r] = INF
            m[r][r] = LE(0)
            val = Fraction(values[self.vars[r - 1]])
            m[r][0] = LE(val)
            m[0][r] = LE(-val)
        # entries touching reset variables, chained through x0
        for r in reset_idx:
            for j in range(1, n):
                if j == r:
                    continue
                m[r][j] = min(m[r][j], _chain(m[r][0], m[0][j], k[r], k[0], k[j]))
                m[j][r] = min(m[j][r], _chain(m[j][0], m[0][r], k[j], k[0], k[r]))
        return self._closed(self.vars, ks, m)

    def project(self, var: str | Iterable[str]) -> "DCM":
        drop = {var} if isinstance(var, str) else set(var)
        for v in drop:
            self.index(v)
        d = self.canonicalize()
        keep = [i for i, v in enumerate((X0,) + d.vars) if v not in drop]
        vars = tuple(v for v in d.vars if v not in drop)
        ks = tuple(r for v, r in zip(d.vars, d.rates) if v not in drop)
        if d.empty:
            return DCM._make_empty(vars, ks)
        b = tuple(tuple(d.bounds[i][j] for j in keep) for i in keep)
        return DCM(vars, ks, b)

    def includes(self, other: "DCM") -> bool:
        """``other`` ⊆ ``self`` as point sets."""
        if self.vars != other.vars:
            raise IncompatibleContextError(f"variable mismatch: {self.vars} vs {other.vars}")
        a, b = self.canonicalize(), other.canonicalize()
        if b.empty:
            return True
        if a.empty:
            return False
        if a.rates == b.rates:
            return all(bb <= ab for ra, rb in zip(a.bounds, b.bounds) for ab, bb in zip(ra, rb))
        premise = b.linear_constraints()
        return all(linear.entails(premise, c) for c in a.linear_constraints())

    def to_zone_constraints(self) -> list[ZoneConstraint]:
        """Finite entries as zone constraints, single-variable ones first.

        Point-valued variables are listed last and relative constraints are
        oriented with the non-point variable first.
        """
        d = self.canonicalize()
        if d.empty:
            raise ValueError("cannot render an empty zone")
        k = d._k()
        fixed = [d.upper(v) == d.lower(v) and not d.upper(v).is_inf and not d.upper(v).strict for v in d.vars]
        order = sorted(range(len(d.vars)), key=lambda t: (fixed[t], t))
        out: list[ZoneConstraint] = []
        for t in order:
            v = d.vars[t]
            lo, hi = d.lower(v), d.upper(v)
            if not lo.is_inf:
                out.append(LowerBound(v, lo))
            if not hi.is_inf:
                out.append(UpperBound(v, hi))
        for pos, ta in enumerate(order):
            for tb in order[pos + 1:]:
                if fixed[ta] and fixed[tb]:
                    continue
                i, j = ta + 1, tb + 1
                up, down = d.bounds[i][j], d.bounds[j][i]
                if up.is_inf and down.is_inf:
                    continue
                lower = INF if down.is_inf else Bound(-down.value, down.strict)
                out.append(Relative(d.vars[ta], d.vars[tb], k[j], k[i], lower, up))
        return out

    # -- display -------------------------------------------------------------

    def table(self, names: Mapping[str, str] | None = None) -> str:
        """Tabular dump with ``x0`` first; cells as ``(a, b, c, rel)``."""
        names = dict(names or {})
        labels = [names.get(v, v) for v in (X0,) + self.vars]
        if self.empty:
            return "(empty zone over " + ", ".join(labels[1:]) + ")"
        k = self._k()
        rows = []
        for i in range(self.size):
            cells = []
            for j in range(self.size):
                b = self.bounds[i][j]
                c = "∞" if b.is_inf else _fmt_num(b.value)
                rel = "<" if b.strict else "≤"
                a, bk = (1, 1) if i == j else (k[j], k[i])
                cells.append(f"({_fmt_num(Fraction(a))}, {_fmt_num(Fraction(bk))}, {c}, {rel})")
            rows.append([labels[i]] + cells)
        header = [""] + labels
        width = [max(len(r[c]) for r in rows + [header]) for c in range(len(header))]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, width)).rstrip()]
        for r in rows:
            lines.append("  ".join(x.ljust(w) for x, w in zip(r, width)).rstrip())
        return "\n".join(lines)

    def render(self, unicode: bool = True, hide: Iterable[str] = ()) -> str:
        hide = [v for v in hide if v in self.vars]
        d = self.project(hide) if hide else self
        if d.is_empty():
            return "false"
        return format_zone(d.to_zone_constraints(), unicode=unicode)

    def __str__(self) -> str:
        return self.render()
