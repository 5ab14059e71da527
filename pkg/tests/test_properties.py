"""Randomised properties checked against independent oracles.

Each property records how many cases it ran in ``CASES`` so the acceptance
suite can assert the minimum count.
"""

from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction as F

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import gfp_simulation, random_lts, random_model
from mzia.dcm import DCM, INF, LE, LT, LowerBound, Relative, UpperBound
from mzia.dsl import parse_schema
from mzia.fixtures import boiler_p, boiler_q
from mzia.refinement import rc
from mzia.zonegraph import LEAF, REDIRECT, build_zone_automaton, simulate, trajectory_covered
from mzia.zschema import GUARDED, STRICT, Implies, bruteforce_valid, geq_bruteforce, rcl, tv

CASES: Counter[str] = Counter()
N = 200
PROPS = settings(max_examples=N, deadline=None, derandomize=True, suppress_health_check=list(HealthCheck))

VARS = ("x", "y", "z")

# -- strategies ------------------------------------------------------------------


@st.composite
def rates(draw):
    return {v: F(draw(st.sampled_from([1, 2, 3]))) for v in VARS}


def _bound(draw, lo=-2, hi=12):
    return (LT if draw(st.booleans()) else LE)(F(draw(st.integers(lo, hi))))


@st.composite
def constraints(draw, r):
    out = []
    for _ in range(draw(st.integers(0, 5))):
        kind = draw(st.sampled_from(["upper", "lower", "rel"]))
        v = draw(st.sampled_from(VARS))
        if kind == "upper":
            out.append(UpperBound(v, _bound(draw, 0, 12)))
        elif kind == "lower":
            out.append(LowerBound(v, _bound(draw, 0, 12)))
        else:
            w = draw(st.sampled_from([u for u in VARS if u != v]))
            lo = _bound(draw, -20, 20) if draw(st.booleans()) else INF
            up = _bound(draw, -20, 20) if draw(st.booleans()) else INF
            out.append(Relative(v, w, r[w], r[v], lo, up))
    return out


@st.composite
def zones(draw, r):
    return DCM.from_constraints(VARS, r, draw(constraints(r)))


points = st.fixed_dictionaries({v: st.integers(-2, 26).map(lambda n: F(n, 2)) for v in VARS})


def holds(c, p) -> bool:
    """Direct evaluation of one zone constraint at a point, independent of the matrix code."""

    def le(value, b):
        return b.is_inf or (value < b.value if b.strict else value <= b.value)

    def ge(value, b):
        return b.is_inf or (value > b.value if b.strict else value >= b.value)

    if isinstance(c, UpperBound):
        return le(p[c.var], c.bound)
    if isinstance(c, LowerBound):
        return ge(p[c.var], c.bound)
    e = c.coeff_a * p[c.var_a] - c.coeff_b * p[c.var_b]
    return ge(e, c.lower) and le(e, c.upper)


# -- (a) matrix laws ---------------------------------------------------------------


@PROPS
@given(st.data())
def test_dcm_canonicalize_idempotent(data):
    CASES["dcm-canonical"] += 1
    r = data.draw(rates())
    d = data.draw(zones(r))
    assert d.canonicalize() == d
    assert d.canonicalize().canonicalize() == d.canonicalize()


@PROPS
@given(st.data())
def test_dcm_includes_partial_order(data):
    CASES["dcm-order"] += 1
    r = data.draw(rates())
    a = data.draw(zones(r))
    b = a.intersect(data.draw(zones(r)))
    c = b.intersect(data.draw(zones(r)))
    assert a.includes(a)
    assert a.includes(b) and b.includes(c) and a.includes(c)
    other = data.draw(zones(r))
    if not a.is_empty() and not other.is_empty() and a.includes(other) and other.includes(a):
        assert a == other


@PROPS
@given(st.data())
def test_dcm_intersect_point_semantics(data):
    CASES["dcm-points"] += 1
    r = data.draw(rates())
    ca, cb = data.draw(constraints(r)), data.draw(constraints(r))
    a, b = DCM.from_constraints(VARS, r, ca), DCM.from_constraints(VARS, r, cb)
    both = a.intersect(b)
    for _ in range(8):
        p = data.draw(points)
        in_a, in_b = all(holds(c, p) for c in ca), all(holds(c, p) for c in cb)
        assert (p in a) == in_a
        assert (p in both) == (in_a and in_b)
        if p in both:
            assert not both.is_empty()


# -- (b) flow invariance -------------------------------------------------------------


@PROPS
@given(st.data())
def test_flow_invariance(data):
    CASES["flow"] += 1
    r = data.draw(rates())
    d = data.draw(zones(r))
    if d.is_empty():
        return
    e = d.elapse()
    for i in VARS:
        for j in VARS:
            if i != j:
                assert e.entry(i, j) == d.entry(i, j)
    start = data.draw(points)
    pt = DCM.point(start, r, VARS)
    flowed = pt.elapse()
    for t in (F(0), F(1, 3), F(5, 2), F(40)):
        q = {v: start[v] + r[v] * t for v in VARS}
        assert q in flowed
        for i in VARS:
            for j in VARS:
                if i != j:
                    assert r[j] * q[i] - r[i] * q[j] == r[j] * start[i] - r[i] * start[j]
    assert flowed.includes(pt)


# -- (c) simulation soundness ---------------------------------------------------------

_FIXTURES = {}


def _fixture_automata():
    if not _FIXTURES:
        for m in (boiler_p(), boiler_q()):
            for mode in (LEAF, REDIRECT):
                _FIXTURES[(m.name, mode)] = (m, build_zone_automaton(m, subsumption=mode))
    return _FIXTURES


def test_simulation_soundness_fixtures():
    for (name, mode), (m, z) in _fixture_automata().items():
        for seed in range(1000):
            CASES["simulate-fixtures"] += 1
            traj = simulate(m, seed)
            assert trajectory_covered(z, traj), (name, mode, seed)


@PROPS
@given(st.integers(0, 2**32 - 1), st.sampled_from([LEAF, REDIRECT]))
def test_simulation_soundness_random_models(seed, mode):
    CASES["simulate-random"] += 1
    m = random_model(random.Random(seed))
    z = build_zone_automaton(m, subsumption=mode, cap=400)
    for s in range(5):
        assert trajectory_covered(z, simulate(m, seed + s)), (seed, s)


# -- (d) validity vs enumeration -------------------------------------------------------

DISCRETE = {"a": "0..6", "b": "0..6", "c": "{r, g, k}"}


@st.composite
def discrete_atom(draw, names):
    nums = [n for n in names if n != "c"]
    kind = draw(st.sampled_from(["lin", "eq", "par", "mod", "enum", "or"] if nums else ["enum"]))
    if kind == "enum" or not nums:
        if "c" not in names:
            return "true"
        op = draw(st.sampled_from(["=", "/="]))
        return f"c {op} {draw(st.sampled_from(['r', 'g', 'k']))}"
    u = draw(st.sampled_from(nums))
    w = draw(st.sampled_from(nums))
    k = draw(st.integers(-2, 8))
    if kind == "lin":
        return f"{draw(st.integers(1, 3))}*{u} - {w} {draw(st.sampled_from(['<=', '<', '>=', '>']))} {k}"
    if kind == "eq":
        return f"{u} = {w}"
    if kind == "par":
        return f"{draw(st.sampled_from(['even', 'odd']))}({u})"
    if kind == "mod":
        return f"{u} mod 3 = {draw(st.integers(0, 2))}"
    return f"({u} <= {k} or {w} >= {k})"


@st.composite
def discrete_schema(draw):
    names = draw(st.lists(st.sampled_from(sorted(DISCRETE)), min_size=1, max_size=3, unique=True))
    atoms = draw(st.lists(discrete_atom(names), max_size=3))
    atoms = [a for a in atoms if a != "true"]
    decls = "; ".join(f"{n} : {DISCRETE[n]}" for n in sorted(names))
    return parse_schema(f"[{decls} | {'; '.join(atoms)}]" if atoms else f"[{decls}]")


@PROPS
@given(discrete_schema(), discrete_schema())
def test_tv_matches_enumeration(a, b):
    CASES["tv"] += 1
    f = Implies(a, b)
    assert tv(f) == bruteforce_valid(f)


# -- (e) schema refinement vs enumeration -----------------------------------------------


@st.composite
def io_schema(draw, real_out: bool):
    out_t = "real" if real_out else "0..3"
    atoms = []
    for _ in range(draw(st.integers(0, 3))):
        kind = draw(st.sampled_from(["in", "out", "rel"]))
        op = draw(st.sampled_from(["<=", "<", ">=", ">", "="]))
        k = draw(st.integers(-1, 3))
        if kind == "in":
            atoms.append(f"x? {op} {max(k, 0)}")
        elif kind == "out":
            atoms.append(f"y! {op} {k}")
        else:
            atoms.append(f"y! {op} x? + {draw(st.integers(-1, 1))}")
    body = "; ".join(atoms)
    return parse_schema(f"[x? : 0..2; y! : {out_t}" + (f" | {body}]" if body else "]"))


@PROPS
@given(st.data())
def test_rcl_matches_enumeration(data):
    CASES["rcl"] += 1
    real_out = data.draw(st.booleans())
    m, n = data.draw(io_schema(real_out)), data.draw(io_schema(real_out))
    for mode in (GUARDED, STRICT):
        assert rcl(m, n, mode) == geq_bruteforce(m, n, mode), mode


# -- (f) refinement vs greatest fixpoint, (g) evaluation bound --------------------------


@PROPS
@given(st.integers(0, 2**32 - 1))
def test_rc_matches_gfp_oracle(seed):
    CASES["rc-gfp"] += 1
    rng = random.Random(seed)
    p, q = random_lts(rng, "P"), random_lts(rng, "Q")
    v = rc(p, q)
    rel = gfp_simulation(p, q)
    assert v.refines == (("s0", "s0") in rel)
    assert v.related <= rel


@PROPS
@given(st.integers(0, 2**32 - 1))
def test_rc_round_evaluations_bounded(seed):
    CASES["rc-bound"] += 1
    rng = random.Random(seed)
    if rng.random() < 0.5:
        p, q = random_lts(rng, "P"), random_lts(rng, "Q")
    else:
        p = build_zone_automaton(random_model(rng), cap=400)
        q = build_zone_automaton(random_model(rng), cap=400)
    v = rc(p, q)
    assert v.stats["max_round_evaluations"] <= len(p) * len(q)
