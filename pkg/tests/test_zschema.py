from __future__ import annotations

from fractions import Fraction as F

import pytest

from mzia.dsl import parse_schema
from mzia.errors import ParseError, SchemaError, UndecidableFragmentError
from mzia.fixtures import parity_schemas
from mzia.zschema import (
    GUARDED,
    STRICT,
    Implies,
    ZSchema,
    bruteforce_valid,
    conj,
    counterexample,
    evaluate_schema,
    geq_bruteforce,
    hide,
    rcl,
    rcl_counterexample,
    rcz,
    satisfiable,
    tv,
)

S0 = "[l : {l0, l1, l2, l3}; x! : real; y! : real; clock : real | l = l0; x! = 20; y! = 100; clock = 0]"
S1 = (
    "[l : {l0, l1, l2, l3}; x! : real; y! : real; clock : real | l = l1; 620 <= x! <= 920;"
    " 4600 <= 30x! - 20y! <= 13600; y! = 700; 30 <= clock <= 45]"
)
S1Q = (
    "[l : {l0, l1, l2, l3}; x! : real; y! : real; clock : real | l = l1; 720 <= x! <= 820;"
    " 7600 <= 30x! - 20y! <= 10600; y! = 700; 35 <= clock <= 40]"
)
A0 = "[y! : real | y! = 700]"


def test_evaluate_state_schema():
    s0 = parse_schema(S0)
    assert evaluate_schema({"l": "l0", "x!": 20, "y!": 100, "clock": 0}, s0)
    assert not evaluate_schema({"l": "l0", "x!": 21, "y!": 100, "clock": 0}, s0)
    assert evaluate_schema({"y!": F(700)}, parse_schema(A0))


def test_evaluate_rejects_missing_or_badly_typed():
    s0 = parse_schema(S0)
    with pytest.raises(SchemaError):
        evaluate_schema({"l": "l0", "x!": 20}, s0)
    with pytest.raises(SchemaError):
        evaluate_schema({"l": "l9", "x!": 20, "y!": 100, "clock": 0}, s0)
    with pytest.raises(SchemaError):
        evaluate_schema({"n": F(1, 2)}, parse_schema("[n : 0..3 | n = 1]"))


def test_undeclared_name_rejected():
    with pytest.raises(SchemaError):
        ZSchema((), (parse_schema("[w : 0..1 | w = 1]").atoms[0],))
    with pytest.raises(ParseError, match="undeclared name 'w'"):
        ZSchema.parse("[x! : real | x! = w]")


def test_hide_nothing_is_identity():
    s = parse_schema(S1)
    assert hide(s, ()) == s


def test_hide_location_and_clock_gives_zone():
    h = hide(parse_schema(S1), ["l", "clock"])
    assert h.vars == {"x!", "y!"}
    assert evaluate_schema({"x!": 650, "y!": 700}, h)
    assert not evaluate_schema({"x!": 600, "y!": 700}, h)
    zone_only = parse_schema("[x! : real; y! : real | 620 <= x! <= 920; 4600 <= 30x! - 20y! <= 13600; y! = 700]")
    assert tv(Implies(h, zone_only)) and tv(Implies(zone_only, h))


def test_hide_undeclared_is_error():
    with pytest.raises(SchemaError):
        hide(parse_schema(A0), ["q"])


def test_hide_parity_example():
    _, b = parity_schemas(bound=20)
    h = hide(b, ["z", "u?", "v!"])
    assert h.vars == {"x?", "y!"}
    pi = F(314159, 100000)
    for x in range(21):
        assert evaluate_schema({"x?": x, "y!": 2 * pi * (x // 2)}, h)
        assert not evaluate_schema({"x?": x, "y!": 2 * pi * (x // 2) + 1}, h)


def test_tv_zone_implications():
    s1, s1q = parse_schema(S1), parse_schema(S1Q)
    assert tv(Implies(s1q, s1))
    assert tv(Implies(s1, s1))
    assert not tv(Implies(s1, s1q))
    cex = counterexample(Implies(s1, s1q))
    assert cex is not None
    assert evaluate_schema({k: cex[k] for k in s1.vars}, s1)
    assert not evaluate_schema({k: cex[k] for k in s1q.vars}, s1q)


def test_tv_counterexample_at_published_point():
    s1 = hide(parse_schema(S1), ["l", "clock"])
    s1q = hide(parse_schema(S1Q), ["l", "clock"])
    pt = {"x!": F(650), "y!": F(700)}
    assert evaluate_schema(pt, s1) and not evaluate_schema(pt, s1q)
    assert not tv(Implies(s1, s1q))


def test_tv_unbounded_integer_is_undecidable():
    s = parse_schema("[n : nat | n >= 0]")
    with pytest.raises(UndecidableFragmentError) as err:
        tv(Implies(s, s))
    assert err.value.variable == "n"


def test_rcl_output_only():
    a = parse_schema(A0)
    assert rcl(a, a, GUARDED) and rcl(a, a, STRICT)
    wide = parse_schema("[y! : real | 600 <= y! <= 800]")
    assert rcl(wide, a)
    assert not rcl(a, wide)


def test_rcl_input_only():
    m = parse_schema("[x? : 0..9 | x? <= 3]")
    n = parse_schema("[x? : 0..9 | x? <= 5]")
    assert rcl(m, n)
    assert not rcl(n, m)
    assert geq_bruteforce(m, n) and not geq_bruteforce(n, m)


def test_rcl_empty_variable_sets():
    assert rcl(ZSchema(), ZSchema())
    assert geq_bruteforce(ZSchema(), ZSchema())


def test_rcl_output_sets_differ():
    assert not rcl(parse_schema(A0), parse_schema("[x! : real | x! = 1]"))


def test_parity_example_modes():
    a, b = parity_schemas()
    assert rcz(a, b, GUARDED)
    assert not rcz(a, b, STRICT)
    ok, cex = rcl_counterexample(a, hide(b, ["z", "u?", "v!"]), STRICT)
    assert not ok and cex["x?"] % 2 == 1


def test_parity_example_oracle_agrees():
    a, b = parity_schemas()
    bh = hide(b, ["z", "u?", "v!"])
    assert geq_bruteforce(a, bh, GUARDED) is True
    assert geq_bruteforce(a, bh, STRICT) is False


def test_rcz_fixture_states():
    s0 = parse_schema(S0)
    s1, s1q = parse_schema(S1), parse_schema(S1Q)
    assert rcz(s0, s0)
    assert rcz(s1, s1q)
    assert not rcz(s1q, s1)


def test_rcz_io_inclusion():
    a = parse_schema("[x? : 0..3; y! : real | y! = x?]")
    b = parse_schema("[y! : real | y! = 1]")
    assert not rcz(a, b)


def test_rcz_hides_target_by_source_io():
    # w! is outside s's interface, so it is hidden on the t side
    s = parse_schema("[y! : real | y! = 1]")
    t = parse_schema("[y! : real; w! : real | y! = 1; w! = 5]")
    assert rcz(s, t)
    assert not rcz(t, s)
    t2 = parse_schema("[y! : real; k : 0..2 | y! = k; k = 1]")
    assert rcz(s, t2)


def test_conj_merges_and_checks_types():
    a = parse_schema("[x! : real | x! >= 1]")
    b = parse_schema("[x! : real | x! <= 2]")
    c = conj(a, b)
    assert evaluate_schema({"x!": F(3, 2)}, c)
    assert not evaluate_schema({"x!": 3}, c)
    with pytest.raises(SchemaError):
        conj(a, parse_schema("[x! : 0..3 | x! = 1]"))


def test_satisfiable():
    assert satisfiable(parse_schema(S1))
    assert not satisfiable(conj(parse_schema("[y! : real | y! = 100]"), parse_schema(A0)))


def test_bruteforce_valid_matches_tv_small():
    m = parse_schema("[x? : 0..9 | x? <= 3]")
    n = parse_schema("[x? : 0..9 | x? <= 5]")
    assert bruteforce_valid(Implies(m, n)) and tv(Implies(m, n))
    assert not bruteforce_valid(Implies(n, m)) and not tv(Implies(n, m))


def test_atoms_beyond_two_continuous_rejected():
    with pytest.raises(ParseError, match="more than two continuous"):
        parse_schema("[a : real; b : real; c : real | a + b + c <= 1]")
