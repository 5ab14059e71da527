from __future__ import annotations

import io
import json

import pytest

from mzia.cli import run_cli
from mzia.fixtures import fixture_path

P = str(fixture_path("P"))
Q = str(fixture_path("Q"))

REACH_P = """\
automaton P: 7 states, 6 transitions
s0 l0 { x! = 20 ∧ y! = 100 ∧ clock = 0 }
s1 l1 { 620 ≤ x! ≤ 920 ∧ 4600 ≤ 30x! − 20y! ≤ 13600 ∧ y! = 700 ∧ 30 ≤ clock ≤ 45 }
s2 l2 { 820 ≤ y! ≤ 940 ∧ 6600 ≤ 30y! − 30x! ≤ 10200 ∧ x! = 600 ∧ 34 ≤ clock ≤ 49 }
s3 l3 { 960 ≤ x! ≤ 1080 ∧ −4800 ≤ 20x! − 30y! ≤ −2400 ∧ y! = 800 ∧ 46 ≤ clock ≤ 65 }
s4 l0 { 900 ≤ y! ≤ 960 ∧ 0 ≤ 20y! − 20x! ≤ 1200 ∧ x! = 900 ∧ 51 ≤ clock ≤ 73 }
s5 l1 { 900 ≤ x! ≤ 1000 ∧ 13000 ≤ 30x! − 20y! ≤ 16000 ∧ y! = 700 ∧ 51 ≤ clock ≤ 75 }
s6 l2 { 820 ≤ y! ≤ 850 ∧ 6600 ≤ 30y! − 30x! ≤ 7500 ∧ x! = 600 ∧ 55 ≤ clock ≤ 78 } subsumed by s2
transitions:
  s0 --a0--> s1
  s1 --a1--> s2
  s2 --a2--> s3
  s3 --a3--> s4
  s4 --a0--> s5
  s5 --a1--> s6
"""


def run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_reach_text_golden():
    code, out, _ = run("reach", P)
    assert code == 0
    assert out == REACH_P


def test_reach_ascii():
    _, out, _ = run("reach", P, "--ascii")
    assert "620 <= x! <= 920 && 4600 <= 30*x! - 20*y! <= 13600 && y! = 700 && 30 <= clock <= 45" in out


def test_reach_json_stable():
    code, out, _ = run("reach", Q, "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [s["id"] for s in data["states"]] == ["s0", "s1", "s2", "s3", "s4"]
    assert data["states"][1]["clock"] == ["35", "40"]
    assert data["states"][1]["zone"] == "720 <= x! <= 820 && 7600 <= 30*x! - 20*y! <= 10600 && y! = 700"
    assert len(data["transitions"]) == 4
    assert run("reach", Q, "--format", "json")[1] == out


def test_reach_dump_dcm():
    code, out, _ = run("reach", P, "--dump-dcm")
    assert code == 0
    assert "s0 initial matrix" in out
    assert "s0 --a0--> s1" in out
    assert "(30, 20, 13600, ≤)" in out
    assert "(20, 30, -4600, ≤)" in out
    assert "[reset ∧ target invariant]" in out


def test_reach_redirect():
    _, out, _ = run("reach", P, "--subsumption", "redirect")
    assert "s5 --a1--> s2 (redirected)" in out
    assert "s6" not in out


def test_check_positive():
    code, out, _ = run("check", P, Q)
    assert code == 0
    assert out == "P refines Q (mode guarded, direction algorithm)\n"


def test_check_negative_with_witness():
    code, out, _ = run("check", Q, P, "--witness")
    assert code == 1
    assert out == (
        "Q does not refine P (mode guarded, direction algorithm)\n"
        "witness:\n"
        "  (s0, s0) --a0-->\n"
        "  (s1, s1) fails RCZ-state\n"
    )


def test_check_json():
    code, out, _ = run("check", Q, P, "--format", "json", "--witness")
    assert code == 1
    d = json.loads(out)
    assert d["refines"] is False
    assert d["witness"]["check"] == "RCZ-state"
    assert d["p"] == "Q" and d["q"] == "P"
    _, out2, _ = run("check", Q, P, "--format", "json")
    assert "witness" not in json.loads(out2)


def test_check_definition_direction():
    code, out, _ = run("check", P, Q, "--direction", "definition", "--witness")
    assert code == 1
    assert "(s4, s4) fails missing-transition on a0" in out


def test_validate():
    code, out, _ = run("validate", P)
    assert code == 0
    assert out.splitlines()[-1] == "P: valid (0 errors, 4 warnings)"
    code, out, _ = run("validate", Q, "--format", "json")
    d = json.loads(out)
    assert d["ok"] is True and len(d["warnings"]) == 4 and d["errors"] == []


def test_validate_invalid(tmp_path):
    bad = tmp_path / "bad.mzia"
    bad.write_text(open(P, encoding="utf-8").read().replace("reset x! := 600", ""), encoding="utf-8")
    code, out, _ = run("validate", str(bad))
    assert code == 2
    assert "initialized-rate" in out
    code, _, err = run("reach", str(bad))
    assert code == 2 and "initialized-rate" in err


def test_parse_error_exit(tmp_path):
    bad = tmp_path / "bad.mzia"
    bad.write_text("automaton X {\n  location ;\n}\n", encoding="utf-8")
    code, _, err = run("reach", str(bad))
    assert code == 2
    assert "line 2, column 12" in err


def test_simulate_text():
    code, out, _ = run("simulate", P, "--seed", "1", "--steps", "2")
    assert code == 0
    assert out == (
        "start   l0 clock=0 x!=20 y!=100\n"
        "delay 45       -> l0 clock=45 x!=920 y!=1000\n"
        "action a0      -> l1 clock=45 x!=920 y!=700\n"
    )


def test_simulate_json():
    code, out, _ = run("simulate", P, "--seed", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 3
    assert d["start"]["valuation"] == {"clock": "0", "x!": "20", "y!": "100"}
    assert run("simulate", P, "--seed", "3", "--format", "json")[1] == out


@pytest.mark.parametrize("argv", [["bogus"], [], ["check", P], ["simulate", P]])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_missing_file():
    code, _, err = run("reach", "/no/such/file.mzia")
    assert code == 2 and "cannot read" in err


def test_capacity_error_exit(tmp_path):
    # x! is never reset, so its lower bound climbs on every cycle
    src = tmp_path / "grow.mzia"
    src.write_text(
        open(P, encoding="utf-8").read().replace("inv x! <= 1000, y! <= 940;", "inv y! <= 940;")
        .replace("trans l1 -> l2 on a1 when y! >= 820 reset x! := 600;", "trans l1 -> l0 on a1 when y! >= 820 reset y! := 100;"),
        encoding="utf-8",
    )
    code, _, err = run("reach", str(src), "--max-states", "20")
    assert code == 2 and "exceeded 20 states" in err
