"""Command line interface: ``mzia validate|reach|check|simulate``.

Exit status is 0 on success (or when refinement holds), 1 when refinement
fails and 2 on usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

from .dcm import LowerBound, UpperBound, format_zone
from .dsl import ModelSource, ValidationFailed, parse_model
from .errors import MziaError
from .model import MZIA, validate_model
from .refinement import ALGORITHM, DEFINITION, rc
from .zonegraph import LEAF, REDIRECT, ZoneAutomaton, build_zone_automaton, post, simulate
from .zschema import GUARDED, STRICT

__all__ = ["main", "run_cli", "zone_text"]

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


def _num(q: Fraction | None) -> str | None:
    if q is None:
        return None
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def clock_constraints(z: ZoneAutomaton, sid: str):
    st = z.state(sid)
    lo, hi = st.zone.lower(z.clock), st.zone.upper(z.clock)
    cons = []
    if not lo.is_inf:
        cons.append(LowerBound(z.clock, lo))
    if not hi.is_inf:
        cons.append(UpperBound(z.clock, hi))
    return cons


def zone_text(z: ZoneAutomaton, sid: str, unicode: bool = True, clock: bool = True) -> str:
    """Zone over the continuous variables, then the clock interval."""
    parts = [z.clockless(sid).render(unicode=unicode)]
    if clock and clock_constraints(z, sid):
        parts.append(format_zone(clock_constraints(z, sid), unicode=unicode))
    return (" ∧ " if unicode else " && ").join(p for p in parts if p)


def _load(path: str) -> MZIA:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise MziaError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_model(ModelSource(text, str(p)))


def _dump(obj, out: TextIO) -> None:
    out.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


# -- subcommands ---------------------------------------------------------------


def _cmd_validate(args, out: TextIO) -> int:
    p = Path(args.file)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise MziaError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    m = parse_model(ModelSource(text, str(p)), validate=False)
    rep = validate_model(m)
    if args.format == "json":
        _dump(
            {
                "automaton": m.name,
                "ok": rep.ok,
                "errors": [{"rule": f.rule, "message": f.message, "context": f.context} for f in rep.errors],
                "warnings": [{"rule": f.rule, "message": f.message, "context": f.context} for f in rep.warnings],
            },
            out,
        )
    else:
        for f in rep.errors:
            out.write(f"error   {f}\n")
        for f in rep.warnings:
            out.write(f"warning {f}\n")
        status = "valid" if rep.ok else "invalid"
        out.write(f"{m.name}: {status} ({len(rep.errors)} errors, {len(rep.warnings)} warnings)\n")
    return EXIT_OK if rep.ok else EXIT_ERROR


def _reach_json(z: ZoneAutomaton, dump: dict | None) -> dict:
    states = []
    for st in z.states:
        lo, hi = st.zone.lower(z.clock), st.zone.upper(z.clock)
        entry = {
            "id": st.id,
            "location": st.location,
            "zone": zone_text(z, st.id, unicode=False, clock=False),
            "clock": [_num(lo.value), _num(hi.value)],
            "subsumed_by": z.subsumed.get(st.id),
        }
        if dump is not None:
            entry["trace"] = dump.get(st.id, [])
        states.append(entry)
    return {
        "automaton": z.model.name,
        "subsumption": z.mode,
        "initial": list(z.initial),
        "states": states,
        "transitions": [{"source": s, "action": a, "target": t} for s, a, t in z.transitions],
    }


def _traces(z: ZoneAutomaton) -> dict[str, list[tuple[str, str, str]]]:
    """Intermediate matrices of the successor computation, keyed by the reached state."""
    m = z.model
    out: dict[str, list] = {}
    for src, a, dst in z.transitions:
        s = z.state(src)
        for t in m.outgoing(s.location):
            if t.action != a:
                continue
            trace: list = []
            nxt = post(m, s.sym, t, trace)
            if nxt is None:
                continue
            if nxt == z.state(dst).sym or (src, a, dst) in z.redirected:
                out.setdefault(dst, []).append(
                    {"from": src, "action": a, "steps": [{"label": lab, "table": d.table()} for lab, d in trace]}
                )
                break
    return out


def _cmd_reach(args, out: TextIO) -> int:
    m = _load(args.file)
    z = build_zone_automaton(m, subsumption=args.subsumption, cap=args.max_states)
    dump = _traces(z) if args.dump_dcm else None
    if args.format == "json":
        _dump(_reach_json(z, dump), out)
        return EXIT_OK
    out.write(f"automaton {m.name}: {len(z.states)} states, {len(z.transitions)} transitions\n")
    if dump is not None:
        init = z.state(z.initial[0])
        out.write(f"\n{init.id} initial matrix\n{init.zone.table()}\n")
    for st in z.states:
        if dump is not None:
            for item in dump.get(st.id, []):
                out.write(f"\n{item['from']} --{item['action']}--> {st.id}\n")
                for step in item["steps"]:
                    out.write(f"[{step['label']}]\n{step['table']}\n")
    if dump is not None:
        out.write("\n")
    for st in z.states:
        line = f"{st.id} {st.location} {{ {zone_text(z, st.id, unicode=not args.ascii)} }}"
        if st.id in z.subsumed:
            line += f" subsumed by {z.subsumed[st.id]}"
        out.write(line + "\n")
    out.write("transitions:\n")
    for s, a, t in z.transitions:
        mark = " (redirected)" if (s, a, t) in z.redirected else ""
        out.write(f"  {s} --{a}--> {t}{mark}\n")
    return EXIT_OK


def _cmd_check(args, out: TextIO) -> int:
    mp, mq = _load(args.p), _load(args.q)
    zp = build_zone_automaton(mp, subsumption=args.subsumption, cap=args.max_states)
    zq = build_zone_automaton(mq, subsumption=args.subsumption, cap=args.max_states)
    v = rc(zp, zq, mode=args.mode, direction=args.direction, check_delays=args.check_delays)
    if args.format == "json":
        d = v.to_dict()
        d["p"], d["q"] = mp.name, mq.name
        if not args.witness:
            d.pop("witness")
        _dump(d, out)
    else:
        word = "refines" if v.refines else "does not refine"
        out.write(f"{mp.name} {word} {mq.name} (mode {v.mode}, direction {v.direction})\n")
        if args.witness and v.witness is not None:
            out.write("witness:\n")
            for line in v.witness.describe().splitlines():
                out.write(f"  {line}\n")
    return EXIT_OK if v.refines else EXIT_NEGATIVE


def _cmd_simulate(args, out: TextIO) -> int:
    m = _load(args.file)
    traj = simulate(m, args.seed, args.steps)

    def val(s):
        return {k: _num(v) for k, v in s.valuation}

    if args.format == "json":
        _dump(
            {
                "automaton": m.name,
                "seed": args.seed,
                "start": {"location": traj.start.location, "valuation": val(traj.start)},
                "steps": [
                    {
                        "kind": st.kind,
                        "label": _num(st.label) if st.kind == "delay" else st.label,
                        "location": st.state.location,
                        "valuation": val(st.state),
                    }
                    for st in traj.steps
                ],
                "deadlock": traj.deadlock,
            },
            out,
        )
        return EXIT_OK

    def show(s) -> str:
        return f"{s.location} " + " ".join(f"{k}={_num(v)}" for k, v in s.valuation)

    out.write(f"start   {show(traj.start)}\n")
    for st in traj.steps:
        label = f"delay {_num(st.label)}" if st.kind == "delay" else f"action {st.label}"
        out.write(f"{label:<14} -> {show(st.state)}\n")
    if traj.deadlock:
        out.write("deadlock\n")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mzia", description="Zone reachability and refinement checking for MZIA models.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a model for structural errors")
    v.add_argument("file")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(func=_cmd_validate)

    r = sub.add_parser("reach", help="build and print the zone automaton")
    r.add_argument("file")
    r.add_argument("--dump-dcm", action="store_true", help="print every intermediate matrix")
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--subsumption", choices=(LEAF, REDIRECT), default=LEAF)
    r.add_argument("--ascii", action="store_true", help="use <=, - and && in zones")
    r.add_argument("--max-states", type=int, default=10_000, help="give up after this many zone states")
    r.set_defaults(func=_cmd_reach)

    c = sub.add_parser("check", help="decide whether P refines Q")
    c.add_argument("p")
    c.add_argument("q")
    c.add_argument("--mode", choices=(GUARDED, STRICT), default=GUARDED)
    c.add_argument("--witness", action="store_true", help="print the failure path")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--direction", choices=(ALGORITHM, DEFINITION), default=ALGORITHM)
    c.add_argument("--check-delays", action="store_true", help="also require delay matching")
    c.add_argument("--subsumption", choices=(LEAF, REDIRECT), default=LEAF)
    c.add_argument("--max-states", type=int, default=10_000, help="give up after this many zone states")
    c.set_defaults(func=_cmd_check)

    s = sub.add_parser("simulate", help="print a seeded random run")
    s.add_argument("file")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--steps", type=int, default=12)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=_cmd_simulate)
    return ap


def run_cli(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except ValidationFailed as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    except MziaError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
