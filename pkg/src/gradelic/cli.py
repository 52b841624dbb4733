"""Command-line front end.

Exit codes: ``check`` prints true/false and exits 0/1; ``sat`` exits 0 (sat),
1 (unsat), 3 (unsat up to the search bounds); ``compare`` exits 1 on any
mismatch.  Input errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .compiler import compile_formula
from .formula import Formula, FormulaError, atoms as formula_atoms, degree, length, parse, render
from .games import build_membership_game, check_with_game, compiled, model_check
from .ghta import validate_hesitancy
from .satisfiability import DEFAULT_DEGREE_CAP, BudgetExceeded, sat
from .structures import LtsError, dump_lts, load_lts, lts_to_dot
from .suites import SUITES, corrupted

DEFAULT_SEED = 7


class InputError(Exception):
    pass


def read_formula(arg: str) -> Formula:
    """Parse a formula given inline or as a path to a UTF-8 file ('#' starts a comment)."""
    text = arg
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    lines = [line.split("#", 1)[0] for line in text.splitlines()]
    text = " ".join(line.strip() for line in lines if line.strip())
    try:
        return parse(text)
    except FormulaError as exc:
        raise InputError(f"formula error: {exc}") from None


def read_lts(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return load_lts(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (LtsError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad LTS file {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ===== Commands =====


def cmd_check(args) -> int:
    s = read_lts(args.lts)
    f = read_formula(args.formula)
    state = args.state or s.initial
    if state not in s.index:
        raise InputError(f"unknown state {state}")
    verdict, game, sol = check_with_game(s, state, f)
    print("true" if verdict else "false")
    if args.explain:
        print(f"game positions: {len(game)}")
        print(f"automaton region: {len(sol.region(0))}")
        print(f"pathfinder region: {len(sol.region(1))}")
        print(f"automaton strategy entries: {len(sol.strategy)}")
    return 0 if verdict else 1


def cmd_sat(args) -> int:
    f = read_formula(args.formula)
    try:
        verdict = sat(f, args.degree, args.mode, args.max_states)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}")
        return 3
    print(verdict.summary())
    for note in verdict.notes:
        print(f"note: {note}")
    if verdict.is_sat:
        text = dump_lts(verdict.witness)
        if args.witness:
            _write(args.witness, text)
        else:
            sys.stdout.write(text)
        return 0
    return 1 if verdict.outcome == "unsat" else 3


def cmd_dump(args) -> int:
    f = read_formula(args.formula)
    if args.what == "automaton":
        a = compile_formula(f, formula_atoms(f))
        text = a.to_dot() if args.format == "dot" else a.dump_json()
    else:
        if not args.lts:
            raise InputError("dump game needs --lts")
        s = read_lts(args.lts)
        game = build_membership_game(compiled(f), s, args.state or s.initial)
        if args.format == "dot":
            text = game.to_dot()
        else:
            text = json.dumps(
                {
                    "initial": game.initial,
                    "owner": game.owner,
                    "priority": game.priority,
                    "succ": game.succ,
                    "labels": game.labels,
                },
                indent=2,
            ) + "\n"
    _write(args.output, text)
    return 0


def cmd_compare(args) -> int:
    if args.fragment not in SUITES:
        raise InputError(f"unknown fragment {args.fragment}; choose from {', '.join(sorted(SUITES))}")
    if args.cases < 1:
        raise InputError("--cases must be positive")
    checker = corrupted(model_check) if args.inject_fault else model_check
    print(f"seed: {args.seed}")
    report = SUITES[args.fragment](args.seed, args.cases, checker)
    print("\n".join(report.lines()))
    return 0 if report.ok else 1


def cmd_metrics(args) -> int:
    f = read_formula(args.formula)
    a = compile_formula(f, formula_atoms(f))
    print(f"formula: {render(f)}")
    print(f"length: {length(f)}")
    print(f"degree: {degree(f)}")
    print(f"states: {len(a.states)}")
    print(f"sets: {len(a.kinds)}")
    print(f"depth: {a.depth()}")
    for step in a.info.get("steps", []):
        print(
            "step g={g} |Q+|={q_plus} |Q-|={q_minus} |Q1| raw={q1_raw} reachable={q1_materialized} sets={sets}".format(
                **step
            )
        )
    if args.hesitancy:
        rep = validate_hesitancy(a, args.hesitancy)
        print(f"hesitancy d<={args.hesitancy}: checked={rep.checked} violations={len(rep.violations)}")
    return 0


# ===== Parser =====


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradelic", description="GCTL* model checking and satisfiability")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="model-check an LTS")
    c.add_argument("lts", help="LTS JSON file")
    c.add_argument("formula", help="formula text or file")
    c.add_argument("--state", help="state to check (default: initial)")
    c.add_argument("--explain", action="store_true", help="print game and strategy sizes")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sat", help="decide satisfiability")
    s.add_argument("formula")
    s.add_argument("--degree", type=int, help=f"branching bound (default: min(|Q|^2, {DEFAULT_DEGREE_CAP}))")
    s.add_argument("--max-states", type=int, default=3, help="state bound for bounded search")
    s.add_argument("--mode", choices=("bounded", "full", "auto"), default="auto")
    s.add_argument("--witness", help="write the witness LTS here instead of stdout")
    s.set_defaults(func=cmd_sat)

    d = sub.add_parser("dump", help="dump an automaton or a membership game")
    d.add_argument("what", choices=("automaton", "game"))
    d.add_argument("formula")
    d.add_argument("--lts", help="LTS JSON file (game only)")
    d.add_argument("--state")
    d.add_argument("--format", choices=("dot", "json"), default="json")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dump)

    m = sub.add_parser("compare", help="cross-check the model checker against an oracle")
    m.add_argument("--fragment", default="ex-count", help=f"one of: {', '.join(sorted(SUITES))}")
    m.add_argument("--cases", type=int, default=200)
    m.add_argument("--seed", type=int, default=DEFAULT_SEED)
    m.add_argument("--inject-fault", action="store_true", help="run against a deliberately broken checker")
    m.set_defaults(func=cmd_compare)

    t = sub.add_parser("metrics", help="formula and automaton size metrics")
    t.add_argument("formula")
    t.add_argument("--hesitancy", type=int, metavar="D", help="also validate hesitancy up to degree D")
    t.set_defaults(func=cmd_metrics)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sat" and args.degree is not None and args.degree < 1:
        print("error: --degree must be positive", file=sys.stderr)
        return 2
    if args.command == "sat" and args.max_states < 1:
        print("error: --max-states must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
