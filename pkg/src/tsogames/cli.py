"""Command-line entry point: ``python -m tsogames <command> ...``.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 validation error,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import arena as arena_mod
from .loadbuffer import WRONG_ORDER, lb_config_to_json, lb_escape_check, lb_explore, lb_initial, sb_forcing_check
from .program import Objective, ParseError, ProgramError, parse_program, parse_targets, project, serialize_program
from .reductions.pcs import parse_pcs, pcs_to_process_fairness_game, pcs_to_update_fairness_game, script_from_pcs_run
from .reductions.qbf import QbfError, eval_qbf, parse_qbf, qbf_to_program
from .solver import (
    check_update_fair_prefix,
    decide,
    play_script_from_json,
    play_script_to_json,
    script_strategies,
    simulate_play,
)
from .tso import CapExceededError, bounded_explore, config_to_json, initial_configuration
from .views import build_view_arena, solve_single_process, state_space_bound, vertex_name

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_CAP = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _ReadError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _ReadError(f"cannot read {path}: {exc.strerror}") from None


def _load_program(path: str):
    return parse_program(_read(path))


def _emit(obj, out=None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _objective(args, file_objective) -> Objective | None:
    if args.objective or args.targets is not None:
        if not args.objective:
            raise UsageError("--targets needs --objective")
        return Objective(args.objective, parse_targets(args.targets or ""))
    return file_objective


# ---------------------------------------------------------------- commands

def cmd_solve(args):
    program, file_obj = _load_program(args.file)
    objective = _objective(args, file_obj)
    if objective is None:
        raise UsageError("no objective: add an 'objective' line or pass --objective/--targets")
    d = decide(program, objective)
    strategy = None
    if d.witness:
        res = d.witness_result
        single = project(program, d.witness)
        strategy = {}
        for v in res.arena.vertices:
            if v in res.solution.strategy_a:
                t = res.strategy_move(v[0])
                strategy[vertex_name(single, v)] = {"instr": str(t.instr), "to": t.target}
    for w in d.warnings:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit({"winner": d.winner, "witness": d.witness, "strategy": strategy})


def cmd_view_arena(args):
    program, objective = _load_program(args.file)
    single = project(program, args.process)
    res_special = ()
    arena = build_view_arena(single)
    if objective is not None:
        targets = objective.states_of(args.process)
        res_special = [v for v in arena.vertices if v[0].state in targets]
    if args.format == "dot":
        _emit(arena_mod.to_dot(arena, res_special))
    else:
        _emit(arena_mod.to_json(arena, res_special) + "\n")


def cmd_from_qbf(args):
    f = parse_qbf(_read(args.file))
    program, objective = qbf_to_program(f, args.mode)
    _emit(serialize_program(program, objective), args.output)


def cmd_eval_qbf(args):
    src = args.formula
    text = _read(src) if src == "-" or os.path.exists(src) else src
    _emit({"value": eval_qbf(parse_qbf(text))})


def _pcs_game(pcs, fairness):
    return (pcs_to_update_fairness_game if fairness == "update" else pcs_to_process_fairness_game)(pcs)


def cmd_from_pcs(args):
    program, objective = _pcs_game(parse_pcs(_read(args.file)), args.fairness)
    _emit(serialize_program(program, objective), args.output)


def cmd_pcs_script(args):
    pcs = parse_pcs(_read(args.file))
    run = [r for r in args.run.split(",") if r]
    _emit(play_script_to_json(script_from_pcs_run(pcs, run, args.fairness)) + "\n")


def cmd_simulate(args):
    program, objective = _load_program(args.file)
    try:
        data = json.loads(_read(args.script))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.script}: {exc.msg}", exc.lineno, exc.colno) from None
    proc, upd = script_strategies(play_script_from_json(program, data))
    play, outcome = simulate_play(program, objective, initial_configuration(program), proc, upd, args.horizon)
    out = {"outcome": outcome.status, "ply": outcome.ply, "moves": len(play.moves),
           "final": config_to_json(program, play.configs[-1])}
    if outcome.status == "a-deadlock":
        out["buffers_empty"] = outcome.buffers_empty
    if args.check_update_fair:
        v = check_update_fair_prefix(play)
        out["update_fair"] = v.ok
        if not v.ok:
            out["violation"] = v.message
    _emit(out)


def cmd_explore(args):
    program, _ = _load_program(args.file)
    if args.semantics == "sb":
        ex = bounded_explore(program, initial_configuration(program), args.buffer_bound, args.max_states)
        configs = [config_to_json(program, c) for c in ex.configurations]
        _emit({"semantics": "sb", "configurations": len(configs), "steps": len(ex.steps),
               "frontier": len(ex.frontier), "states": configs})
    else:
        order, steps, frontier = lb_explore(program, lb_initial(program), args.buffer_bound, args.max_states)
        _emit({"semantics": "lb", "configurations": len(order), "steps": len(steps),
               "frontier": len(frontier), "states": [lb_config_to_json(program, c) for c in order]})


def cmd_lb_demo(args):
    verdicts = {
        "sb_forcing": sb_forcing_check(args.horizon),
        "sb_wrong_order": sb_forcing_check(args.horizon, WRONG_ORDER),
        "lb_escape": lb_escape_check(args.propagation_bound),
    }
    _emit({k: {"ok": v.ok, "message": v.message, "witness": [str(w) for w in v.witness]}
           for k, v in verdicts.items()})


def cmd_state_bound(args):
    program, _ = _load_program(args.file)
    _emit({"process": args.process, "bound": state_space_bound(project(program, args.process))})


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsogames", description="Games on programs under TSO store buffers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="decide the game of a program file")
    p.add_argument("file")
    p.add_argument("--objective", choices=["reach", "safe"])
    p.add_argument("--targets", help="comma-separated P.q list")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("view-arena", help="export the view arena of one process")
    p.add_argument("file")
    p.add_argument("--process", required=True)
    p.add_argument("--format", choices=["dot", "json"], default="json")
    p.set_defaults(func=cmd_view_arena)

    p = sub.add_parser("from-qbf", help="compile a QBF formula into a program")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--mode", choices=["reach", "safe"], default="reach")
    p.set_defaults(func=cmd_from_qbf)

    p = sub.add_parser("eval-qbf", help="evaluate a QBF formula by brute force")
    p.add_argument("formula", help="a file, '-' for stdin, or the formula text")
    p.set_defaults(func=cmd_eval_qbf)

    p = sub.add_parser("from-pcs", help="compile a channel system into a fairness game")
    p.add_argument("file")
    p.add_argument("--fairness", choices=["update", "process"], required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_from_pcs)

    p = sub.add_parser("pcs-script", help="honest play script for a channel-system run")
    p.add_argument("file")
    p.add_argument("--run", required=True, help="comma-separated transition ids e0,e1,...")
    p.add_argument("--fairness", choices=["update", "process"], required=True)
    p.set_defaults(func=cmd_pcs_script)

    p = sub.add_parser("simulate", help="replay a play script")
    p.add_argument("file")
    p.add_argument("--script", required=True)
    p.add_argument("--check-update-fair", action="store_true")
    p.add_argument("--horizon", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("explore", help="bounded exploration of concrete configurations")
    p.add_argument("file")
    p.add_argument("--buffer-bound", type=int, required=True)
    p.add_argument("--semantics", choices=["sb", "lb"], default="sb")
    p.add_argument("--max-states", type=int, default=100_000)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("lb-demo", help="store-buffer vs load-buffer divergence checks")
    p.add_argument("--horizon", type=int, default=6)
    p.add_argument("--propagation-bound", type=int, default=4)
    p.set_defaults(func=cmd_lb_demo)

    p = sub.add_parser("state-bound", help="view count of one process")
    p.add_argument("file")
    p.add_argument("--process", required=True)
    p.set_defaults(func=cmd_state_bound)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (_ReadError, ParseError, QbfError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CapExceededError, OverflowError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ProgramError, ValueError, LookupError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())
