import json
import random

import pytest

from tsogames import corpus
from tsogames.program import SKIP, Objective, Process, Program, ProgramError, Transition, parse_program, wr
from tsogames.solver import (
    FlushAll,
    IllegalMoveError,
    NeverUpdate,
    ProcessMove,
    RandomUpdate,
    ScriptedProcess,
    ScriptedUpdate,
    StrategyDomainError,
    UpdateMove,
    check_update_fair_prefix,
    decide,
    lift_strategy,
    play_script_from_json,
    play_script_to_json,
    process_fairness_report,
    script_strategies,
    simulate_play,
    validate_witness,
)
from tsogames.tso import Configuration, Message, initial_configuration

# verdicts of the named corpus; each projection is cross-checked against minimax in test_views
EXPECTED = {
    "ex1_idle": ("process", "P1"),
    "ex2_twice": ("update", None),
    "sb_litmus": ("process", "P1"),
    "sb_fenced": ("update", None),
    "safe_loop": ("process", "P1"),
    "safe_trapped": ("update", None),
    "safe_empty": ("process", "P2"),
    "third_wins": ("process", "P3"),
}


@pytest.mark.parametrize("name", list(EXPECTED))
def test_named_verdicts(name):
    d = decide(*corpus.example(name))
    assert (d.winner, d.witness) == EXPECTED[name]


def test_decide_is_any_projection():
    for _, program, objective in corpus.concurrent_corpus():
        d = decide(program, objective)
        winners = [d.projections[p].winner for p in program.process_names]
        assert (d.winner == "process") == ("process" in winners)
        if d.witness:
            assert d.witness == program.process_names[winners.index("process")]


def _permuted(program, order):
    return Program(program.values, program.variables, program.init, tuple(program.processes[k] for k in order))


def test_reordering_preserves_winner():
    rng = random.Random(8)
    for _, program, objective in corpus.concurrent_corpus():
        order = list(range(len(program.processes)))
        rng.shuffle(order)
        assert decide(_permuted(program, order), objective).winner == decide(program, objective).winner


def test_adding_an_idle_process_is_local():
    idle = Process("Idle", "z", [Transition("z", SKIP, "z")])
    for _, program, objective in corpus.concurrent_corpus():
        wider = Program(program.values, program.variables, program.init, program.processes + (idle,))
        d, d2 = decide(program, objective), decide(wider, objective)
        if objective.mode == "reach":
            assert d2.winner == d.winner
        assert d2.projections["Idle"].winner == ("update" if objective.mode == "reach" else "process")


def test_safe_empty_targets_with_skip_loop():
    program, _ = parse_program("values 0\nvars\ninit\nprocess P init a\n  a a skip\n")
    assert decide(program, Objective("safe", frozenset())).winner == "process"


def test_decide_rejects_bad_starts():
    program, objective = corpus.example("ex1_idle")
    with pytest.raises(ProgramError, match="C_W"):
        decide(program, Objective("reach", frozenset({("P1", "q0")})))
    c = Configuration(("q0", "r0"), ((Message("x", "1"),), ()), ("0",))
    with pytest.raises(ProgramError, match="empty buffers"):
        decide(program, objective, c)


def test_decide_reports_deadlock_warning():
    program, objective = parse_program(
        "values 0 1\nvars x\ninit x=0\nprocess P init a\n  a q skip\n  q a rd(x,1)\nobjective reach P.q\n")
    d = decide(program, objective)
    assert [w.message for w in d.warnings] == ["target may deadlock: P.q has no outgoing skip or write"]


def _ex1_play(update, horizon=10):
    program, objective = corpus.example("ex1_idle")
    d = decide(program, objective)
    strategy = lift_strategy(program, d.witness, d.witness_result)
    return simulate_play(program, objective, initial_configuration(program), strategy, update, horizon)


def test_lifted_ex1_against_never_update():
    play, outcome = _ex1_play(NeverUpdate())
    assert outcome.target_visited
    assert outcome.ply == 4
    process_moves = [m for m in play.moves if isinstance(m, ProcessMove)]
    assert len(process_moves) == 2
    assert {m.process for m in process_moves} == {"P1"}
    assert play.turns == ["process", "update", "process", "update"]


def test_lifted_ex1_against_flush_all():
    play, outcome = _ex1_play(FlushAll())
    assert outcome.target_visited
    assert play.configs[2].memory == ("1",)


@pytest.mark.parametrize("seed", range(30))
def test_lifted_strategy_only_moves_the_witness(seed):
    for _, program, objective in corpus.concurrent_corpus():
        d = decide(program, objective)
        if not d.witness:
            continue
        strategy = lift_strategy(program, d.witness, d.witness_result)
        play, _ = simulate_play(program, objective, initial_configuration(program), strategy,
                                RandomUpdate(seed), 40)
        assert all(m.process == d.witness for m in play.moves if isinstance(m, ProcessMove))
        assert all(a != b for a, b in zip(play.turns, play.turns[1:]))


def test_lift_requires_winning_projection():
    program, objective = corpus.example("ex2_twice")
    d = decide(program, objective)
    with pytest.raises(ValueError):
        lift_strategy(program, "P1", d.projections["P1"])


def test_strategy_domain_error():
    program, objective = corpus.example("ex1_idle")
    d = decide(program, objective)
    strategy = lift_strategy(program, "P1", d.witness_result)
    with pytest.raises(StrategyDomainError):
        strategy(program, Configuration(("q2", "r0"), ((), ()), ("0",)))


def test_illegal_flush_reports_ply():
    program, objective = corpus.example("ex1_idle")
    proc = ScriptedProcess([("P2", Transition("r0", SKIP, "r0"))])
    with pytest.raises(IllegalMoveError) as info:
        simulate_play(program, objective, initial_configuration(program), proc, ScriptedUpdate([["P1"]]))
    assert info.value.ply == 2


def test_illegal_instruction_reports_ply():
    program, objective = corpus.example("ex1_idle")
    proc = ScriptedProcess([("P1", Transition("q1", SKIP, "q1"))])
    with pytest.raises(IllegalMoveError) as info:
        simulate_play(program, objective, initial_configuration(program), proc, NeverUpdate())
    assert info.value.ply == 1


def _deadlock_program():
    return parse_program("values 0 1\nvars x\ninit x=0\nprocess P init a\n  a b wr(x,1)\n  b c mf\n")[0]


def test_update_fair_prefix():
    program = _deadlock_program()
    proc = ScriptedProcess([("P", Transition("a", wr("x", 1), "b"))])
    play, outcome = simulate_play(program, None, initial_configuration(program), proc, NeverUpdate(), 5)
    assert outcome.status == "a-deadlock" and outcome.buffers_empty is False
    verdict = check_update_fair_prefix(play)
    assert not verdict and verdict.witness == [2]

    program2 = parse_program("values 0 1\nvars x\ninit x=0\nprocess P init a\n  a b wr(x,1)\n")[0]
    play, outcome = simulate_play(program2, None, initial_configuration(program2), ScriptedProcess(
        [("P", Transition("a", wr("x", 1), "b"))]), FlushAll(), 5)
    assert outcome.status == "a-deadlock" and outcome.buffers_empty
    assert check_update_fair_prefix(play)

    play, _ = _ex1_play(NeverUpdate())
    assert check_update_fair_prefix(play)


def _always_enabled(n):
    procs = [Process(f"P{k}", "a", [Transition("a", SKIP, "a")]) for k in range(1, n + 1)]
    return Program.create(("0",), [], {}, procs)


def _scheduled(program, names, plies):
    moves = [(names[k % len(names)], Transition("a", SKIP, "a")) for k in range(plies)]
    play, _ = simulate_play(program, None, initial_configuration(program), ScriptedProcess(moves),
                            NeverUpdate(), 2 * plies)
    return play


def test_fairness_round_robin():
    program = _always_enabled(3)
    report = process_fairness_report(_scheduled(program, ["P1", "P2", "P3"], 30), 6)
    assert not any(s.starved for s in report.values())


def test_fairness_starved_process_flagged():
    program = _always_enabled(2)
    report = process_fairness_report(_scheduled(program, ["P1"], 25), 10)
    assert report["P2"].starved and not report["P1"].starved
    assert sum(report["P1"].moved) == 25


def test_fairness_disabled_process_never_flagged():
    procs = [Process("P1", "a", [Transition("a", SKIP, "a")]), Process("P2", "a", [Transition("b", SKIP, "b")])]
    program = Program.create(("0",), [], {}, procs)
    report = process_fairness_report(_scheduled(program, ["P1"], 25), 10)
    assert not report["P2"].starved
    assert report["P2"].enabled == [0] * len(report["P2"].enabled)


def test_play_script_json_round_trip():
    program, _ = corpus.example("ex1_idle")
    moves = [ProcessMove("P1", Transition("q0", wr("x", 1), "q1")), UpdateMove(("P1",)),
             ProcessMove("P2", Transition("r0", SKIP, "r0")), UpdateMove(())]
    text = play_script_to_json(moves)
    assert json.loads(text)[0] == {"turn": "process", "proc": "P1", "from": "q0", "instr": "wr(x,1)", "to": "q1"}
    assert play_script_from_json(program, text) == moves
    proc, upd = script_strategies(moves)
    play, outcome = simulate_play(program, None, initial_configuration(program), proc, upd)
    assert outcome.status == "script-end" and len(play.moves) == 4


@pytest.mark.parametrize("bad", [
    '{"turn": "process"}',
    '[{"turn": "process", "proc": "P1", "from": "q0", "instr": "rd(x,1)", "to": "q1"}]',
    '[{"turn": "update", "flushes": ["P7"]}]',
    '[{"turn": "nobody"}]',
    '[{"turn": "process"}]',
])
def test_play_script_errors(bad):
    program, _ = corpus.example("ex1_idle")
    with pytest.raises(ProgramError):
        play_script_from_json(program, bad)


def test_script_must_alternate():
    with pytest.raises(ProgramError):
        script_strategies([UpdateMove(())])


@pytest.mark.parametrize("name", ["ex1_idle", "sb_litmus", "safe_loop", "safe_empty", "third_wins"])
def test_validate_witness(name):
    program, objective = corpus.example(name)
    d = decide(program, objective)
    for seed in range(20):
        assert validate_witness(program, objective, d, seed)


def test_random_update_is_seeded():
    program, objective = corpus.example("sb_litmus")
    c = Configuration(("b", "b"), ((Message("x", "1"),), (Message("y", "1"),)), ("0", "0"))
    u1, u2 = RandomUpdate(5), RandomUpdate(5)
    a = [u1(program, c, k) for k in range(20)]
    assert a == [u2(program, c, k) for k in range(20)]
    assert len({tuple(x) for x in a}) > 1
    assert all(len(x) <= 2 for x in a)
