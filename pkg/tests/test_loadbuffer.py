import pytest

from tsogames.loadbuffer import (
    CORRECT_ORDER,
    WRONG_ORDER,
    LbConfiguration,
    LbMessage,
    LbMove,
    figure8_program,
    lb_apply,
    lb_config_from_json,
    lb_config_to_json,
    lb_enabled_moves,
    lb_escape_check,
    lb_explore,
    lb_initial,
    sb_forcing_check,
    sb_pivot,
)
from tsogames.program import SKIP, Process, Program, ProgramError, Transition, rd, wr
from tsogames.tso import apply_update, enabled_moves

PROGRAM, OBJECTIVE = figure8_program()


def _reader():
    ts = [Transition("a", rd("x", 1), "b"), Transition("a", rd("x", 2), "c"),
          Transition("a", wr("x", 2), "d"), Transition("a", SKIP, "e")]
    return Program.create(("0", "1", "2"), ["x"], {"x": "0"}, [Process("P", "a", ts)])


def _instrs(program, c):
    return {str(m.transition.instr) for m in lb_enabled_moves(program, c) if m.kind == "instr"}


def test_propagate_appends_current_memory():
    c = LbConfiguration(("q1", "q1", "q1"), ((), (), ()), ("2",))
    c2 = lb_apply(PROGRAM, c, LbMove("propagate", "Proc3", var="x", value="2"))
    assert c2.buffers[2] == (LbMessage("x", "2"),)
    with pytest.raises(ProgramError):
        lb_apply(PROGRAM, c, LbMove("propagate", "Proc3", var="x", value="1"))


def test_read_from_head():
    prog = _reader()
    c = LbConfiguration(("a",), ((LbMessage("x", "2"), LbMessage("x", "1")),), ("0",))
    got = _instrs(prog, c)
    assert "rd(x,1)" in got and "rd(x,2)" not in got


def test_read_prefers_newest_own_message():
    prog = _reader()
    c = LbConfiguration(("a",), ((LbMessage("x", "1", True), LbMessage("x", "2")),), ("0",))
    got = _instrs(prog, c)
    assert "rd(x,1)" in got and "rd(x,2)" not in got


def test_empty_buffer_blocks_reads():
    assert _instrs(_reader(), lb_initial(_reader())) == {"wr(x,2)", "skip"}


def test_write_delete_skip():
    prog = _reader()
    c = lb_apply(prog, lb_initial(prog), LbMove("instr", "P", Transition("a", wr("x", 2), "d")))
    assert c.memory == ("2",) and c.buffers[0] == (LbMessage("x", "2", True),)
    c = LbConfiguration(("a",), ((LbMessage("x", "2"), LbMessage("x", "1")),), ("0",))
    assert lb_apply(prog, c, LbMove("delete", "P")).buffers[0] == (LbMessage("x", "2"),)
    after = lb_apply(prog, c, LbMove("instr", "P", Transition("a", SKIP, "e")))
    assert after.buffers == c.buffers and after.memory == c.memory and after.states == ("e",)


def test_figure8_shape():
    assert len(PROGRAM.processes) == 3
    assert PROGRAM.variables == ("x",)
    assert OBJECTIVE.mode == "safe" and OBJECTIVE.targets == {("Proc3", "qF")}


def test_sb_pivot_first_flush():
    c = apply_update(PROGRAM, sb_pivot(PROGRAM, "q2"), "Proc1")
    p3 = [str(t.instr) for name, t in enabled_moves(PROGRAM, c) if name == "Proc3"]
    assert p3 == ["rd(x,1)"]


def test_lb_memory_after_both_writes():
    c = lb_initial(PROGRAM)
    for name in ("Proc1", "Proc2"):
        (move,) = [m for m in lb_enabled_moves(PROGRAM, c) if m.kind == "instr" and m.process == name]
        c = lb_apply(PROGRAM, c, move)
    assert c.memory == ("2",)


def test_sb_forcing():
    assert sb_forcing_check(horizon=6)
    assert sb_forcing_check(horizon=6, strategy={"q2": CORRECT_ORDER["q2"]})
    assert sb_forcing_check(horizon=6, strategy={"q3": CORRECT_ORDER["q3"]})


def test_sb_wrong_order_is_not_forcing():
    verdict = sb_forcing_check(horizon=6, strategy=WRONG_ORDER)
    assert not verdict
    assert "fair continuation avoids qF" in verdict.message
    assert verdict.witness


def test_sb_short_horizon_is_inconclusive():
    verdict = sb_forcing_check(horizon=3)
    assert not verdict and "not closed" in verdict.message


def test_lb_escape():
    verdict = lb_escape_check(propagation_bound=4)
    assert verdict, verdict.message


def test_lb_escape_stale_fault():
    verdict = lb_escape_check(propagation_bound=4, stale_values=("1",))
    assert not verdict
    assert verdict.witness


def test_lb_explore_bound():
    order, steps, frontier = lb_explore(PROGRAM, lb_initial(PROGRAM), 1)
    assert order[0] == lb_initial(PROGRAM)
    assert all(len(b) <= 1 for c in order for b in c.buffers)
    assert frontier
    assert len(set(order)) == len(order)


def test_lb_json_round_trip():
    order, _, _ = lb_explore(PROGRAM, lb_initial(PROGRAM), 1)
    for c in order[:200]:
        assert lb_config_from_json(PROGRAM, lb_config_to_json(PROGRAM, c)) == c
