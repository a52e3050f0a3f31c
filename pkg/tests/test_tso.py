import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsogames import corpus
from tsogames.program import MF, SKIP, Process, Program, Transition, rd, wr
from tsogames.tso import (
    CapExceededError,
    Configuration,
    DisabledMoveError,
    EmptyBufferError,
    Message,
    apply_instruction,
    apply_update,
    bounded_explore,
    config_from_json,
    config_to_json,
    enabled_moves,
    initial_configuration,
    is_enabled,
    update_closure,
)

M = Message


def _single(*transitions, values=("0", "1", "2")):
    return Program.create(values, ["x"], {"x": "0"}, [Process("P", "q", transitions)])


def _two():
    procs = [Process(n, "q", [Transition("q", SKIP, "q")]) for n in ("P1", "P2")]
    return Program.create(["0", "1", "2"], ["x"], {"x": "0"}, procs)


def test_read_own_write_uses_newest_message():
    prog = _single(Transition("q", rd("x", 2), "r"), Transition("q", rd("x", 1), "r"))
    c = Configuration(("q",), ((M("x", "2"), M("x", "1")),), ("0",))
    assert is_enabled(prog, c, 0, Transition("q", rd("x", 2), "r"))
    assert not is_enabled(prog, c, 0, Transition("q", rd("x", 1), "r"))


def test_read_from_memory_and_fence():
    prog = _single(Transition("q", rd("x", 0), "r"), Transition("q", MF, "r"))
    empty = initial_configuration(prog)
    assert is_enabled(prog, empty, 0, Transition("q", rd("x", 0), "r"))
    assert is_enabled(prog, empty, 0, Transition("q", MF, "r"))
    busy = Configuration(("q",), ((M("x", "0"),),), ("0",))
    assert not is_enabled(prog, busy, 0, Transition("q", MF, "r"))


def test_write_then_read_own_write():
    w = Transition("q", wr("x", 1), "r")
    r = Transition("r", rd("x", 1), "s")
    prog = _single(w, r, Transition("s", SKIP, "q"))
    c1 = apply_instruction(prog, initial_configuration(prog), "P", w)
    assert c1 == Configuration(("r",), ((M("x", "1"),),), ("0",))
    c2 = apply_instruction(prog, c1, "P", r)
    assert c2.buffers == c1.buffers and c2.memory == c1.memory and c2.states == ("s",)
    c3 = apply_instruction(prog, c2, "P", Transition("s", SKIP, "q"))
    assert c3.states == ("q",) and c3.buffers == c2.buffers


def test_disabled_move_raises():
    prog = _single(Transition("q", rd("x", 1), "r"))
    with pytest.raises(DisabledMoveError):
        apply_instruction(prog, initial_configuration(prog), "P", Transition("q", rd("x", 1), "r"))


def test_update_flushes_oldest():
    prog = _single(Transition("q", SKIP, "q"))
    c = Configuration(("q",), ((M("x", "1"),),), ("0",))
    assert apply_update(prog, c, "P") == Configuration(("q",), ((),), ("1",))
    c = Configuration(("q",), ((M("x", "2"), M("x", "1")),), ("0",))
    assert apply_update(prog, c, "P") == Configuration(("q",), ((M("x", "2"),),), ("1",))
    with pytest.raises(EmptyBufferError):
        apply_update(prog, initial_configuration(prog), "P")


def _closure_oracle(program, c):
    """Enumerate every interleaving of every per-process flush count."""
    out = set()
    names = program.process_names
    counts = [range(len(b) + 1) for b in c.buffers]
    for ks in itertools.product(*counts):
        seq = [n for n, k in zip(names, ks) for _ in range(k)]
        for order in set(itertools.permutations(seq)):
            d = c
            for n in order:
                d = apply_update(program, d, n)
            out.add(d)
    return out


def test_closure_of_empty_buffers():
    prog = _two()
    c = initial_configuration(prog)
    assert update_closure(prog, c) == {c}


def test_closure_two_single_messages():
    prog = _two()
    c = Configuration(("q", "q"), ((M("x", "1"),), (M("x", "2"),)), ("0",))
    got = update_closure(prog, c)
    assert got == _closure_oracle(prog, c)
    assert len(got) == 5
    assert {d.memory for d in got if not any(d.buffers)} == {("1",), ("2",)}


def test_closure_length_three():
    prog = _single(Transition("q", SKIP, "q"))
    c = Configuration(("q",), ((M("x", "2"), M("x", "1"), M("x", "0")),), ("0",))
    assert len(update_closure(prog, c)) == 4


def test_closure_cap():
    prog = _two()
    buf = tuple(M("x", str(k % 3)) for k in range(6))
    with pytest.raises(CapExceededError):
        update_closure(prog, Configuration(("q", "q"), (buf, buf), ("0",)), cap=10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from("012"), max_size=3), st.lists(st.sampled_from("012"), max_size=3))
def test_closure_matches_interleaving_oracle(b1, b2):
    prog = _two()
    c = Configuration(("q", "q"), (tuple(M("x", v) for v in b1), tuple(M("x", v) for v in b2)), ("0",))
    assert update_closure(prog, c) == _closure_oracle(prog, c)


def _dfs_oracle(program, c0, bound):
    """Independent depth-first enumeration of instruction and single-flush steps."""
    seen, stack = set(), [c0]
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        for i, p in enumerate(program.processes):
            for t in p.transitions:
                if t.source != c.states[i] or not is_enabled(program, c, i, t):
                    continue
                if t.instr.kind == "wr" and len(c.buffers[i]) >= bound:
                    continue
                stack.append(apply_instruction(program, c, p.name, t))
            if c.buffers[i]:
                stack.append(apply_update(program, c, p.name))
    return seen


def test_explore_ex1_bound_one():
    program, _ = corpus.example("EX1")
    ex = bounded_explore(program, initial_configuration(program), 1)
    assert len(ex.configurations) == 5
    assert set(ex.configurations) == _dfs_oracle(program, initial_configuration(program), 1)
    labels = {(s.source, s.label, s.target) for s in ex.steps}
    assert any(a == b and lab == "skip_P" for a, lab, b in labels)


def test_explore_bound_zero_only_frontier():
    program, _ = corpus.example("EX1")
    c0 = initial_configuration(program)
    ex = bounded_explore(program, c0, 0)
    assert ex.configurations == [c0]
    assert ex.frontier == {c0}


@pytest.mark.parametrize("name", list(corpus.CONCURRENT))
def test_explore_matches_oracle(name):
    program, _ = corpus.example(name)
    c0 = initial_configuration(program)
    ex = bounded_explore(program, c0, 2)
    assert set(ex.configurations) == _dfs_oracle(program, c0, 2)
    for c in ex.configurations:
        assert all(len(b) <= 2 for b in c.buffers)
        assert all(q in p.states for p, q in zip(program.processes, c.states))
        assert all(v in program.values for v in c.memory)


def test_explore_cap():
    program, _ = corpus.example("sb_litmus")
    with pytest.raises(CapExceededError):
        bounded_explore(program, initial_configuration(program), 3, max_states=3)


def test_config_json_round_trip():
    rng = random.Random(3)
    for _, program, _ in corpus.random_concurrent_programs():
        for _ in range(5):
            c = initial_configuration(program)
            for _ in range(6):
                moves = enabled_moves(program, c)
                if not moves:
                    break
                c = apply_instruction(program, c, *rng.choice(moves))
            assert config_from_json(program, config_to_json(program, c)) == c
