"""Load-buffer semantics and the three-process divergence example.

Under load buffers a write updates memory at once and leaves an *own*
message in the writer's buffer.  Reads are served from the buffer: the
newest own message on the variable when there is one, otherwise the head.
The update side speculatively *propagates* the current memory value of a
variable to the tail of a buffer, or *deletes* the head message.

Buffers are stored tail-first like the store buffers of :mod:`tsogames.tso`:
index 0 is the newest message and the head is the last element.

:func:`figure8_program` builds a program on which the two semantics
disagree.  Under store buffers a reactive update strategy drives ``Proc3``
into ``qF`` on every process-fair continuation (:func:`sb_forcing_check`).
Under load buffers the process player keeps ``Proc3`` out of ``qF``
(:func:`lb_escape_check`).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import networkx as nx

from .arena import Verdict
from .program import SKIP, Objective, Process, Program, ProgramError, Transition, rd, wr
from .tso import CapExceededError, Configuration, Message, apply_instruction, apply_update, enabled_moves

__all__ = [
    "LbMessage",
    "LbConfiguration",
    "LbMove",
    "lb_initial",
    "lb_enabled_moves",
    "lb_apply",
    "lb_explore",
    "figure8_program",
    "sb_pivot",
    "sb_forcing_check",
    "lb_escape_check",
    "lb_config_to_json",
    "lb_config_from_json",
    "CORRECT_ORDER",
    "WRONG_ORDER",
]


class LbMessage(NamedTuple):
    var: str
    value: str
    own: bool = False


class LbConfiguration(NamedTuple):
    states: tuple[str, ...]
    buffers: tuple[tuple[LbMessage, ...], ...]  # newest first; head is the last element
    memory: tuple[str, ...]


class LbMove(NamedTuple):
    kind: str  # "instr" | "propagate" | "delete"
    process: str
    transition: Transition | None = None
    var: str | None = None
    value: str | None = None  # propagated value

    def __str__(self):
        if self.kind == "instr":
            return f"{self.process}:{self.transition.instr}"
        if self.kind == "propagate":
            return f"prop_{self.process}({self.var},{self.value})"
        return f"del_{self.process}"


def lb_initial(program: Program) -> LbConfiguration:
    return LbConfiguration(tuple(p.initial for p in program.processes),
                           tuple(() for _ in program.processes), program.init)


def _lb_readable(buf: tuple[LbMessage, ...], var: str, value: str) -> bool:
    for m in buf:  # newest first
        if m.own and m.var == var:
            return m.value == value
    return bool(buf) and buf[-1].var == var and buf[-1].value == value


def _instr_enabled(program: Program, c: LbConfiguration, i: int, t: Transition) -> bool:
    kind = t.instr.kind
    if kind == "rd":
        return _lb_readable(c.buffers[i], t.instr.var, t.instr.value)
    if kind == "mf":
        return not c.buffers[i]
    return True


def lb_enabled_moves(program: Program, c: LbConfiguration, stale_values: Sequence[str] = ()) -> list[LbMove]:
    """Instruction moves, then per process one propagation per variable and a delete.

    ``stale_values`` is a fault-injection hook: those values may be
    propagated for every variable regardless of memory.
    """
    out = []
    for i, p in enumerate(program.processes):
        for t in p.outgoing(c.states[i]):
            if _instr_enabled(program, c, i, t):
                out.append(LbMove("instr", p.name, t))
    for i, p in enumerate(program.processes):
        for x, v in zip(program.variables, c.memory):
            for d in dict.fromkeys([v, *stale_values]):
                out.append(LbMove("propagate", p.name, var=x, value=d))
        if c.buffers[i]:
            out.append(LbMove("delete", p.name))
    return out


def lb_apply(program: Program, c: LbConfiguration, move: LbMove, stale_values: Sequence[str] = ()) -> LbConfiguration:
    i = program.process_index(move.process)
    if move not in lb_enabled_moves(program, c, stale_values):
        raise ProgramError(f"move {move} is not enabled")
    states, buffers, memory = list(c.states), list(c.buffers), list(c.memory)
    if move.kind == "instr":
        t = move.transition
        states[i] = t.target
        if t.instr.kind == "wr":
            memory[program.var_index(t.instr.var)] = t.instr.value
            buffers[i] = (LbMessage(t.instr.var, t.instr.value, True),) + buffers[i]
    elif move.kind == "propagate":
        buffers[i] = (LbMessage(move.var, move.value),) + buffers[i]
    else:
        buffers[i] = buffers[i][:-1]
    return LbConfiguration(tuple(states), tuple(buffers), tuple(memory))


def lb_explore(program: Program, c0: LbConfiguration, buffer_bound: int, max_states: int = 100_000):
    """All LB configurations reachable from ``c0`` with every buffer of length at most ``buffer_bound``.

    Returns ``(configurations, steps, frontier)`` where frontier configurations
    had a buffer-growing move cut off by the bound.
    """
    seen = {c0}
    order = [c0]
    steps = []
    frontier = set()
    queue = deque([c0])
    while queue:
        c = queue.popleft()
        for mv in lb_enabled_moves(program, c):
            i = program.process_index(mv.process)
            grows = mv.kind == "propagate" or (mv.kind == "instr" and mv.transition.instr.kind == "wr")
            if grows and len(c.buffers[i]) >= buffer_bound:
                frontier.add(c)
                continue
            d = lb_apply(program, c, mv)
            steps.append((c, mv, d))
            if d not in seen:
                seen.add(d)
                if len(seen) > max_states:
                    raise CapExceededError(f"exploration exceeds {max_states} configurations")
                order.append(d)
                queue.append(d)
    return order, steps, frontier


# ---------------------------------------------------------------- the example

P1, P2, P3 = "Proc1", "Proc2", "Proc3"


def figure8_program() -> tuple[Program, Objective]:
    """Three processes over one variable ``x``; ``Proc3.qF`` is the unsafe state.

    ``Proc1`` and ``Proc2`` each write once and then idle on a skip loop.
    ``Proc3`` commits to one of two read orders: ``1`` then ``2`` via ``q2``,
    or ``2`` then ``1`` via ``q3``.
    """
    proc1 = Process(P1, "q1", (Transition("q1", wr("x", 1), "q2"), Transition("q2", SKIP, "q2")))
    proc2 = Process(P2, "q1", (Transition("q1", wr("x", 2), "q2"), Transition("q2", SKIP, "q2")))
    proc3 = Process(P3, "q1", (
        Transition("q1", SKIP, "q2"),
        Transition("q1", SKIP, "q3"),
        Transition("q2", rd("x", 1), "q4"),
        Transition("q4", rd("x", 2), "qF"),
        Transition("q3", rd("x", 2), "q5"),
        Transition("q5", rd("x", 1), "qF"),
    ))
    program = Program.create(("0", "1", "2"), ["x"], {"x": "0"}, [proc1, proc2, proc3])
    return program, Objective("safe", frozenset({(P3, "qF")}))


# A reactive update strategy is a list of (process to flush, guard on Proc3's state).
# Each B-turn performs the next step if its guard holds and flushes nothing otherwise.
CORRECT_ORDER = {"q2": ((P1, None), (P2, "q4")), "q3": ((P2, None), (P1, "q5"))}
WRONG_ORDER = {"q2": ((P2, None), (P1, None)), "q3": ((P1, None), (P2, None))}


def sb_pivot(program: Program, proc3_state: str) -> Configuration:
    """Both writes pending in the store buffers, memory untouched, Proc3 at ``proc3_state``."""
    return Configuration(("q2", "q2", proc3_state),
                         ((Message("x", "1"),), (Message("x", "2"),), ()),
                         program.init)


def _fair_cycle(graph: nx.DiGraph, a_info: dict) -> list | None:
    """A strongly fair cycle of ``graph``, as a vertex list, or None.

    ``a_info[v]`` is the set of processes enabled at A-vertex ``v``; edge
    attribute ``procs`` holds the processes whose move realises the edge.
    """
    work = [set(graph.nodes)]
    while work:
        nodes = work.pop()
        sub = graph.subgraph(nodes)
        for comp in nx.strongly_connected_components(sub):
            scc = sub.subgraph(comp)
            if scc.number_of_edges() == 0:
                continue
            enabled = set().union(*(a_info.get(v, set()) for v in comp))
            moved = set().union(*(d["procs"] for _, _, d in scc.edges(data=True)))
            starved = enabled - moved
            if not starved:
                return nx.find_cycle(scc)
            keep = {v for v in comp if not (a_info.get(v, set()) & starved)}
            if keep:
                work.append(keep)
    return None


def sb_forcing_check(horizon: int = 6, strategy: dict | None = None, program: Program | None = None) -> Verdict:
    """Does the scripted update strategy force ``qF`` under store buffers?

    From each pivot (both writes pending, ``Proc3`` at ``q2`` or ``q3``, the
    update player to move), every process-player behaviour is explored
    against the reactive update strategy.  Reaching ``qF`` or deadlocking
    the process player ends a continuation.  The strategy forces ``qF`` when
    the remaining graph is explored within ``horizon`` plies and has no
    process-fair cycle, so every fair continuation ends in finitely many
    plies.  An unfair loop, such as idling forever in ``Proc1`` while
    ``Proc3`` could read, does not count as an escape.
    """
    if program is None:
        program = figure8_program()[0]
    strategy = CORRECT_ORDER if strategy is None else strategy
    i3 = program.process_index(P3)
    for pivot_state, script in sorted(strategy.items()):
        start = (sb_pivot(program, pivot_state), "B", 0)
        depth = {start: 0}
        graph = nx.DiGraph()
        graph.add_node(start)
        a_info = {}
        queue = deque([start])
        truncated = None
        while queue:
            v = queue.popleft()
            c, turn, pos = v
            if c.states[i3] == "qF":
                graph.remove_node(v)
                continue
            if turn == "A":
                moves = enabled_moves(program, c)
                if not moves:
                    graph.remove_node(v)
                    continue
                a_info[v] = {name for name, _ in moves}
                succ = [((apply_instruction(program, c, name, t), "B", pos), name, t) for name, t in moves]
            else:
                nxt, npos = c, pos
                if pos < len(script):
                    proc, guard = script[pos]
                    if guard is None or c.states[i3] == guard:
                        nxt, npos = apply_update(program, c, proc), pos + 1
                succ = [((nxt, "A", npos), None, None)]
            for w, name, t in succ:
                if w not in depth:
                    if depth[v] == horizon:
                        truncated = v
                        continue
                    depth[w] = depth[v] + 1
                    queue.append(w)
                if not graph.has_edge(v, w):
                    graph.add_edge(v, w, procs=set(), label=str(t.instr) if t else "up")
                if name:
                    graph.edges[v, w]["procs"].add(name)
        graph.remove_nodes_from([w for w in list(graph.nodes) if w not in depth or _dead(program, w, i3)])
        if truncated is not None:
            return Verdict(False, f"pivot {pivot_state}: exploration not closed within {horizon} plies",
                           [_fmt(truncated)])
        cycle = _fair_cycle(graph, a_info)
        if cycle is not None:
            return Verdict(False, f"pivot {pivot_state}: fair continuation avoids qF",
                           [f"{_fmt(u)} --{graph.edges[u, w]['label']}--> {_fmt(w)}" for u, w in cycle])
    return Verdict(True, "every fair continuation reaches qF")


def _dead(program, v, i3) -> bool:
    c, turn, _ = v
    return c.states[i3] == "qF" or (turn == "A" and not enabled_moves(program, c))


def _fmt(v) -> str:
    c, turn, pos = v
    bufs = ",".join("".join(f"<{m.var},{m.value}>" for m in b) or "-" for b in c.buffers)
    return f"{'/'.join(c.states)} [{bufs}] x={c.memory[0]} {turn}#{pos}"


def lb_escape_check(propagation_bound: int = 4, stale_values: Sequence[str] = (),
                    program: Program | None = None) -> Verdict:
    """Does the process player keep ``Proc3`` out of ``qF`` under load buffers?

    The process side plays ``Proc1``'s write, ``Proc2``'s write and
    ``Proc3``'s move to ``q3`` in that order.  Afterwards it reads with
    ``Proc3`` whenever it can and otherwise idles in ``Proc1`` or ``Proc2``.
    Propagations and deletes are interleaved arbitrarily, with every buffer
    capped at ``propagation_bound`` messages.  The check asserts three
    things.  Whenever ``Proc3`` reads ``2`` at ``q3``, its buffer holds no
    ``<x,1>``.  At ``q5``, ``rd(x,1)`` is disabled while some instruction
    stays enabled.  ``qF`` is never reached.
    """
    if propagation_bound < 1:
        raise ValueError("propagation_bound must be at least 1")
    if program is None:
        program = figure8_program()[0]
    i3 = program.process_index(P3)
    prefix = [(P1, Transition("q1", wr("x", 1), "q2")), (P2, Transition("q1", wr("x", 2), "q2")),
              (P3, Transition("q1", SKIP, "q3"))]

    def process_moves(c, pos):
        if pos < len(prefix):
            name, t = prefix[pos]
            return [LbMove("instr", name, t)]
        mine = [m for m in lb_enabled_moves(program, c, stale_values) if m.kind == "instr"]
        reads = [m for m in mine if m.process == P3]
        return reads or [m for m in mine if m.transition.instr == SKIP]

    start = (lb_initial(program), 0)
    seen = {start}
    queue = deque([start])
    while queue:
        c, pos = queue.popleft()
        if c.states[i3] == "qF":
            return Verdict(False, "Proc3 reached qF", [lb_config_to_json(program, c)])
        if c.states[i3] == "q5":
            can = lb_enabled_moves(program, c, stale_values)
            if any(m.kind == "instr" and m.process == P3 and m.transition.instr == rd("x", 1) for m in can):
                return Verdict(False, "rd(x,1) enabled at q5", [lb_config_to_json(program, c)])
            if not any(m.kind == "instr" for m in can):
                return Verdict(False, "process player deadlocked at q5", [lb_config_to_json(program, c)])
        succ = []
        for m in lb_enabled_moves(program, c, stale_values):
            if m.kind == "instr":
                continue
            if m.kind == "propagate" and len(c.buffers[program.process_index(m.process)]) >= propagation_bound:
                continue
            succ.append((m, pos))
        for m in process_moves(c, pos):
            if m.transition.source != c.states[program.process_index(m.process)]:
                continue
            if m not in lb_enabled_moves(program, c, stale_values):
                continue
            if m.process == P3 and m.transition.source == "q3" and any(
                    not x.own and x.var == "x" and x.value == "1" for x in c.buffers[i3]):
                return Verdict(False, "q3 -> q5 fired with <x,1> still buffered",
                               [lb_config_to_json(program, c)])
            if len(c.buffers[program.process_index(m.process)]) >= propagation_bound \
                    and m.transition.instr.kind == "wr":
                continue
            succ.append((m, pos + 1 if pos < len(prefix) else pos))
        for m, npos in succ:
            nxt = (lb_apply(program, c, m, stale_values), npos)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return Verdict(True, f"{len(seen)} configurations explored, qF unreachable")


# ---------------------------------------------------------------- JSON

def lb_config_to_json(program: Program, c: LbConfiguration) -> dict:
    return {
        "state": {p.name: q for p, q in zip(program.processes, c.states)},
        "buffers": {p.name: [[m.var, m.value, "own"] if m.own else [m.var, m.value] for m in buf]
                    for p, buf in zip(program.processes, c.buffers)},
        "memory": dict(zip(program.variables, c.memory)),
    }


def lb_config_from_json(program: Program, obj: dict) -> LbConfiguration:
    try:
        states = tuple(obj["state"][p.name] for p in program.processes)
        buffers = []
        for p in program.processes:
            buf = []
            for entry in obj.get("buffers", {}).get(p.name, []):
                if len(entry) == 3 and entry[2] != "own" or len(entry) not in (2, 3):
                    raise ValueError(f"bad buffer entry {entry!r}")
                buf.append(LbMessage(str(entry[0]), str(entry[1]), len(entry) == 3))
            buffers.append(tuple(buf))
        memory = tuple(str(obj["memory"][x]) for x in program.variables)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProgramError(f"malformed configuration JSON: {exc}") from None
    return LbConfiguration(states, tuple(buffers), memory)
