"""Finite view abstraction of single-process TSO games.

A view keeps what a lone process can observe of its configuration: its
local state, the value it would read from every variable, and whether a
memory fence is currently enabled.  The view arena built here is bisimilar
to the (infinite) single-process game, so solving it decides that game.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .arena import A, B, Arena, Solution, Verdict, solve_game
from .program import Objective, Program, ProgramError, Transition
from .tso import (
    CapExceededError,
    Configuration,
    apply_instruction,
    enabled_moves,
    initial_configuration,
    update_closure,
)

__all__ = [
    "View",
    "SingleResult",
    "view_of",
    "initial_view",
    "vertex_name",
    "build_view_arena",
    "solve_single_process",
    "state_space_bound",
    "check_lemma5",
    "check_bisimulation",
    "dummy_update_equivalence",
]

MAX_BOUND = 2**63 - 1


class View(NamedTuple):
    state: str
    readable: tuple[str, ...]
    fence: bool


def _require_single(program: Program) -> None:
    if len(program.processes) != 1:
        raise ProgramError(f"expected a single-process program, got {len(program.processes)} processes")


def view_of(program: Program, c: Configuration) -> View:
    _require_single(program)
    buf = c.buffers[0]
    readable = list(c.memory)
    pending = set()
    for msg in buf:  # newest first
        if msg.var not in pending:
            pending.add(msg.var)
            readable[program.var_index(msg.var)] = msg.value
    return View(c.states[0], tuple(readable), not buf)


def initial_view(program: Program) -> View:
    return view_of(program, initial_configuration(program))


def vertex_name(program: Program, vertex: tuple[View, str]) -> str:
    view, owner = vertex
    parts = [view.state]
    parts += [f"{x}={v}" for x, v in zip(program.variables, view.readable)]
    parts += [f"F={int(view.fence)}", owner]
    return "|".join(parts)


def _successor_view(program: Program, view: View, t: Transition) -> View | None:
    instr = t.instr
    if instr.kind == "rd":
        if view.readable[program.var_index(instr.var)] != instr.value:
            return None
        return View(t.target, view.readable, view.fence)
    if instr.kind == "wr":
        j = program.var_index(instr.var)
        readable = view.readable[:j] + (instr.value,) + view.readable[j + 1:]
        return View(t.target, readable, False)
    if instr.kind == "mf":
        if not view.fence:
            return None
        return View(t.target, view.readable, True)
    return View(t.target, view.readable, view.fence)


def build_view_arena(program: Program, init_view: View | None = None, flush_edges: bool = True) -> Arena:
    """The arena of views reachable from ``(init_view, A)``.

    Process-player edges are labelled by the program transition they fire.
    The update player may always stay (label ``stay``) and, while the buffer
    is nonempty, flush everything (label ``flush``); partial flushes look
    exactly like staying and are therefore not separate edges.  Passing
    ``flush_edges=False`` removes the flush edges.
    """
    _require_single(program)
    proc = program.processes[0]
    if init_view is None:
        init_view = initial_view(program)
    start = (init_view, A)
    seen = {start}
    edges = []
    queue = deque([start])
    while queue:
        vertex = queue.popleft()
        view, owner = vertex
        if owner == A:
            out = []
            for t in proc.outgoing(view.state):
                nxt = _successor_view(program, view, t)
                if nxt is not None:
                    out.append(((nxt, B), t))
        else:
            out = [((view, A), "stay")]
            if flush_edges and not view.fence:
                out.append(((View(view.state, view.readable, True), A), "flush"))
        for w, label in out:
            edges.append((vertex, w, label))
            if w not in seen:
                seen.add(w)
                queue.append(w)

    names = {v: vertex_name(program, v) for v in seen}
    arena = Arena(initial=start)
    for v in sorted(seen, key=names.__getitem__):
        arena.add_vertex(v, v[1], names[v])
    for u, w, label in sorted(edges, key=lambda e: (names[e[0]], names[e[1]], str(e[2]))):
        arena.add_edge(u, w, label)
    return arena


@dataclass
class SingleResult:
    winner: str  # "process" | "update"
    arena: Arena
    solution: Solution
    initial: tuple[View, str]
    special: frozenset

    def strategy_move(self, view: View) -> Transition:
        """Instruction the process player's positional strategy plays at ``view``."""
        vertex = (view, A)
        succ = self.solution.strategy_a.get(vertex)
        if succ is None:
            raise KeyError(view)
        return min(self.arena.labels(vertex, succ), key=str)


def solve_single_process(program: Program, objective: Objective, c0: Configuration | None = None,
                         flush_edges: bool = True) -> SingleResult:
    """Decide the single-process game from ``c0`` (default: the initial configuration)."""
    _require_single(program)
    if c0 is None:
        c0 = initial_configuration(program)
    if not c0.buffers_empty():
        raise ProgramError("the initial configuration must have an empty buffer")
    targets = objective.states_of(program.processes[0].name)
    arena = build_view_arena(program, view_of(program, c0), flush_edges=flush_edges)
    special = frozenset(v for v in arena.vertices if v[0].state in targets)
    solution = solve_game(arena, objective.mode, special)
    winner = "process" if solution.winner[arena.initial] == A else "update"
    return SingleResult(winner, arena, solution, arena.initial, special)


def state_space_bound(program: Program) -> int:
    """Number of views, ``|Q| * |Dom|^|Vars| * 2``."""
    _require_single(program)
    n = len(program.processes[0].states) * len(program.values) ** len(program.variables) * 2
    if n > MAX_BOUND:
        raise OverflowError(f"view count {n} does not fit in 64 bits")
    return n


def check_lemma5(program: Program, c1: Configuration, c2: Configuration) -> Verdict:
    """Two configurations with the same view enable the same instructions with equal-view results."""
    v1, v2 = view_of(program, c1), view_of(program, c2)
    if v1 != v2:
        raise ValueError(f"configurations have different views: {v1} vs {v2}")
    m1 = {t: apply_instruction(program, c1, p, t) for p, t in enabled_moves(program, c1)}
    m2 = {t: apply_instruction(program, c2, p, t) for p, t in enabled_moves(program, c2)}
    for t in sorted(set(m1) ^ set(m2), key=str):
        return Verdict(False, f"{t.instr} enabled at only one configuration", [str(t)])
    for t in sorted(m1, key=str):
        if view_of(program, m1[t]) != view_of(program, m2[t]):
            return Verdict(False, f"successor views differ after {t.instr}", [str(t)])
    u1 = {view_of(program, c) for c in update_closure(program, c1)}
    u2 = {view_of(program, c) for c in update_closure(program, c2)}
    if u1 != u2:
        return Verdict(False, "views of the update closures differ", ["up*"])
    return Verdict(True)


def check_bisimulation(program: Program, c0: Configuration | None = None, buffer_bound: int = 3,
                       max_states: int = 100_000, arena: Arena | None = None) -> Verdict:
    """Check that ``c -> view_of(c)`` is a bisimulation between the game and the view arena.

    The concrete game is explored from ``(c0, A)`` with every buffer kept
    within ``buffer_bound``: process-player copies move by instructions,
    update-player copies by any flush sequence.  Each explored vertex must
    be related to the view vertex of the same owner.  Both transfer
    directions are checked locally on its full successor set, so writes
    cut off by the bound still count.  A custom ``arena`` may be passed to
    audit a hand-built one.
    """
    _require_single(program)
    if c0 is None:
        c0 = initial_configuration(program)
    if arena is None:
        arena = build_view_arena(program, view_of(program, c0))

    def arena_out(vertex):
        return {(str(label.instr) if isinstance(label, Transition) else "up*", w)
                for w, label in arena.edges(vertex)}

    def fail(kind, c, owner, lab, w):
        return Verdict(False, f"{kind} failure at {c} ({owner}): {lab} to {vertex_name(program, w)}",
                       [str(c), owner, lab, vertex_name(program, w)])

    start = (c0, A)
    seen = {start}
    queue = deque([start])
    while queue:
        c, owner = queue.popleft()
        v = (view_of(program, c), owner)
        if v not in arena:
            return Verdict(False, f"view {vertex_name(program, v)} missing from the arena", [str(c), owner])
        if owner == A:
            succ = [(str(t.instr), apply_instruction(program, c, p, t)) for p, t in enabled_moves(program, c)]
            nxt_owner = B
        else:
            succ = [("up*", d) for d in update_closure(program, c)]
            nxt_owner = A
        concrete = {(lab, (view_of(program, d), nxt_owner)) for lab, d in succ}
        abstract = arena_out(v)
        for lab, w in sorted(concrete - abstract, key=str):
            return fail("zig", c, owner, lab, w)
        for lab, w in sorted(abstract - concrete, key=str):
            return fail("zag", c, owner, lab, w)
        for lab, d in succ:
            if max(map(len, d.buffers)) > buffer_bound:
                continue
            if (d, nxt_owner) not in seen:
                seen.add((d, nxt_owner))
                if len(seen) > max_states:
                    raise CapExceededError(f"exploration exceeds {max_states} game vertices")
                queue.append((d, nxt_owner))
    return Verdict(True, f"{len(seen)} game vertices related")


def dummy_update_equivalence(program: Program, objective: Objective,
                             c0: Configuration | None = None) -> Verdict:
    """Solving with and without flush edges gives the same initial winner, in both modes."""
    for mode in ("reach", "safe"):
        obj = Objective(mode, objective.targets)
        full = solve_single_process(program, obj, c0)
        dummy = solve_single_process(program, obj, c0, flush_edges=False)
        if full.winner != dummy.winner:
            return Verdict(False, f"{mode}: {full.winner} wins with flushes, {dummy.winner} without",
                           [full, dummy])
    return Verdict(True)
