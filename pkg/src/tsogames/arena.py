"""Finite two-player turn-based arenas with reachability and safety objectives.

Player ``A`` is the reachability player in ``reach`` mode and the safety
player in ``safe`` mode.  A play that ends in a deadlock is lost by the
player who cannot move.  Both objectives are solved with a backward
attractor, which also yields positional strategies for the two players.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

__all__ = ["Arena", "Solution", "Verdict", "solve_game", "check_strategy", "to_dot", "to_json"]

A, B = "A", "B"


def _other(player: str) -> str:
    return B if player == A else A


class Arena:
    """Explicit bipartite game graph.

    Vertices are opaque hashable keys; the insertion order is the
    deterministic vertex order used for tie-breaking.
    """

    def __init__(self, initial: Hashable | None = None):
        self.initial = initial
        self._owner: dict[Hashable, str] = {}
        self._succ: dict[Hashable, list[tuple[Hashable, object]]] = {}
        self._names: dict[Hashable, str] = {}

    def add_vertex(self, v: Hashable, owner: str, name: str | None = None) -> None:
        if owner not in (A, B):
            raise ValueError(f"owner must be A or B, not {owner!r}")
        if v in self._owner:
            if self._owner[v] != owner:
                raise ValueError(f"vertex {v!r} re-added with a different owner")
            return
        self._owner[v] = owner
        self._succ[v] = []
        if name is not None:
            self._names[v] = name
        if self.initial is None:
            self.initial = v

    def add_edge(self, u: Hashable, v: Hashable, label: object = None) -> None:
        if self._owner[u] == self._owner[v]:
            raise ValueError(f"edge {u!r} -> {v!r} does not alternate between players")
        self._succ[u].append((v, label))

    @property
    def vertices(self) -> list:
        return list(self._owner)

    def __len__(self) -> int:
        return len(self._owner)

    def __contains__(self, v) -> bool:
        return v in self._owner

    def owner(self, v) -> str:
        return self._owner[v]

    def edges(self, v) -> list[tuple[Hashable, object]]:
        return list(self._succ[v])

    def successors(self, v) -> list:
        return list(dict.fromkeys(w for w, _ in self._succ[v]))

    def labels(self, u, v) -> list:
        return [lab for w, lab in self._succ[u] if w == v]

    def name(self, v) -> str:
        return self._names.get(v, str(v))

    def edge_count(self) -> int:
        return sum(len(es) for es in self._succ.values())


@dataclass
class Solution:
    mode: str
    winner: dict
    strategy_a: dict = field(default_factory=dict)
    strategy_b: dict = field(default_factory=dict)
    rank: dict = field(default_factory=dict)

    def strategy(self, player: str) -> dict:
        return self.strategy_a if player == A else self.strategy_b


@dataclass
class Verdict:
    ok: bool
    message: str = ""
    witness: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _attractor(arena: Arena, player: str, goal: set, absorbing: bool):
    """Vertices from which ``player`` forces a visit to ``goal``.

    Returns ``(region, rank)``; rank 0 marks goal vertices.  With
    ``absorbing`` the edges leaving goal vertices are ignored.
    """
    order = {v: k for k, v in enumerate(arena.vertices)}
    preds: dict = {v: [] for v in order}
    remaining = {}
    for v in order:
        succ = arena.successors(v)
        remaining[v] = len(succ)
        for w in succ:
            preds[w].append(v)
    rank = {v: 0 for v in goal}
    queue = deque(sorted(goal, key=order.__getitem__))
    while queue:
        w = queue.popleft()
        for v in preds[w]:
            if v in rank:
                continue
            if absorbing and v in goal:
                continue
            if arena.owner(v) == player:
                rank[v] = rank[w] + 1
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    rank[v] = rank[w] + 1
                    queue.append(v)
    return set(rank), rank


def solve_game(arena: Arena, mode: str, special: Iterable) -> Solution:
    """Solve the game; ``special`` are target (reach) or unsafe (safe) vertices."""
    special = set(special)
    vertices = arena.vertices
    if mode == "reach":
        attractor_player = A
        goal = special | {v for v in vertices if arena.owner(v) == B and not arena.successors(v)}
    elif mode == "safe":
        attractor_player = B
        goal = special | {v for v in vertices if arena.owner(v) == A and not arena.successors(v)}
    else:
        raise ValueError(f"mode must be reach or safe, not {mode!r}")
    region, rank = _attractor(arena, attractor_player, goal, absorbing=True)
    opponent = _other(attractor_player)

    winner = {v: attractor_player if v in region else opponent for v in vertices}
    order = {v: k for k, v in enumerate(vertices)}
    strategies = {A: {}, B: {}}
    for v in vertices:
        owner = arena.owner(v)
        succ = arena.successors(v)
        if not succ or v in goal:
            continue
        if owner == attractor_player and v in region:
            strategies[owner][v] = min((w for w in succ if w in region), key=lambda w: (rank[w], order[w]))
        elif owner == opponent and v not in region:
            strategies[owner][v] = min((w for w in succ if w not in region), key=order.__getitem__)
    return Solution(mode, winner, strategies[A], strategies[B], rank)


# ---------------------------------------------------------------- audit

def _audit_reach(arena, player, strategy, goal, starts, horizon):
    """Every play from ``starts`` that follows ``strategy`` hits ``goal`` within ``horizon`` plies."""
    done: dict = {}  # worst-case plies to the goal, shared by all starts
    on_path: set = set()

    for start in starts:
        if start in done:
            continue
        path: list = []
        stack: list = []

        def enter(v):
            if v in goal:
                done[v] = 0
                return None
            if arena.owner(v) == player:
                w = strategy.get(v)
                if w is None or w not in arena.successors(v):
                    return Verdict(False, f"{player} has no legal strategy move at {arena.name(v)}",
                                   [arena.name(x) for x in path + [v]])
                succ = [w]
            else:
                succ = arena.successors(v)
            path.append(v)
            on_path.add(v)
            stack.append([v, iter(succ), 0])
            return None

        failure = enter(start)
        if failure is not None:
            return failure
        while stack:
            frame = stack[-1]
            w = next(frame[1], None)
            if w is None:
                stack.pop()
                path.pop()
                on_path.discard(frame[0])
                done[frame[0]] = frame[2]
                if stack:
                    stack[-1][2] = max(stack[-1][2], frame[2] + 1)
                continue
            if w in on_path:
                return Verdict(False, f"{_other(player)} can force a cycle avoiding the goal",
                               [arena.name(x) for x in path + [w]])
            if w not in done:
                failure = enter(w)
                if failure is not None:
                    return failure
            if w in done:
                frame[2] = max(frame[2], done[w] + 1)
        if done[start] > horizon:
            return Verdict(False, f"goal reached only after {done[start]} plies (> horizon {horizon})",
                           [arena.name(start)])
    return Verdict(True)


def _audit_safe(arena, player, strategy, bad, starts):
    """No play from ``starts`` that follows ``strategy`` meets ``bad`` or strands ``player``."""
    parent = {v: None for v in starts}
    queue = deque(starts)

    def trace(v):
        out = []
        while v is not None:
            out.append(arena.name(v))
            v = parent[v]
        return out[::-1]

    while queue:
        v = queue.popleft()
        if v in bad:
            return Verdict(False, f"play reaches {arena.name(v)}", trace(v))
        if arena.owner(v) == player:
            w = strategy.get(v)
            if w is None or w not in arena.successors(v):
                return Verdict(False, f"{player} has no legal strategy move at {arena.name(v)}", trace(v))
            succ = [w]
        else:
            succ = arena.successors(v)
        for w in succ:
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return Verdict(True)


def check_strategy(arena: Arena, mode: str, special: Iterable, solution: Solution, horizon: int) -> Verdict:
    """Adversarially verify both positional strategies of ``solution``.

    From every vertex won by the reachability player, every play that
    follows her strategy must reach the goal within ``horizon`` plies,
    whatever the opponent does.  From every vertex won by the safety player,
    no play that follows his strategy may ever meet the goal set or leave
    him without a move.
    """
    special = set(special)
    if set(solution.winner) != set(arena.vertices):
        return Verdict(False, "winner map is not total")
    dead = {v for v in arena.vertices if not arena.successors(v)}
    if mode == "reach":
        reach_player, goal = A, special | {v for v in dead if arena.owner(v) == B}
    else:
        reach_player, goal = B, special | {v for v in dead if arena.owner(v) == A}
    safe_player = _other(reach_player)
    reach_won = [v for v in arena.vertices if solution.winner[v] == reach_player]
    safe_won = [v for v in arena.vertices if solution.winner[v] == safe_player]
    verdict = _audit_reach(arena, reach_player, solution.strategy(reach_player), goal, reach_won, horizon)
    if verdict:
        verdict = _audit_safe(arena, safe_player, solution.strategy(safe_player), goal, safe_won)
    if verdict:
        return Verdict(True, f"{len(arena)} vertices audited")
    return verdict


# ---------------------------------------------------------------- export

def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(arena: Arena, special: Iterable = ()) -> str:
    special = set(special)
    lines = ["digraph arena {"]
    for v in arena.vertices:
        shape = "box" if arena.owner(v) == A else "ellipse"
        if v in special:
            shape = "doublecircle"
        extra = ", style=bold" if v == arena.initial else ""
        lines.append(f"  {_dot_id(arena.name(v))} [shape={shape}, owner={arena.owner(v)}{extra}];")
    for v in arena.vertices:
        for w, lab in arena.edges(v):
            label = "" if lab is None else f" [label={_dot_id(str(lab))}]"
            lines.append(f"  {_dot_id(arena.name(v))} -> {_dot_id(arena.name(w))}{label};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(arena: Arena, special: Iterable = ()) -> str:
    special = set(special)
    doc = {
        "initial": arena.name(arena.initial) if arena.initial is not None else None,
        "vertices": [{"id": arena.name(v), "owner": arena.owner(v), "special": v in special}
                     for v in arena.vertices],
        "edges": [{"from": arena.name(v), "to": arena.name(w), "label": None if lab is None else str(lab)}
                  for v in arena.vertices for w, lab in arena.edges(v)],
    }
    return json.dumps(doc, indent=2)
