"""Concurrent TSO games: decision by per-process decomposition, plus play simulation.

The process player wins the concurrent game iff she wins the game on some
single process in isolation.  :func:`decide` solves every projection's view
arena, :func:`lift_strategy` turns a winning view strategy back into a
strategy for the concurrent game, and :func:`simulate_play` runs strategy
pairs (or scripted plays) move by move.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .arena import Verdict
from .program import Objective, Program, ProgramError, Transition, Violation, project, validate_for_game
from .tso import (
    Configuration,
    EmptyBufferError,
    apply_instruction,
    apply_update,
    enabled_moves,
    initial_configuration,
)
from .views import SingleResult, View, solve_single_process, view_of

__all__ = [
    "Decision",
    "StrategyDomainError",
    "IllegalMoveError",
    "ProcessMove",
    "UpdateMove",
    "Play",
    "Outcome",
    "LiftedStrategy",
    "NeverUpdate",
    "FlushAll",
    "RandomUpdate",
    "ScriptedUpdate",
    "ScriptedProcess",
    "decide",
    "lift_strategy",
    "simulate_play",
    "check_update_fair_prefix",
    "process_fairness_report",
    "play_script_from_json",
    "play_script_to_json",
    "script_strategies",
    "in_target",
    "validate_witness",
]

PROCESS, UPDATE = "process", "update"


class StrategyDomainError(LookupError):
    pass


class IllegalMoveError(ValueError):
    """A scripted move that is not legal; ``ply`` is 1-based like :attr:`Outcome.ply`."""

    def __init__(self, message: str, ply: int):
        super().__init__(f"ply {ply}: {message}")
        self.ply = ply


# ---------------------------------------------------------------- decision

@dataclass
class Decision:
    winner: str
    witness: str | None
    projections: dict[str, SingleResult]
    warnings: list[Violation] = field(default_factory=list)

    @property
    def witness_result(self) -> SingleResult | None:
        return self.projections[self.witness] if self.witness else None


def _projected(c: Configuration, i: int) -> Configuration:
    return Configuration((c.states[i],), (c.buffers[i],), c.memory)


def decide(program: Program, objective: Objective, c0: Configuration | None = None) -> Decision:
    """Decide the concurrent game from ``c0`` (default: initial configuration).

    The witness is the first process, in declaration order, whose projection
    is won by the process player.
    """
    objective.check(program)
    if c0 is None:
        c0 = initial_configuration(program)
    if not c0.buffers_empty():
        raise ProgramError("the initial configuration must have empty buffers")
    if in_target(program, objective, c0):
        raise ProgramError("initial configuration in C_W")
    warnings = [v for v in validate_for_game(program, objective) if v.level == "warning"]
    results = {}
    witness = None
    for i, p in enumerate(program.processes):
        single = project(program, p.name)
        results[p.name] = solve_single_process(single, objective.restrict(p.name), _projected(c0, i))
        if witness is None and results[p.name].winner == PROCESS:
            witness = p.name
    return Decision(PROCESS if witness else UPDATE, witness, results, warnings)


def in_target(program: Program, objective: Objective, c: Configuration) -> bool:
    return any((p.name, q) in objective.targets for p, q in zip(program.processes, c.states))


class LiftedStrategy:
    """Plays a single-process view strategy inside the concurrent game.

    Only the witness process ever moves; the move is looked up from the view
    of the configuration projected onto that process.
    """

    def __init__(self, program: Program, process: str, result: SingleResult):
        self.program = program
        self.process = process
        self.index = program.process_index(process)
        self.result = result
        self._single = project(program, process)

    def view(self, c: Configuration) -> View:
        return view_of(self._single, _projected(c, self.index))

    def __call__(self, program: Program, c: Configuration) -> tuple[str, Transition]:
        view = self.view(c)
        try:
            return self.process, self.result.strategy_move(view)
        except KeyError:
            raise StrategyDomainError(f"no strategy move at view {view}") from None


def lift_strategy(program: Program, process: str, result: SingleResult) -> LiftedStrategy:
    if result.winner != PROCESS:
        raise ValueError(f"the view game of {process} is not won by the process player")
    return LiftedStrategy(program, process, result)


# ---------------------------------------------------------------- update strategies

class NeverUpdate:
    def __call__(self, program, c, ply):
        return []


class FlushAll:
    def __call__(self, program, c, ply):
        out = []
        for p, buf in zip(program.processes, c.buffers):
            out += [p.name] * len(buf)
        return out


class RandomUpdate:
    """Flush ``k`` messages, ``k`` uniform in ``0..total``, each from a uniformly chosen nonempty buffer."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def __call__(self, program, c, ply):
        lengths = [len(b) for b in c.buffers]
        k = self.rng.randint(0, sum(lengths))
        out = []
        for _ in range(k):
            i = self.rng.choice([j for j, n in enumerate(lengths) if n])
            lengths[i] -= 1
            out.append(program.processes[i].name)
        return out


class ScriptedUpdate:
    def __init__(self, flushes: Sequence[Sequence[str]]):
        self.flushes = [list(f) for f in flushes]
        self.turn = 0

    def __call__(self, program, c, ply):
        if self.turn >= len(self.flushes):
            return None
        out = self.flushes[self.turn]
        self.turn += 1
        return out


class ScriptedProcess:
    def __init__(self, moves: Sequence[tuple[str, Transition]]):
        self.moves = list(moves)
        self.turn = 0

    def __call__(self, program, c):
        if self.turn >= len(self.moves):
            return None
        out = self.moves[self.turn]
        self.turn += 1
        return out


# ---------------------------------------------------------------- plays

@dataclass(frozen=True)
class ProcessMove:
    process: str
    transition: Transition

    def to_json(self) -> dict:
        t = self.transition
        return {"turn": "process", "proc": self.process, "from": t.source, "instr": str(t.instr), "to": t.target}


@dataclass(frozen=True)
class UpdateMove:
    flushes: tuple[str, ...]

    def to_json(self) -> dict:
        return {"turn": "update", "flushes": list(self.flushes)}


@dataclass
class Play:
    """Alternating sequence of configurations; ``turns[k]`` says who moves at ``configs[k]``."""

    program: Program
    configs: list[Configuration]
    turns: list[str]
    moves: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.configs)


@dataclass
class Outcome:
    status: str  # "target-visited" | "a-deadlock" | "horizon" | "script-end"
    index: int  # position in the play where the status was observed
    buffers_empty: bool | None = None  # at an A-deadlock

    @property
    def ply(self) -> int:
        """1-based ply number; the initial configuration is ply 1."""
        return self.index + 1

    @property
    def target_visited(self) -> bool:
        return self.status == "target-visited"


ProcessStrategy = Callable[[Program, Configuration], "tuple[str, Transition] | None"]


def simulate_play(program: Program, objective: Objective | None, c0: Configuration,
                  process_strategy: ProcessStrategy, update_strategy, horizon: int = 1000) -> tuple[Play, Outcome]:
    """Run the two strategies from ``c0`` (process player to move) for at most ``horizon`` plies.

    The play stops when a target configuration appears (whatever the
    objective's mode), when the process player is deadlocked, or when a
    scripted strategy runs out of moves.
    """
    play = Play(program, [c0], [PROCESS])
    c = c0
    turn = PROCESS
    for ply in range(horizon + 1):
        k = len(play.configs) - 1
        if objective is not None and in_target(program, objective, c):
            return play, Outcome("target-visited", k)
        if ply == horizon:
            break
        if turn == PROCESS:
            enabled = enabled_moves(program, c)
            if not enabled:
                return play, Outcome("a-deadlock", k, c.buffers_empty())
            move = process_strategy(program, c)
            if move is None:
                return play, Outcome("script-end", k)
            name, t = move
            if (name, t) not in enabled:
                raise IllegalMoveError(f"{name}: {t} is not enabled", ply + 1)
            c = apply_instruction(program, c, name, t)
            play.moves.append(ProcessMove(name, t))
            turn = UPDATE
        else:
            flushes = update_strategy(program, c, ply)
            if flushes is None:
                return play, Outcome("script-end", k)
            for name in flushes:
                try:
                    c = apply_update(program, c, name)
                except EmptyBufferError as exc:
                    raise IllegalMoveError(str(exc), ply + 1) from None
                except ProgramError as exc:
                    raise IllegalMoveError(str(exc), ply + 1) from None
            play.moves.append(UpdateMove(tuple(flushes)))
            turn = PROCESS
        play.configs.append(c)
        play.turns.append(turn)
    return play, Outcome("horizon", len(play.configs) - 1)


def check_update_fair_prefix(play: Play) -> Verdict:
    """Every process-player configuration without enabled instructions must have empty buffers."""
    for k, (c, turn) in enumerate(zip(play.configs, play.turns)):
        if turn == PROCESS and not enabled_moves(play.program, c) and not c.buffers_empty():
            return Verdict(False, f"process player deadlocked at position {k} with pending buffer messages", [k])
    return Verdict(True)


@dataclass
class FairnessStats:
    enabled: list[int]
    moved: list[int]
    starved: bool


def process_fairness_report(play: Play, window: int) -> dict[str, FairnessStats]:
    """Per process and per window of ``window`` positions: enabled and scheduled counts.

    A process is flagged as starved when it is enabled at some process-player
    position of every window yet never moves in the whole play.
    """
    program = play.program
    names = program.process_names
    n_windows = max(1, -(-len(play.configs) // window))
    enabled = {p: [0] * n_windows for p in names}
    moved = {p: [0] * n_windows for p in names}
    has_a_turn = [False] * n_windows
    move_iter = iter(play.moves)
    for k, (c, turn) in enumerate(zip(play.configs, play.turns)):
        w = k // window
        move = next(move_iter, None) if k < len(play.moves) else None
        if turn != PROCESS:
            continue
        has_a_turn[w] = True
        for p in {name for name, _ in enabled_moves(program, c)}:
            enabled[p][w] += 1
        if isinstance(move, ProcessMove):
            moved[move.process][w] += 1
    report = {}
    windows = [w for w in range(n_windows) if has_a_turn[w]]
    for p in names:
        starved = bool(windows) and all(enabled[p][w] for w in windows) and not any(moved[p])
        report[p] = FairnessStats(enabled[p], moved[p], starved)
    return report


# ---------------------------------------------------------------- play scripts

def play_script_to_json(moves: Sequence) -> str:
    return json.dumps([m.to_json() for m in moves], indent=1)


def play_script_from_json(program: Program, text_or_obj) -> list:
    """Parse a PlayScript JSON array into ProcessMove/UpdateMove objects."""
    from .program import Instruction

    data = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if not isinstance(data, list):
        raise ProgramError("a play script must be a JSON array")
    out = []
    for k, item in enumerate(data):
        try:
            if item["turn"] == "process":
                name = item["proc"]
                t = Transition(item["from"], Instruction.parse(item["instr"]), item["to"])
                if t not in program.process(name).transitions:
                    raise ProgramError(f"{name} has no transition {t}")
                out.append(ProcessMove(name, t))
            elif item["turn"] == "update":
                flushes = tuple(item["flushes"])
                for name in flushes:
                    program.process_index(name)
                out.append(UpdateMove(flushes))
            else:
                raise ProgramError(f"unknown turn {item['turn']!r}")
        except (KeyError, TypeError) as exc:
            raise ProgramError(f"move {k}: malformed ({exc})") from None
        except ProgramError as exc:
            raise ProgramError(f"move {k}: {exc}") from None
    return out


def script_strategies(moves: Sequence) -> tuple[ScriptedProcess, ScriptedUpdate]:
    """Split an alternating script into the two scripted strategies."""
    proc, upd = [], []
    expected = ProcessMove
    for k, m in enumerate(moves):
        if not isinstance(m, expected):
            raise ProgramError(f"move {k}: expected a {'process' if expected is ProcessMove else 'update'} move")
        if isinstance(m, ProcessMove):
            proc.append((m.process, m.transition))
            expected = UpdateMove
        else:
            upd.append(m.flushes)
            expected = ProcessMove
    return ScriptedProcess(proc), ScriptedUpdate(upd)


def validate_witness(program: Program, objective: Objective, decision: Decision, seed: int,
                     c0: Configuration | None = None) -> Verdict:
    """Play the lifted witness strategy against a seeded random update strategy.

    Reach: the target must be visited within twice the witness arena size.
    Safe: over the same number of plies no target may be visited and some
    view-level position (view of the witness projection, turn) must repeat,
    which closes a cycle the strategy can follow forever.
    """
    if decision.witness is None:
        raise ValueError("the decision has no witness")
    result = decision.witness_result
    strategy = lift_strategy(program, decision.witness, result)
    if c0 is None:
        c0 = initial_configuration(program)
    horizon = 2 * len(result.arena)
    play, outcome = simulate_play(program, objective, c0, strategy, RandomUpdate(seed), horizon)
    if objective.mode == "reach":
        if outcome.target_visited:
            return Verdict(True, f"target at ply {outcome.ply}")
        return Verdict(False, f"no target within {horizon} plies ({outcome.status})", [outcome])
    if outcome.status != "horizon":
        return Verdict(False, f"safe play ended early: {outcome.status} at ply {outcome.ply}", [outcome])
    seen = {}
    for k, (c, turn) in enumerate(zip(play.configs, play.turns)):
        key = (strategy.view(c), turn)
        if key in seen:
            return Verdict(True, f"view cycle between plies {seen[key] + 1} and {k + 1}")
        seen[key] = k
    return Verdict(False, "no repeated view-level position", [outcome])
