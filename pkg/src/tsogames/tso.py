"""Store-buffer (TSO) operational semantics.

Configurations are positional: ``states[i]`` and ``buffers[i]`` belong to
``program.processes[i]`` and ``memory[j]`` to ``program.variables[j]``.
Buffers are stored newest-first, so a write prepends and a flush pops the
last element.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .program import Program, ProgramError, Transition

__all__ = [
    "Message",
    "Configuration",
    "Step",
    "Exploration",
    "DisabledMoveError",
    "EmptyBufferError",
    "CapExceededError",
    "initial_configuration",
    "readable_value",
    "is_enabled",
    "enabled_moves",
    "apply_instruction",
    "apply_update",
    "update_closure",
    "bounded_explore",
    "config_to_json",
    "config_from_json",
]

DEFAULT_CLOSURE_CAP = 100_000


class DisabledMoveError(ValueError):
    pass


class EmptyBufferError(ValueError):
    pass


class CapExceededError(RuntimeError):
    pass


class Message(NamedTuple):
    var: str
    value: str


@dataclass(frozen=True, order=True)
class Configuration:
    states: tuple[str, ...]
    buffers: tuple[tuple[Message, ...], ...]
    memory: tuple[str, ...]

    def buffers_empty(self) -> bool:
        return not any(self.buffers)


def initial_configuration(program: Program) -> Configuration:
    return Configuration(
        tuple(p.initial for p in program.processes),
        tuple(() for _ in program.processes),
        program.init,
    )


def readable_value(program: Program, c: Configuration, i: int, var: str) -> str:
    """Value process ``i`` reads from ``var``: its newest buffered write, else memory."""
    for msg in c.buffers[i]:
        if msg.var == var:
            return msg.value
    return c.memory[program.var_index(var)]


def is_enabled(program: Program, c: Configuration, i: int, t: Transition) -> bool:
    if c.states[i] != t.source:
        return False
    kind = t.instr.kind
    if kind == "rd":
        return readable_value(program, c, i, t.instr.var) == t.instr.value
    if kind == "mf":
        return not c.buffers[i]
    return True


def enabled_moves(program: Program, c: Configuration) -> list[tuple[str, Transition]]:
    """All instruction transitions enabled at ``c``, as (process name, transition) pairs."""
    out = []
    for i, p in enumerate(program.processes):
        for t in p.outgoing(c.states[i]):
            if is_enabled(program, c, i, t):
                out.append((p.name, t))
    return out


def apply_instruction(program: Program, c: Configuration, process: str, t: Transition) -> Configuration:
    i = program.process_index(process)
    if t not in program.processes[i].transitions:
        raise DisabledMoveError(f"{t} is not a transition of {process}")
    if not is_enabled(program, c, i, t):
        raise DisabledMoveError(f"{t} is not enabled in {process}")
    states = c.states[:i] + (t.target,) + c.states[i + 1:]
    buffers = c.buffers
    if t.instr.kind == "wr":
        buf = (Message(t.instr.var, t.instr.value),) + c.buffers[i]
        buffers = c.buffers[:i] + (buf,) + c.buffers[i + 1:]
    return Configuration(states, buffers, c.memory)


def _flush(program: Program, c: Configuration, i: int) -> Configuration:
    buf = c.buffers[i]
    msg = buf[-1]
    j = program.var_index(msg.var)
    memory = c.memory[:j] + (msg.value,) + c.memory[j + 1:]
    return Configuration(c.states, c.buffers[:i] + (buf[:-1],) + c.buffers[i + 1:], memory)


def apply_update(program: Program, c: Configuration, process: str) -> Configuration:
    """Flush the oldest buffered message of ``process`` to memory."""
    i = program.process_index(process)
    if not c.buffers[i]:
        raise EmptyBufferError(f"buffer of {process} is empty")
    return _flush(program, c, i)


def update_closure(program: Program, c: Configuration, cap: int = DEFAULT_CLOSURE_CAP) -> set[Configuration]:
    """Every configuration reachable from ``c`` by flushes alone, ``c`` included."""
    seen = {c}
    queue = deque([c])
    while queue:
        cur = queue.popleft()
        for i, buf in enumerate(cur.buffers):
            if buf:
                nxt = _flush(program, cur, i)
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > cap:
                        raise CapExceededError(f"update closure exceeds {cap} configurations")
                    queue.append(nxt)
    return seen


class Step(NamedTuple):
    source: Configuration
    process: str
    action: object  # a Transition, or the string "up"
    target: Configuration

    @property
    def label(self) -> str:
        return f"{'up' if self.action == 'up' else self.action.instr}_{self.process}"


@dataclass
class Exploration:
    configurations: list[Configuration]
    steps: list[Step]
    frontier: set[Configuration] = field(default_factory=set)


def bounded_explore(program: Program, c0: Configuration, buffer_bound: int,
                    max_states: int = DEFAULT_CLOSURE_CAP) -> Exploration:
    """Breadth-first exploration by instruction and single-flush steps.

    Writes that would push a buffer beyond ``buffer_bound`` are not taken;
    their source configurations are flagged as frontier instead.
    """
    seen = {c0}
    order = [c0]
    steps = []
    frontier = set()
    queue = deque([c0])
    while queue:
        cur = queue.popleft()
        succs = []
        for name, t in enabled_moves(program, cur):
            i = program.process_index(name)
            if t.instr.kind == "wr" and len(cur.buffers[i]) >= buffer_bound:
                frontier.add(cur)
                continue
            succs.append(Step(cur, name, t, apply_instruction(program, cur, name, t)))
        for i, p in enumerate(program.processes):
            if cur.buffers[i]:
                succs.append(Step(cur, p.name, "up", _flush(program, cur, i)))
        for s in succs:
            steps.append(s)
            if s.target not in seen:
                seen.add(s.target)
                if len(seen) > max_states:
                    raise CapExceededError(f"exploration exceeds {max_states} configurations")
                order.append(s.target)
                queue.append(s.target)
    return Exploration(order, steps, frontier)


# ---------------------------------------------------------------- JSON

def config_to_json(program: Program, c: Configuration) -> dict:
    return {
        "state": {p.name: q for p, q in zip(program.processes, c.states)},
        "buffers": {p.name: [[m.var, m.value] for m in buf] for p, buf in zip(program.processes, c.buffers)},
        "memory": dict(zip(program.variables, c.memory)),
    }


def config_from_json(program: Program, obj: dict) -> Configuration:
    try:
        states = tuple(obj["state"][p.name] for p in program.processes)
        buffers = tuple(
            tuple(Message(str(x), str(v)) for x, v in obj.get("buffers", {}).get(p.name, []))
            for p in program.processes
        )
        memory = tuple(str(obj["memory"][x]) for x in program.variables)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProgramError(f"malformed configuration JSON: {exc}") from None
    for p, q in zip(program.processes, states):
        if q not in p.states:
            raise ProgramError(f"unknown state {p.name}.{q}")
    return Configuration(states, buffers, memory)
