"""Perfect channel systems and their encodings as fair TSO games.

A PCS is a finite automaton with one unbounded FIFO channel.  The update
fairness encoding stores the channel in the store buffer of ``Proc1``:
each send writes ``<x_wr,m>`` then ``<y,1>``.  ``Proc2`` performs the
*rotation* that moves a flushed message from ``x_wr`` to ``x_rd``, where
``Proc1`` can receive it.  Every deviation of the update player from the
protocol enables a move of ``Proc2`` into ``qwin2``.

The process fairness encoding adds one always-enabled writer process per
PCS transition.  Their ``z`` writes let the update player choose which PCS
transition ``Proc1`` simulates next.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from ..program import MF, SKIP, Objective, Process, Program, ProgramError, Transition, rd, wr
from ..solver import Play, ProcessMove, UpdateMove
from ..tso import Configuration, enabled_moves

__all__ = [
    "PcsError",
    "PcsTransition",
    "Pcs",
    "PcsConfig",
    "parse_pcs",
    "pcs_step",
    "pcs_run",
    "pcs_to_update_fairness_game",
    "pcs_to_process_fairness_game",
    "script_from_pcs_run",
    "cheat_script",
    "CheatScript",
    "qwin2_moves",
    "escape_moves",
    "audit_pcs_play",
    "PcsAudit",
]

BOT = "bot"
RESERVED_VALUES = {"0", "1", BOT}
P1, P2 = "Proc1", "Proc2"
QWIN = "qwin2"
QF = "qF"
_AUX = re.compile(r"(u|h1|h2|g)_e\d+\Z|qF\Z")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_VALUE = re.compile(r"[A-Za-z0-9_]+\Z")


class PcsError(ProgramError):
    pass


class PcsTransition(NamedTuple):
    source: str
    op: str  # "send" | "recv" | "skip"
    message: str | None
    target: str

    def __str__(self):
        op = self.op if self.message is None else f"{self.op} {self.message}"
        return f"{self.source} {self.target} {op}"


@dataclass(frozen=True)
class Pcs:
    """Transitions are identified by position: transition ``k`` has id ``ek``."""

    states: tuple[str, ...]
    messages: tuple[str, ...]
    transitions: tuple[PcsTransition, ...]
    initial: str
    final: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "final", frozenset(self.final))
        states, msgs = set(self.states), set(self.messages)
        if len(states) != len(self.states) or len(msgs) != len(self.messages):
            raise PcsError("duplicate state or message")
        if self.initial not in states:
            raise PcsError(f"undeclared initial state {self.initial}")
        for s in self.final:
            if s not in states:
                raise PcsError(f"undeclared final state {s}")
        for k, t in enumerate(self.transitions):
            if t.source not in states or t.target not in states:
                raise PcsError(f"transition e{k}: undeclared state")
            if t.op not in ("send", "recv", "skip"):
                raise PcsError(f"transition e{k}: unknown operation {t.op}")
            if (t.op == "skip") != (t.message is None):
                raise PcsError(f"transition e{k}: malformed operand")
            if t.message is not None and t.message not in msgs:
                raise PcsError(f"transition e{k}: undeclared message {t.message}")

    @property
    def ids(self) -> list[str]:
        return [f"e{k}" for k in range(len(self.transitions))]

    def transition(self, tid: str) -> PcsTransition:
        m = re.fullmatch(r"e(\d+)", tid)
        if not m or int(m.group(1)) >= len(self.transitions):
            raise PcsError(f"unknown transition id {tid}")
        return self.transitions[int(m.group(1))]

    def to_text(self) -> str:
        lines = ["states " + " ".join(self.states), "messages " + " ".join(self.messages),
                 f"init {self.initial}", "final " + " ".join(s for s in self.states if s in self.final)]
        lines += [f"trans {t}" for t in self.transitions]
        return "\n".join(lines) + "\n"


class PcsConfig(NamedTuple):
    """``channel`` is newest-first: sends prepend, receives take the last element."""

    state: str
    channel: tuple[str, ...] = ()


def parse_pcs(text: str) -> Pcs:
    states = messages = initial = None
    final: list[str] = []
    trans = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        head, rest = words[0], words[1:]

        def err(msg):
            raise PcsError(f"line {lineno}: {msg}")

        for w in rest:
            if not _VALUE.match(w):
                err(f"bad token {w!r}")
        if head == "states":
            states = rest
        elif head == "messages":
            messages = rest
        elif head == "init":
            if len(rest) != 1:
                err("init takes exactly one state")
            initial = rest[0]
        elif head == "final":
            final += rest
        elif head == "trans":
            if len(rest) == 3 and rest[2] == "skip":
                trans.append(PcsTransition(rest[0], "skip", None, rest[1]))
            elif len(rest) == 4 and rest[2] in ("send", "recv"):
                trans.append(PcsTransition(rest[0], rest[2], rest[3], rest[1]))
            else:
                err("expected 'trans FROM TO send|recv MSG' or 'trans FROM TO skip'")
        else:
            err(f"unknown section {head!r}")
    if states is None or initial is None:
        raise PcsError("missing 'states' or 'init' line")
    return Pcs(tuple(states), tuple(messages or ()), tuple(trans), initial, frozenset(final))


def pcs_step(l: Pcs, c: PcsConfig, t: PcsTransition | str) -> PcsConfig:
    if isinstance(t, str):
        t = l.transition(t)
    if t.source != c.state:
        raise PcsError(f"{t} does not start at {c.state}")
    if t.op == "send":
        return PcsConfig(t.target, (t.message,) + c.channel)
    if t.op == "recv":
        if not c.channel:
            raise PcsError(f"{t}: channel is empty")
        if c.channel[-1] != t.message:
            raise PcsError(f"{t}: channel head is {c.channel[-1]}")
        return PcsConfig(t.target, c.channel[:-1])
    return PcsConfig(t.target, c.channel)


def pcs_run(l: Pcs, run: Sequence[str]) -> list[PcsConfig]:
    """Configurations visited by a run of transition ids, starting with the initial one."""
    out = [PcsConfig(l.initial)]
    for tid in run:
        out.append(pcs_step(l, out[-1], tid))
    return out


# ---------------------------------------------------------------- generators

def _check_names(l: Pcs, process_fairness: bool) -> None:
    for m in l.messages:
        if m in RESERVED_VALUES:
            raise PcsError(f"message {m} clashes with a reserved value")
        if process_fairness and re.fullmatch(r"e\d+", m):
            raise PcsError(f"message {m} clashes with a transition identifier")
    for s in l.states:
        if not _IDENT.match(s):
            raise PcsError(f"state {s} is not an identifier")
        if _AUX.match(s):
            raise PcsError(f"state {s} clashes with an auxiliary state name")


def _proc2(messages: Sequence[str]) -> Process:
    ts = []
    for m in messages:
        p = [f"p{k}_{m}" for k in range(11)]
        p[0] = "p0"
        ts += [
            Transition(p[0], rd("x_wr", m), p[1]),
            Transition(p[1], wr("x_rd", m), p[2]),
            Transition(p[2], MF, p[3]),
            Transition(p[3], wr("x_wr", BOT), p[4]),
            Transition(p[4], rd("y", 0), p[5]),
            Transition(p[4], rd("y", 1), QWIN),
            Transition(p[5], MF, p[6]),
            Transition(p[6], rd("y", 1), p[7]),
            Transition(p[7], wr("y", 0), p[8]),
            Transition(p[8], wr("x_rd", BOT), p[9]),
            Transition(p[9], MF, p[10]),
            Transition(p[10], rd("x_wr", BOT), p[0]),
        ]
        ts += [Transition(p[10], rd("x_wr", m2), QWIN) for m2 in messages]
    ts.append(Transition(QWIN, SKIP, QWIN))
    return Process(P2, "p0", tuple(ts))


def _gadget(t: PcsTransition, tid: str, start: str) -> list[Transition]:
    if t.op == "send":
        u = f"u_{tid}"
        return [Transition(start, wr("x_wr", t.message), u), Transition(u, wr("y", 1), t.target)]
    if t.op == "recv":
        h1, h2 = f"h1_{tid}", f"h2_{tid}"
        return [Transition(start, SKIP, h1), Transition(h1, rd("x_rd", t.message), h2),
                Transition(h2, rd("x_rd", BOT), t.target)]
    return [Transition(start, SKIP, t.target)]


def pcs_to_update_fairness_game(l: Pcs) -> tuple[Program, Objective]:
    """Reachability game: the process player wins iff a final state is reachable in ``l``."""
    _check_names(l, False)
    ts = []
    for tid, t in zip(l.ids, l.transitions):
        ts += _gadget(t, tid, t.source)
    proc1 = Process(P1, l.initial, tuple(ts) + _isolated_loops(l, ts))
    values = [BOT, "0", "1", *l.messages]
    program = Program.create(values, ["x_wr", "x_rd", "y"], {"x_wr": BOT, "x_rd": BOT, "y": "0"},
                             [proc1, _proc2(l.messages)])
    targets = {(P1, s) for s in l.final} | {(P2, QWIN)}
    return program, Objective("reach", frozenset(targets))


def _isolated_loops(l: Pcs, ts: list[Transition]) -> tuple:
    # declare states that no transition mentions; a harmless skip loop keeps them in Q
    mentioned = {l.initial} | {t.source for t in ts} | {t.target for t in ts}
    return tuple(Transition(s, SKIP, s) for s in l.states if s not in mentioned and s in l.final)


def pcs_to_process_fairness_game(l: Pcs) -> tuple[Program, Objective]:
    """Safety game whose unsafe states are the final PCS states."""
    _check_names(l, True)
    ts = []
    receive_states: dict[str, set[str]] = {m: set() for m in l.messages}
    for tid, t in zip(l.ids, l.transitions):
        g = f"g_{tid}"
        ts.append(Transition(t.source, rd("z", tid), g))
        ts += _gadget(t, tid, g)
        if t.op == "recv":
            receive_states[t.message] |= {f"h1_{tid}", f"h2_{tid}"}
    ts += list(_isolated_loops(l, ts))
    states = list(dict.fromkeys([l.initial] + [q for t in ts for q in (t.source, t.target)]))
    for q in states:
        for m in l.messages:
            if q not in receive_states[m]:
                ts.append(Transition(q, rd("x_rd", m), QF))
    ts.append(Transition(QF, SKIP, QF))
    proc1 = Process(P1, l.initial, tuple(ts))
    writers = [Process(f"Proc_{tid}", f"q_{tid}", (Transition(f"q_{tid}", wr("z", tid), f"q_{tid}"),))
               for tid in l.ids]
    values = [BOT, "0", "1", *l.messages, *l.ids]
    program = Program.create(values, ["x_wr", "x_rd", "y", "z"],
                             {"x_wr": BOT, "x_rd": BOT, "y": "0", "z": BOT},
                             [proc1, _proc2(l.messages)] + writers)
    return program, Objective("safe", frozenset((P1, s) for s in l.final))


# ---------------------------------------------------------------- scripts

def _pmove(proc: Process, src: str, instr, dst: str) -> ProcessMove:
    t = Transition(src, instr, dst)
    if t not in proc.transitions:
        raise PcsError(f"internal: {proc.name} lacks {t}")
    return ProcessMove(proc.name, t)


class _Builder:
    def __init__(self, program: Program):
        self.program = program
        self.p1 = program.process(P1)
        self.p2 = program.process(P2)
        self.moves: list = []

    def step(self, proc: Process, src, instr, dst, flushes=()):
        self.moves.append(_pmove(proc, src, instr, dst))
        self.moves.append(UpdateMove(tuple(flushes)))

    def proc2(self, src, instr, dst, flushes=()):
        self.step(self.p2, src, instr, dst, flushes)

    def proc1(self, src, instr, dst, flushes=()):
        self.step(self.p1, src, instr, dst, flushes)

    def rotation(self, t: PcsTransition, tid: str, start: str, first_flush=(P1,), y_window=(P1,)):
        """Honest receive of ``t`` from Proc1 state ``start`` (its gadget entry)."""
        m = t.message
        h1, h2 = f"h1_{tid}", f"h2_{tid}"
        p = ["p0"] + [f"p{k}_{m}" for k in range(1, 11)]
        self.proc1(start, SKIP, h1, first_flush)
        self.proc2(p[0], rd("x_wr", m), p[1])
        self.proc2(p[1], wr("x_rd", m), p[2], [P2])
        self.proc2(p[2], MF, p[3])
        self.proc2(p[3], wr("x_wr", BOT), p[4])
        self.proc2(p[4], rd("y", 0), p[5])
        self.proc1(h1, rd("x_rd", m), h2, [P2])
        self.proc2(p[5], MF, p[6], y_window)
        self.proc2(p[6], rd("y", 1), p[7])
        self.proc2(p[7], wr("y", 0), p[8])
        self.proc2(p[8], wr("x_rd", BOT), p[9], [P2, P2])
        self.proc2(p[9], MF, p[10])
        self.proc2(p[10], rd("x_wr", BOT), p[0])
        self.proc1(h2, rd("x_rd", BOT), t.target)

    def send(self, t: PcsTransition, tid: str, start: str):
        u = f"u_{tid}"
        self.proc1(start, wr("x_wr", t.message), u)
        self.proc1(u, wr("y", 1), t.target)

    def guard(self, t: PcsTransition, tid: str) -> str:
        writer = self.program.process(f"Proc_{tid}")
        q = f"q_{tid}"
        self.step(writer, q, wr("z", tid), q, [writer.name])
        g = f"g_{tid}"
        self.proc1(t.source, rd("z", tid), g)
        return g

    def gadget(self, t: PcsTransition, tid: str, fairness: str):
        start = self.guard(t, tid) if fairness == "process" else t.source
        if t.op == "send":
            self.send(t, tid, start)
        elif t.op == "recv":
            self.rotation(t, tid, start)
        else:
            self.proc1(start, SKIP, t.target)


def _program_for(l: Pcs, fairness: str) -> Program:
    if fairness == "update":
        return pcs_to_update_fairness_game(l)[0]
    if fairness == "process":
        return pcs_to_process_fairness_game(l)[0]
    raise PcsError(f"fairness must be update or process, not {fairness!r}")


def script_from_pcs_run(l: Pcs, run: Sequence[str], fairness: str = "update",
                        program: Program | None = None) -> list:
    """The honest alternating play script simulating ``run`` (a list of transition ids)."""
    pcs_run(l, run)
    b = _Builder(program or _program_for(l, fairness))
    for tid in run:
        b.gadget(l.transition(tid), tid, fairness)
    return b.moves


@dataclass
class CheatScript:
    moves: list
    audit_index: int  # play position at which the punishing move is enabled
    kind: str


def cheat_script(l: Pcs, run: Sequence[str], kind: str, fairness: str | None = None) -> CheatScript:
    """Honest play of ``run`` up to the first point where the cheat ``kind`` applies, then the cheat.

    ``double-flush`` and ``y-window`` (update fairness) need a receive with
    at least two messages in the channel; the script ends with Proc2 taking
    the enabled branch into ``qwin2``.  ``rotation`` (process fairness) needs
    a send into a non-final state; the update player then rotates the fresh
    message although Proc1 is not receiving, and the script ends with
    Proc1's escape to ``qF``.
    """
    if kind not in ("double-flush", "y-window", "rotation"):
        raise PcsError(f"unknown cheat {kind!r}")
    fairness = fairness or ("process" if kind == "rotation" else "update")
    b = _Builder(_program_for(l, fairness))
    configs = pcs_run(l, run)
    for k, tid in enumerate(run):
        t = l.transition(tid)
        if kind != "rotation" and t.op == "recv" and len(configs[k].channel) >= 2:
            second = configs[k].channel[-2]
            start = b.guard(t, tid) if fairness == "process" else t.source
            if kind == "double-flush":
                m = second
                p = ["p0"] + [f"p{j}_{m}" for j in range(1, 5)]
                b.proc1(start, SKIP, f"h1_{tid}", [P1, P1, P1])
                b.proc2(p[0], rd("x_wr", m), p[1])
                b.proc2(p[1], wr("x_rd", m), p[2], [P2])
                b.proc2(p[2], MF, p[3])
                b.proc2(p[3], wr("x_wr", BOT), p[4])
                audit = len(b.moves)
                b.moves.append(_pmove(b.p2, p[4], rd("y", 1), QWIN))
            else:
                m = t.message
                b.rotation(t, tid, start, y_window=(P1, P1))
                # drop the honest return to p0 and Proc1's exit; take the punishing branch instead
                del b.moves[-4:]
                audit = len(b.moves)
                b.moves.append(_pmove(b.p2, f"p10_{m}", rd("x_wr", second), QWIN))
            return CheatScript(b.moves, audit, kind)
        if kind == "rotation" and t.op == "send" and t.target not in l.final:
            start = b.guard(t, tid) if fairness == "process" else t.source
            b.send(t, tid, start)
            b.moves[-1] = UpdateMove((P1,) * (2 * len(configs[k].channel) + 1))
            m = t.message
            b.proc2("p0", rd("x_wr", m), f"p1_{m}")
            b.proc2(f"p1_{m}", wr("x_rd", m), f"p2_{m}", [P2])
            audit = len(b.moves)
            b.moves.append(_pmove(b.p1, t.target, rd("x_rd", m), QF))
            return CheatScript(b.moves, audit, kind)
        b.gadget(t, tid, fairness)
    raise PcsError(f"the run offers no opportunity for the {kind} cheat")


# ---------------------------------------------------------------- audits

def qwin2_moves(program: Program, c: Configuration) -> list[Transition]:
    return [t for name, t in enabled_moves(program, c) if name == P2 and t.target == QWIN]


def escape_moves(program: Program, c: Configuration) -> list[Transition]:
    return [t for name, t in enabled_moves(program, c) if name == P1 and t.target == QF and t.source != QF]


@dataclass
class PcsAudit:
    embedded: list[str]  # successive PCS states visited by Proc1
    rotations: list[str]  # messages Proc2 picked up, in order
    qwin2_enabled_at: list[int]
    escape_enabled_at: list[int]


def audit_pcs_play(l: Pcs, play: Play) -> PcsAudit:
    pcs_states = set(l.states)
    i1 = play.program.process_index(P1)
    embedded = [play.configs[0].states[i1]]
    for c in play.configs[1:]:
        q = c.states[i1]
        if q in pcs_states and q != embedded[-1]:
            embedded.append(q)
    rotations = [m.transition.instr.value for m in play.moves
                 if isinstance(m, ProcessMove) and m.process == P2 and m.transition.source == "p0"]
    qwin = [k for k, (c, turn) in enumerate(zip(play.configs, play.turns))
            if turn == "process" and qwin2_moves(play.program, c)]
    esc = [k for k, (c, turn) in enumerate(zip(play.configs, play.turns))
           if turn == "process" and escape_moves(play.program, c)]
    return PcsAudit(embedded, rotations, qwin, esc)
