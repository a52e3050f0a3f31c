"""Concurrent programs over read/write/skip/fence instructions.

A program is a tuple of finite-state processes sharing a set of variables
over a finite value domain.  This module holds the immutable domain types,
the line-oriented text format (parser and serializer), projection onto a
single process, and the sanity checks a game input has to pass.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

__all__ = [
    "Instruction",
    "Transition",
    "Process",
    "Program",
    "Objective",
    "Violation",
    "ProgramError",
    "ParseError",
    "SKIP",
    "MF",
    "rd",
    "wr",
    "parse_program",
    "serialize_program",
    "project",
    "validate_for_game",
]

REACH = "reach"
SAFE = "safe"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_VALUE = re.compile(r"[A-Za-z0-9_]+\Z")
_INSTR = re.compile(r"(rd|wr)\(([A-Za-z_][A-Za-z0-9_]*),([A-Za-z0-9_]+)\)\Z")


class ProgramError(ValueError):
    """A structurally invalid program or objective."""


class ParseError(ProgramError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.message = message


@dataclass(frozen=True, order=True)
class Instruction:
    kind: str  # "rd" | "wr" | "skip" | "mf"
    var: str | None = None
    value: str | None = None

    def __post_init__(self):
        if self.kind in ("rd", "wr"):
            if self.var is None or self.value is None:
                raise ProgramError(f"{self.kind} needs a variable and a value")
        elif self.kind in ("skip", "mf"):
            if self.var is not None or self.value is not None:
                raise ProgramError(f"{self.kind} takes no operands")
        else:
            raise ProgramError(f"unknown instruction kind {self.kind!r}")

    @classmethod
    def parse(cls, token: str) -> Instruction:
        if token in ("skip", "mf"):
            return cls(token)
        m = _INSTR.match(token)
        if not m:
            raise ProgramError(f"malformed instruction {token!r}")
        return cls(m.group(1), m.group(2), m.group(3))

    def __str__(self) -> str:
        if self.var is None:
            return self.kind
        return f"{self.kind}({self.var},{self.value})"


SKIP = Instruction("skip")
MF = Instruction("mf")


def rd(var: str, value) -> Instruction:
    return Instruction("rd", var, str(value))


def wr(var: str, value) -> Instruction:
    return Instruction("wr", var, str(value))


class Transition(NamedTuple):
    source: str
    instr: Instruction
    target: str

    def __str__(self) -> str:
        return f"{self.source} {self.target} {self.instr}"


@dataclass(frozen=True)
class Process:
    """A finite labelled transition system over instructions.

    ``states`` lists the initial state first, then every other state in order
    of first appearance among the transitions.
    """

    name: str
    initial: str
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(Transition(*t) for t in self.transitions))
        if len(set(self.transitions)) != len(self.transitions):
            raise ProgramError(f"process {self.name}: duplicate transition")

    @cached_property
    def states(self) -> tuple[str, ...]:
        seen = dict.fromkeys([self.initial])
        for t in self.transitions:
            seen.setdefault(t.source)
            seen.setdefault(t.target)
        return tuple(seen)

    @cached_property
    def _outgoing(self) -> dict[str, tuple[Transition, ...]]:
        out: dict[str, list[Transition]] = {q: [] for q in self.states}
        for t in self.transitions:
            out[t.source].append(t)
        return {q: tuple(ts) for q, ts in out.items()}

    def outgoing(self, state: str) -> tuple[Transition, ...]:
        return self._outgoing.get(state, ())


@dataclass(frozen=True)
class Program:
    """A concurrent program.

    ``init`` is aligned with ``variables``: ``init[i]`` is the initial memory
    value of ``variables[i]``.  Use :meth:`create` to build one from a mapping.
    """

    values: tuple[str, ...]
    variables: tuple[str, ...]
    init: tuple[str, ...]
    processes: tuple[Process, ...]

    def __post_init__(self):
        for name in ("values", "variables", "init", "processes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self._check()

    @classmethod
    def create(cls, values: Iterable, variables: Iterable[str], init: Mapping[str, object],
               processes: Iterable[Process]) -> Program:
        variables = tuple(variables)
        missing = [x for x in variables if x not in init]
        if missing:
            raise ProgramError(f"missing init for variable {missing[0]}")
        extra = [x for x in init if x not in variables]
        if extra:
            raise ProgramError(f"init of undeclared variable {extra[0]}")
        return cls(tuple(str(v) for v in values), variables,
                   tuple(str(init[x]) for x in variables), tuple(processes))

    def _check(self):
        if not self.values:
            raise ProgramError("the value domain must not be empty")
        for kind, names in (("value", self.values), ("variable", self.variables),
                            ("process", [p.name for p in self.processes])):
            dup = _first_duplicate(names)
            if dup is not None:
                raise ProgramError(f"duplicate {kind} {dup}")
        if len(self.init) != len(self.variables):
            raise ProgramError("init must assign every variable exactly once")
        domain = set(self.values)
        for x, v in zip(self.variables, self.init):
            if v not in domain:
                raise ProgramError(f"undeclared value {v} in init of {x}")
        variables = set(self.variables)
        for p in self.processes:
            for t in p.transitions:
                i = t.instr
                if i.var is not None and i.var not in variables:
                    raise ProgramError(f"undeclared variable {i.var} in process {p.name}")
                if i.value is not None and i.value not in domain:
                    raise ProgramError(f"undeclared value {i.value} in process {p.name}")

    @cached_property
    def _proc_index(self) -> dict[str, int]:
        return {p.name: i for i, p in enumerate(self.processes)}

    @cached_property
    def _var_index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.variables)}

    def process_index(self, name: str) -> int:
        try:
            return self._proc_index[name]
        except KeyError:
            raise ProgramError(f"unknown process {name}") from None

    def process(self, name: str) -> Process:
        return self.processes[self.process_index(name)]

    def var_index(self, var: str) -> int:
        return self._var_index[var]

    @property
    def process_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.processes)

    @property
    def initial_memory(self) -> dict[str, str]:
        return dict(zip(self.variables, self.init))


@dataclass(frozen=True)
class Objective:
    mode: str
    targets: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.mode not in (REACH, SAFE):
            raise ProgramError(f"objective mode must be reach or safe, not {self.mode!r}")
        object.__setattr__(self, "targets", frozenset(tuple(t) for t in self.targets))

    def restrict(self, process: str) -> Objective:
        return Objective(self.mode, frozenset(t for t in self.targets if t[0] == process))

    def states_of(self, process: str) -> frozenset[str]:
        return frozenset(q for p, q in self.targets if p == process)

    def check(self, program: Program) -> None:
        for p, q in sorted(self.targets):
            if p not in program.process_names:
                raise ProgramError(f"objective names unknown process {p}")
            if q not in program.process(p).states:
                raise ProgramError(f"objective names unknown state {p}.{q}")

    def __str__(self) -> str:
        return " ".join([self.mode] + [f"{p}.{q}" for p, q in sorted(self.targets)])


class Violation(NamedTuple):
    level: str  # "error" | "warning"
    message: str


def _first_duplicate(names):
    seen = set()
    for n in names:
        if n in seen:
            return n
        seen.add(n)
    return None


# ---------------------------------------------------------------- text format

def _tokens(line: str):
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_objective(words: list[tuple[str, int]], lineno: int) -> Objective:
    """Parse ``reach|safe P.q ...`` (the tokens after the ``objective`` keyword)."""
    if not words or words[0][0] not in (REACH, SAFE):
        col = words[0][1] if words else None
        raise ParseError("objective must start with reach or safe", lineno, col)
    targets = []
    for tok, col in words[1:]:
        parts = tok.split(".")
        if len(parts) != 2 or not all(_IDENT.match(s) for s in parts):
            raise ParseError(f"malformed target {tok!r}, expected PROCESS.STATE", lineno, col)
        targets.append(tuple(parts))
    return Objective(words[0][0], frozenset(targets))


def parse_targets(text: str) -> frozenset:
    """Parse a comma separated ``P.q,P.r`` list."""
    out = []
    for tok in filter(None, (s.strip() for s in text.split(","))):
        parts = tok.split(".")
        if len(parts) != 2 or not all(_IDENT.match(s) for s in parts):
            raise ParseError(f"malformed target {tok!r}, expected PROCESS.STATE")
        out.append(tuple(parts))
    return frozenset(out)


def parse_program(text: str) -> tuple[Program, Objective | None]:
    """Parse the program text format; returns the program and the optional objective."""
    values = variables = None
    init: dict[str, tuple[str, int, int]] | None = None
    procs: list[dict] = []
    objective = None
    objective_at = None
    seen_sections: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = _tokens(raw.split("#", 1)[0])
        if not words:
            continue
        head, col = words[0]
        if head in ("values", "vars", "init", "objective"):
            if head in seen_sections:
                raise ParseError(f"duplicate {head} section", lineno, col)
            seen_sections.add(head)
        if head == "values":
            if len(words) < 2:
                raise ParseError("values needs at least one value", lineno, col)
            for tok, c in words[1:]:
                if not _VALUE.match(tok):
                    raise ParseError(f"bad value name {tok!r}", lineno, c)
            values = [(tok, lineno, c) for tok, c in words[1:]]
        elif head == "vars":
            for tok, c in words[1:]:
                if not _IDENT.match(tok):
                    raise ParseError(f"bad variable name {tok!r}", lineno, c)
            variables = [(tok, lineno, c) for tok, c in words[1:]]
        elif head == "init":
            init = {}
            for tok, c in words[1:]:
                var, eq, val = tok.partition("=")
                if not eq or not _IDENT.match(var) or not _VALUE.match(val):
                    raise ParseError(f"malformed assignment {tok!r}, expected VAR=VALUE", lineno, c)
                if var in init:
                    raise ParseError(f"variable {var} initialised twice", lineno, c)
                init[var] = (val, lineno, c)
        elif head == "process":
            if len(words) != 4 or words[2][0] != "init":
                raise ParseError("expected: process NAME init STATE", lineno, col)
            name, state = words[1], words[3]
            for tok, c in (name, state):
                if not _IDENT.match(tok):
                    raise ParseError(f"bad identifier {tok!r}", lineno, c)
            if any(p["name"] == name[0] for p in procs):
                raise ParseError(f"duplicate process {name[0]}", lineno, name[1])
            procs.append({"name": name[0], "initial": state[0], "transitions": [], "line": lineno})
        elif head == "objective":
            objective = parse_objective(words[1:], lineno)
            objective_at = lineno
        else:
            if not procs:
                raise ParseError(f"unexpected token {head!r}", lineno, col)
            if len(words) != 3:
                raise ParseError("expected a transition: FROM TO INSTR", lineno, col)
            (src, c1), (dst, c2), (ins, c3) = words
            for tok, c in ((src, c1), (dst, c2)):
                if not _IDENT.match(tok):
                    raise ParseError(f"bad state name {tok!r}", lineno, c)
            try:
                instr = Instruction.parse(ins)
            except ProgramError as exc:
                raise ParseError(str(exc), lineno, c3) from None
            procs[-1]["transitions"].append((Transition(src, instr, dst), lineno, c3))

    if values is None:
        raise ParseError("missing values section")
    variables = variables or []
    init = init if init is not None else {}
    domain = {v for v, _, _ in values}
    declared = {x for x, _, _ in variables}
    for kind, items in (("value", values), ("variable", variables)):
        names = [n for n, _, _ in items]
        dup = _first_duplicate(names)
        if dup is not None:
            _, ln, c = [it for it in items if it[0] == dup][1]
            raise ParseError(f"duplicate {kind} {dup}", ln, c)
    for var, (val, ln, c) in init.items():
        if var not in declared:
            raise ParseError(f"undeclared variable {var}", ln, c)
        if val not in domain:
            raise ParseError(f"undeclared value {val}", ln, c)
    for var, ln, c in variables:
        if var not in init:
            raise ParseError(f"missing init for variable {var}", ln, c)

    processes = []
    for p in procs:
        seen = set()
        for t, ln, c in p["transitions"]:
            i = t.instr
            if i.var is not None and i.var not in declared:
                raise ParseError(f"undeclared variable {i.var}", ln, c)
            if i.value is not None and i.value not in domain:
                raise ParseError(f"undeclared value {i.value}", ln, c)
            if t in seen:
                raise ParseError(f"duplicate transition {t}", ln, 1)
            seen.add(t)
        processes.append(Process(p["name"], p["initial"], [t for t, _, _ in p["transitions"]]))

    program = Program.create([v for v, _, _ in values], [x for x, _, _ in variables],
                             {x: v for x, (v, _, _) in init.items()}, processes)
    if objective is not None:
        try:
            objective.check(program)
        except ProgramError as exc:
            raise ParseError(str(exc), objective_at) from None
    return program, objective


def serialize_program(program: Program, objective: Objective | None = None) -> str:
    lines = [
        " ".join(["values", *program.values]),
        " ".join(["vars", *program.variables]),
        " ".join(["init", *(f"{x}={v}" for x, v in zip(program.variables, program.init))]),
    ]
    for p in program.processes:
        lines.append(f"process {p.name} init {p.initial}")
        lines.extend(f"  {t}" for t in p.transitions)
    if objective is not None:
        lines.append(f"objective {objective}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- projection

def project(program: Program, process: str) -> Program:
    """The single-process program consisting of ``process`` alone."""
    proc = program.process(process)
    return Program(program.values, program.variables, program.init, (proc,))


def validate_for_game(program: Program, objective: Objective) -> list[Violation]:
    """Report game-input problems without raising.

    An error when the initial global state already lies in the objective's
    configuration set; in reach mode, a warning for every target state with
    no outgoing skip or write (those two are enabled in every configuration,
    so their presence rules out a deadlock after the target is reached).
    """
    out = []
    for p in program.processes:
        if (p.name, p.initial) in objective.targets:
            out.append(Violation("error", f"initial configuration in C_W: {p.name}.{p.initial} is a target"))
    if objective.mode == REACH:
        for pname, q in sorted(objective.targets):
            if pname not in program.process_names:
                continue
            ts = program.process(pname).outgoing(q)
            if not any(t.instr.kind in ("skip", "wr") for t in ts):
                out.append(Violation("warning", f"target may deadlock: {pname}.{q} has no outgoing skip or write"))
    return out
