"""Example programs and seeded generators used by the tests and demos."""
from __future__ import annotations

import itertools
import random

from .arena import A, B, Arena
from .program import MF, SKIP, Instruction, Objective, Process, Program, Transition, parse_program, project, rd, wr
from .reductions.pcs import Pcs, PcsConfig, PcsTransition, pcs_step
from .reductions.qbf import And, Lit, Or, QbfFormula
from .tso import Configuration, Message

EX1 = """\
values 0 1
vars x
init x=0
process P init q0
  q0 q1 wr(x,1)
  q1 q2 rd(x,1)
  q2 q2 skip
objective reach P.q2
"""

EX2 = """\
values 0 1
vars x
init x=0
process P init q0
  q0 q1 wr(x,1)
  q1 q2 mf
  q2 q2 skip
objective reach P.q2
"""

# two branches: the fence branch loses to a stalling update player, the y-branch reads its own write
EX3 = """\
values 0 1 2
vars x y
init x=0 y=0
process P init a
  a b wr(x,1)
  a c wr(y,2)
  b d mf
  b a rd(y,0)
  c d rd(y,2)
  d d skip
objective reach P.d
"""

EXAMPLES = {"EX1": EX1, "EX2": EX2, "EX3": EX3}

CONCURRENT = {
    # EX1 as P1 next to an idle process
    "ex1_idle": """\
values 0 1
vars x
init x=0
process P1 init q0
  q0 q1 wr(x,1)
  q1 q2 rd(x,1)
  q2 q2 skip
process P2 init r0
  r0 r0 skip
objective reach P1.q2
""",
    # EX2 in both processes: the update player never flushes
    "ex2_twice": """\
values 0 1
vars x
init x=0
process P1 init q0
  q0 q1 wr(x,1)
  q1 q2 mf
  q2 q2 skip
process P2 init q0
  q0 q1 wr(x,1)
  q1 q2 mf
  q2 q2 skip
objective reach P1.q2 P2.q2
""",
    # store-buffering litmus shape
    "sb_litmus": """\
values 0 1
vars x y
init x=0 y=0
process P1 init a
  a b wr(x,1)
  b c rd(y,0)
  c c skip
process P2 init a
  a b wr(y,1)
  b c rd(x,0)
  c c skip
objective reach P1.c P2.c
""",
    # fenced store buffering: neither process gets past its fence
    "sb_fenced": """\
values 0 1
vars x y
init x=0 y=0
process P1 init a
  a b wr(x,1)
  b m mf
  m c rd(y,1)
  c c skip
process P2 init a
  a b wr(y,1)
  b m mf
  m c rd(x,1)
  c c skip
objective reach P1.c P2.c
""",
    # safety: P1 may loop forever, P2 is forced into its bad state
    "safe_loop": """\
values 0 1
vars x
init x=0
process P1 init s
  s t wr(x,1)
  t s rd(x,1)
process P2 init u
  u bad skip
  bad bad skip
objective safe P2.bad
""",
    # safety where every process deadlocks or runs into a bad state
    "safe_trapped": """\
values 0 1
vars x
init x=0
process P1 init s
  s t wr(x,1)
  t bad mf
  bad bad skip
process P2 init u
  u v rd(x,1)
objective safe P1.bad
""",
    # safety with no unsafe states: only deadlock can lose
    "safe_empty": """\
values 0 1
vars x
init x=0
process P1 init a
  a b rd(x,1)
process P2 init a
  a a wr(x,0)
objective safe
""",
    # three processes, the last one is the witness
    "third_wins": """\
values 0 1 2
vars x
init x=0
process P1 init a
  a b wr(x,1)
  b c mf
process P2 init a
  a b rd(x,2)
process P3 init a
  a b wr(x,2)
  b c rd(x,2)
  c c wr(x,0)
objective reach P1.c P2.b P3.c
""",
}


def example(name: str) -> tuple[Program, Objective]:
    text = EXAMPLES.get(name) or CONCURRENT[name]
    return parse_program(text)


# ---------------------------------------------------------------- random programs

def random_instruction(rng: random.Random, variables, values) -> Instruction:
    kinds = ["skip", "mf"] + (["rd", "wr", "rd", "wr"] if variables else [])
    kind = rng.choice(kinds)
    if kind in ("skip", "mf"):
        return SKIP if kind == "skip" else MF
    x, d = rng.choice(variables), rng.choice(values)
    return rd(x, d) if kind == "rd" else wr(x, d)


def random_process(rng: random.Random, name: str, variables, values, max_states: int = 4,
                   max_transitions: int = 6) -> Process:
    n = rng.randint(2, max_states)
    states = [f"q{k}" for k in range(n)]
    trans = {Transition("q0", random_instruction(rng, variables, values), rng.choice(states[1:]))}
    for _ in range(rng.randint(1, max_transitions - 1)):
        trans.add(Transition(rng.choice(states), random_instruction(rng, variables, values), rng.choice(states)))
    return Process(name, "q0", tuple(sorted(trans)))


def random_program(rng: random.Random, max_states: int = 4, n_vars: int | None = None,
                   n_values: int | None = None, processes: int = 1) -> tuple[Program, Objective]:
    """A random program and a random objective whose targets avoid the initial states."""
    n_vars = rng.randint(1, 2) if n_vars is None else n_vars
    n_values = rng.randint(1, 3) if n_values is None else n_values
    variables = ["x", "y"][:n_vars]
    values = [str(k) for k in range(n_values)]
    procs = [random_process(rng, f"P{k + 1}" if processes > 1 else "P", variables, values, max_states)
             for k in range(processes)]
    init = {x: rng.choice(values) for x in variables}
    program = Program.create(values, variables, init, procs)
    targets = set()
    for p in procs:
        options = [q for q in p.states if q != p.initial]
        targets.add((p.name, rng.choice(options)))
    mode = rng.choice(["reach", "safe"])
    return program, Objective(mode, frozenset(targets))


def random_single_programs(seed: int = 2024, count: int = 20) -> list[tuple[str, Program, Objective]]:
    rng = random.Random(seed)
    return [(f"rand{k}", *random_program(rng)) for k in range(count)]


def random_concurrent_programs(seed: int = 77, count: int = 12) -> list[tuple[str, Program, Objective]]:
    rng = random.Random(seed)
    return [(f"crand{k}", *random_program(rng, processes=rng.randint(2, 3))) for k in range(count)]


def concurrent_corpus() -> list[tuple[str, Program, Objective]]:
    named = [(name, *parse_program(text)) for name, text in CONCURRENT.items()]
    return named + random_concurrent_programs()


def single_process_corpus() -> list[tuple[str, Program, Objective]]:
    """EX1 to EX3, seeded random programs, and every projection of the concurrent corpus."""
    out = [(name, *parse_program(text)) for name, text in EXAMPLES.items()]
    out += random_single_programs()
    for name, program, objective in concurrent_corpus():
        for p in program.process_names:
            out.append((f"{name}/{p}", project(program, p), objective.restrict(p)))
    return out


# ---------------------------------------------------------------- equal-view pairs

def random_configuration(rng: random.Random, program: Program, max_len: int = 4) -> Configuration:
    p = program.processes[0]
    buf = tuple(Message(rng.choice(program.variables), rng.choice(program.values))
                for _ in range(rng.randint(0, max_len))) if program.variables else ()
    memory = tuple(rng.choice(program.values) for _ in program.variables)
    return Configuration((rng.choice(p.states),), (buf,), memory)


def equal_view_pair(rng: random.Random, program: Program, max_len: int = 4) -> tuple[Configuration, Configuration]:
    """Two independently drawn single-process configurations with the same view."""
    from .views import view_of

    c1 = random_configuration(rng, program, max_len)
    v = view_of(program, c1)
    variables = list(program.variables)
    if v.fence:
        return c1, Configuration(c1.states, ((),), v.readable)
    while True:
        buffered = [x for x in variables if rng.random() < 0.5]
        if buffered and len(buffered) <= max_len:
            break
    readable = dict(zip(variables, v.readable))
    older = [Message(rng.choice(buffered), rng.choice(program.values))
             for _ in range(rng.randint(0, max_len - len(buffered)))]
    newest = [Message(x, readable[x]) for x in rng.sample(buffered, len(buffered))]
    memory = tuple(rng.choice(program.values) if x in buffered else readable[x] for x in variables)
    c2 = Configuration(c1.states, (tuple(newest + older),), memory)
    assert view_of(program, c2) == v
    return c1, c2


# ---------------------------------------------------------------- arenas

def random_arena(rng: random.Random, n: int, density: float = 0.25, dead: float = 0.1) -> Arena:
    """A random alternating arena on ``n`` vertices named ``0..n-1``."""
    owners = [rng.choice((A, B)) for _ in range(n)]
    arena = Arena()
    for v in range(n):
        arena.add_vertex(v, owners[v], f"v{v}")
    for v in range(n):
        if rng.random() < dead:
            continue
        others = [w for w in range(n) if owners[w] != owners[v]]
        for w in others:
            if rng.random() < density:
                arena.add_edge(v, w)
    return arena


# ---------------------------------------------------------------- QBF

BODY_SHAPES = ("l", "l&l", "l|l", "l&(l|l)", "l|(l&l)")


def _shape(shape: str, lits):
    a, *rest = lits
    if shape == "l":
        return a
    if shape == "l&l":
        return And(a, rest[0])
    if shape == "l|l":
        return Or(a, rest[0])
    if shape == "l&(l|l)":
        return And(a, Or(rest[0], rest[1]))
    return Or(a, And(rest[0], rest[1]))


def exhaustive_qbf_suite() -> list[QbfFormula]:
    """Every prenex formula with one or two quantifiers over ``x``/``y`` and each body shape.

    Literals range over all signed bound variables; formulas with unused
    quantified variables are kept.
    """
    out = []
    for n in (1, 2):
        names = ["x", "y"][:n]
        lits = [Lit(v, s) for v in names for s in (True, False)]
        for quants in itertools.product("EA", repeat=n):
            prefix = tuple(zip(quants, names))
            for shape in BODY_SHAPES:
                arity = shape.count("l")
                for combo in itertools.product(lits, repeat=arity):
                    out.append(QbfFormula(prefix, _shape(shape, combo)))
    return out


def random_qbf(rng: random.Random, max_vars: int = 6, max_depth: int = 4) -> QbfFormula:
    n = rng.randint(1, max_vars)
    names = [f"x{k + 1}" for k in range(n)]
    prefix = tuple((rng.choice("EA"), x) for x in names)

    def gen(depth):
        if depth == 0 or rng.random() < 0.3:
            return Lit(rng.choice(names), rng.random() < 0.5)
        op = And if rng.random() < 0.5 else Or
        return op(gen(depth - 1), gen(depth - 1))

    return QbfFormula(prefix, gen(max_depth))


def random_qbf_suite(seed: int = 6, count: int = 200) -> list[QbfFormula]:
    rng = random.Random(seed)
    return [random_qbf(rng) for _ in range(count)]


# ---------------------------------------------------------------- PCS

def random_pcs(rng: random.Random, max_run: int = 12, messages=("a", "b"),
               extra_states: int = 2, extra_transitions: int = 4) -> tuple[Pcs, list[str]]:
    """A random PCS together with a legal run to its single final state.

    The run visits fresh states ``s0, s1, ...`` so the final state is
    reached only at its end; distracting transitions are added on top.
    """
    length = rng.randint(1, max_run)
    trans: list[PcsTransition] = []
    channel: tuple[str, ...] = ()
    for k in range(length):
        ops = ["send", "skip"] + (["recv", "recv"] if channel else [])
        op = rng.choice(ops)
        if op == "send":
            m = rng.choice(messages)
        elif op == "recv":
            m = channel[-1]
        else:
            m = None
        t = PcsTransition(f"s{k}", op, m, f"s{k + 1}")
        trans.append(t)
        channel = pcs_step_channel(channel, t)
    states = [f"s{k}" for k in range(length + 1)] + [f"t{k}" for k in range(extra_states)]
    sinks = states[length + 1:]
    for _ in range(extra_transitions if sinks else 0):
        op = rng.choice(["send", "recv", "skip"])
        src, dst = rng.choice(states), rng.choice(sinks)
        t = PcsTransition(src, op, None if op == "skip" else rng.choice(messages), dst)
        if t not in trans:
            trans.append(t)
    order = list(range(len(trans)))
    rng.shuffle(order)
    shuffled = [trans[k] for k in order]
    run = [f"e{order.index(k)}" for k in range(length)]
    pcs = Pcs(tuple(states), tuple(messages), tuple(shuffled), "s0", frozenset({f"s{length}"}))
    c = PcsConfig("s0")
    for tid in run:
        c = pcs_step(pcs, c, tid)
    return pcs, run


def pcs_step_channel(channel: tuple[str, ...], t: PcsTransition) -> tuple[str, ...]:
    if t.op == "send":
        return (t.message,) + channel
    if t.op == "recv":
        return channel[:-1]
    return channel


CHEAT_PCS = """\
states s0 s1 s2 s3 s4
messages a b
init s0
final s4
trans s0 s1 send a
trans s1 s2 send b
trans s2 s3 recv a
trans s3 s4 recv b
"""
