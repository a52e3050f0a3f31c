"""Prenex QBF formulas and their compilation into single-process TSO games."""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import count
from typing import Union

from ..program import SKIP, Objective, Process, Program, ProgramError, Transition, rd, wr

__all__ = ["Lit", "And", "Or", "QbfFormula", "QbfError", "parse_qbf", "eval_qbf", "qbf_to_program",
           "MAX_EVAL_VARS"]

MAX_EVAL_VARS = 20


class QbfError(ProgramError):
    pass


@dataclass(frozen=True)
class Lit:
    var: str
    positive: bool = True

    def __str__(self):
        return self.var if self.positive else f"!{self.var}"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"({self.left} | {self.right})"


Node = Union[Lit, And, Or]


@dataclass(frozen=True)
class QbfFormula:
    prefix: tuple[tuple[str, str], ...]  # (quantifier "E"|"A", variable)
    body: Node

    def __post_init__(self):
        names = [x for _, x in self.prefix]
        if len(set(names)) != len(names):
            raise QbfError("a variable is bound twice")
        for q, _ in self.prefix:
            if q not in ("E", "A"):
                raise QbfError(f"unknown quantifier {q!r}")
        free = _body_vars(self.body) - set(names)
        if free:
            raise QbfError(f"unbound variable {sorted(free)[0]}")

    def __str__(self):
        return " ".join(f"{q} {x}" for q, x in self.prefix) + f" : {self.body}"


def _body_vars(node: Node) -> set[str]:
    if isinstance(node, Lit):
        return {node.var}
    return _body_vars(node.left) | _body_vars(node.right)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(1) or m.group(2)
        out.append((tok, m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    return out


def parse_qbf(text: str) -> QbfFormula:
    """Parse ``E x A y : (x | !y)``.  ``&`` binds tighter than ``|``; ``!`` applies to variables only."""
    toks = _tokenize(text)
    k = 0

    def peek():
        return toks[k][0] if k < len(toks) else None

    def fail(msg):
        col = toks[k][1] + 1 if k < len(toks) else len(text.rstrip()) + 1
        raise QbfError(f"column {col}: {msg}")

    prefix = []
    while peek() in ("E", "A"):
        q = peek()
        k += 1
        var = peek()
        if var is None or not re.match(r"[A-Za-z_]", var):
            fail(f"expected a variable after {q}")
        prefix.append((q, var))
        k += 1
    if peek() != ":":
        fail("expected ':' after the quantifier prefix")
    k += 1

    def expr():
        nonlocal k
        node = term()
        while peek() == "|":
            k += 1
            node = Or(node, term())
        return node

    def term():
        nonlocal k
        node = atom()
        while peek() == "&":
            k += 1
            node = And(node, atom())
        return node

    def atom():
        nonlocal k
        tok = peek()
        if tok == "(":
            k += 1
            node = expr()
            if peek() != ")":
                fail("expected ')'")
            k += 1
            return node
        if tok == "!":
            k += 1
            if peek() == "(" or peek() == "!":
                fail("negation applies to variables only")
            var = peek()
            if var is None or not re.match(r"[A-Za-z_]", var):
                fail("expected a variable after '!'")
            k += 1
            return Lit(var, False)
        if tok is not None and re.match(r"[A-Za-z_]", tok):
            k += 1
            return Lit(tok)
        fail("expected a variable, '!' or '('")

    body = expr()
    if k != len(toks):
        fail(f"unexpected {peek()!r}")
    return QbfFormula(tuple(prefix), body)


# ---------------------------------------------------------------- evaluation

def _eval_body(node: Node, env: dict[str, bool]) -> bool:
    if isinstance(node, Lit):
        return env[node.var] == node.positive
    if isinstance(node, And):
        return _eval_body(node.left, env) and _eval_body(node.right, env)
    return _eval_body(node.left, env) or _eval_body(node.right, env)


def eval_qbf(f: QbfFormula) -> bool:
    """Brute-force truth value (at most ``MAX_EVAL_VARS`` quantified variables)."""
    if len(f.prefix) > MAX_EVAL_VARS:
        raise QbfError(f"eval_qbf supports at most {MAX_EVAL_VARS} variables")
    env: dict[str, bool] = {}

    def go(i: int) -> bool:
        if i == len(f.prefix):
            return _eval_body(f.body, env)
        q, x = f.prefix[i]
        results = []
        for b in (False, True):
            env[x] = b
            results.append(go(i + 1))
            # short-circuit
            if q == "E" and results[-1] or q == "A" and not results[-1]:
                break
        return results[-1]

    return go(0)


# ---------------------------------------------------------------- compilation

def qbf_to_program(f: QbfFormula, mode: str = "reach", process: str = "P") -> tuple[Program, Objective]:
    """Compile ``f`` into a one-process program whose game the process player wins iff ``f`` is true.

    Every quantifier and every body node becomes a gadget with an input and
    an output state.  The outer quantifier's output carries a skip self-loop;
    in reach mode it is the only target, in safe mode the target set is
    empty and the loop is the only way to play forever.
    """
    trans: list[Transition] = []
    fresh = count()

    def body(node: Node) -> tuple[str, str]:
        n = next(fresh)
        if isinstance(node, Lit):
            i, o = f"I_lit{n}", f"O_lit{n}"
            trans.append(Transition(i, rd(node.var, 1 if node.positive else 0), o))
            return i, o
        kind = "and" if isinstance(node, And) else "or"
        i, o = f"I_{kind}{n}", f"O_{kind}{n}"
        i1, o1 = body(node.left)
        i2, o2 = body(node.right)
        if kind == "or":
            trans.extend([Transition(i, SKIP, i1), Transition(i, SKIP, i2),
                          Transition(o1, SKIP, o), Transition(o2, SKIP, o)])
        else:
            trans.extend([Transition(i, SKIP, i1), Transition(o1, SKIP, i2), Transition(o2, SKIP, o)])
        return i, o

    def quant(k: int) -> tuple[str, str]:
        if k == len(f.prefix):
            return body(f.body)
        q, x = f.prefix[k]
        i, o = f"I_q{k + 1}", f"O_q{k + 1}"
        ni, no = quant(k + 1)
        if q == "E":
            trans.extend([Transition(i, wr(x, 0), ni), Transition(i, wr(x, 1), ni), Transition(no, SKIP, o)])
        else:
            w = f"W_q{k + 1}"
            trans.extend([Transition(i, wr(x, 0), ni), Transition(no, rd(x, 0), w),
                          Transition(w, wr(x, 1), ni), Transition(no, rd(x, 1), o)])
        return i, o

    start, out = quant(0)
    trans.append(Transition(out, SKIP, out))
    variables = [x for _, x in f.prefix]
    proc = Process(process, start, tuple(trans))
    program = Program.create(("0", "1"), variables, {x: "0" for x in variables}, [proc])
    targets = frozenset({(process, out)}) if mode == "reach" else frozenset()
    return program, Objective(mode, targets)
