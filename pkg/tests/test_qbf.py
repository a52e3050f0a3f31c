import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsogames import corpus
from tsogames.program import SKIP, Transition, rd, wr
from tsogames.reductions.qbf import (
    MAX_EVAL_VARS,
    And,
    Lit,
    Or,
    QbfError,
    QbfFormula,
    eval_qbf,
    parse_qbf,
    qbf_to_program,
)
from tsogames.solver import decide


def _truth_table(f):
    """Reference evaluation: expand the quantifier prefix over the full assignment table."""
    names = [x for _, x in f.prefix]

    def body(env, node):
        if isinstance(node, Lit):
            return env[node.var] == node.positive
        l, r = body(env, node.left), body(env, node.right)
        return l and r if isinstance(node, And) else l or r

    rows = {bits: body(dict(zip(names, bits)), f.body) for bits in itertools.product((False, True), repeat=len(names))}
    for q, _ in reversed(f.prefix):
        combine = any if q == "E" else all
        rows = {k[:-1]: combine(rows[k[:-1] + (b,)] for b in (False, True)) for k in rows}
    return rows[()]


@pytest.mark.parametrize("text,value", [
    ("E x : x", True),
    ("A x : x", False),
    ("E x A y : (x | y)", True),
    ("A x E y : (x & y) | (!x & !y)", True),
    ("E y A x : (x & y) | (!x & !y)", False),
    (": ", None),
])
def test_eval_examples(text, value):
    if value is None:
        with pytest.raises(QbfError):
            parse_qbf(text)
        return
    assert eval_qbf(parse_qbf(text)) is value


def test_precedence():
    f = parse_qbf("E a E b E c : a | b & c")
    assert f.body == Or(Lit("a"), And(Lit("b"), Lit("c")))
    assert parse_qbf(str(f)) == f


@pytest.mark.parametrize("text,fragment", [
    ("E x : y", "unbound variable y"),
    ("E x E x : x", "bound twice"),
    ("E x : !(x)", "column 8: negation"),
    ("E x : x &", "column 10"),
    ("E : x", "expected a variable after E"),
    ("E x x", "expected ':'"),
    ("E x : (x | x", "expected ')'"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(QbfError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        parse_qbf(text)


def test_eval_limit():
    names = [f"v{k}" for k in range(MAX_EVAL_VARS + 1)]
    f = QbfFormula(tuple(("E", x) for x in names), Lit(names[0]))
    with pytest.raises(QbfError):
        eval_qbf(f)


@pytest.mark.parametrize("f", corpus.random_qbf_suite(seed=41, count=60), ids=str)
def test_eval_matches_truth_table(f):
    assert eval_qbf(f) == _truth_table(f)


def test_exists_x_gadget():
    program, objective = qbf_to_program(parse_qbf("E x : x"))
    (p,) = program.processes
    assert p.initial == "I_q1"
    assert set(p.transitions) == {
        Transition("I_q1", wr("x", 0), "I_lit0"),
        Transition("I_q1", wr("x", 1), "I_lit0"),
        Transition("I_lit0", rd("x", 1), "O_lit0"),
        Transition("O_lit0", SKIP, "O_q1"),
        Transition("O_q1", SKIP, "O_q1"),
    }
    assert objective.targets == {("P", "O_q1")}
    assert program.values == ("0", "1") and program.init == ("0",)


def test_forall_gadget_shape():
    program, _ = qbf_to_program(parse_qbf("A x : x"))
    (p,) = program.processes
    assert Transition("O_lit0", rd("x", 0), "W_q1") in p.transitions
    assert Transition("W_q1", wr("x", 1), "I_lit0") in p.transitions
    assert Transition("O_lit0", rd("x", 1), "O_q1") in p.transitions


def test_safe_mode_has_no_targets():
    _, objective = qbf_to_program(parse_qbf("E x : x"), "safe")
    assert objective.mode == "safe" and objective.targets == frozenset()


@pytest.mark.parametrize("seed", range(30))
def test_reduction_on_random_formulas(seed):
    f = corpus.random_qbf(random.Random(seed), max_vars=5)
    truth = eval_qbf(f)
    reach = decide(*qbf_to_program(f, "reach")).winner
    safe = decide(*qbf_to_program(f, "safe")).winner
    assert (reach == "process") == truth
    assert reach == safe


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_str_parse_round_trip(seed):
    f = corpus.random_qbf(random.Random(seed))
    assert parse_qbf(str(f)) == f


def test_exhaustive_suite_size():
    suite = corpus.exhaustive_qbf_suite()
    # per n quantifiers: 2^n prefixes, each shape with k leaves over 2n literals
    expected = sum(2 ** n * sum((2 * n) ** k for k in (1, 2, 2, 3, 3)) for n in (1, 2))
    assert len(suite) == expected == 708
    assert len(set(suite)) == len(suite)
