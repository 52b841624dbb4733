from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from gradelic.formula import parse_any
from gradelic.suites import run_word_automata
from gradelic.word_automata import (
    D_FALSE,
    D_TRUE,
    afw_to_nfw,
    alphabet,
    build_afw_weak,
    build_nbw,
    build_prefix_closure_nbw,
    complete,
    d_and,
    d_or,
    d_var,
    eval_lasso,
    eval_weak,
    nnf,
)

P, Q, PQ, E = frozenset({"p"}), frozenset({"q"}), frozenset({"p", "q"}), frozenset()


# ===== DNF helpers =====


class TestDnf:
    def test_constants(self):
        assert d_and(D_TRUE, d_var(1)) == d_var(1)
        assert d_and(D_FALSE, d_var(1)) == D_FALSE
        assert d_or(D_FALSE, d_var(1)) == d_var(1)

    def test_absorption(self):
        assert d_or(d_var(1), d_and(d_var(1), d_var(2))) == d_var(1)

    def test_alphabet_order(self):
        assert alphabet(["q", "p"]) == (E, P, Q, PQ)


# ===== Direct evaluators =====


class TestWeakSemantics:
    def test_next_needs_successor(self):
        assert not eval_weak(parse_any("X p"), [P])
        assert eval_weak(parse_any("X p"), [E, P])

    def test_globally_fails_on_finite_words(self):
        g = parse_any("G p")
        assert not any(eval_weak(g, [P] * n) for n in range(1, 6))

    def test_release_needs_releasing_position(self):
        assert not eval_weak(parse_any("p R q"), [Q])
        assert eval_weak(parse_any("p R q"), [Q, PQ])

    def test_until(self):
        assert eval_weak(parse_any("p U q"), [P, P, Q])
        assert not eval_weak(parse_any("p U q"), [P, P])

    def test_lasso(self):
        assert eval_lasso(parse_any("G F p"), [], [E, P])
        assert not eval_lasso(parse_any("F G p"), [], [E, P])
        assert eval_lasso(parse_any("G p"), [], [P])


# ===== Automata =====


class TestAutomataExamples:
    def test_afw_rejects_empty_and_globally(self):
        a = build_afw_weak(parse_any("G p"), ["p"])
        n = afw_to_nfw(a)
        assert not n.accepts([])
        assert not n.accepts([P, P, P])

    def test_nbw_globally(self):
        b = build_nbw(parse_any("G p"), ["p"])
        assert b.accepts_lasso([], [P])
        assert not b.accepts_lasso([P], [E])

    def test_prefix_closure(self):
        pc = build_prefix_closure_nbw(parse_any("F q"), ["p", "q"])
        assert pc.accepts_lasso([Q], [E])
        assert not pc.accepts_lasso([], [P])
        assert pc.sink is not None
        pc = build_prefix_closure_nbw(parse_any("G p"), ["p"])
        assert pc.accepts_lasso([], [P])
        # no finite word satisfies G p, so the accepting sink is trimmed away
        assert pc.sink is None

    def test_complete_adds_dead_state(self):
        b = complete(build_nbw(parse_any("X p"), ["p"]))
        assert b.dead is not None
        for q in b.states:
            for a in b.alphabet:
                assert b.successors(q, a)

    def test_nnf_has_no_inner_negation(self):
        f = nnf(parse_any("!(p U X !q)"))
        text = str(f)
        assert "!(" not in text and "!X" not in text

    def test_dumps(self):
        b = build_nbw(parse_any("p U q"), ["p", "q"])
        assert b.to_json()["initial"] == b.initial
        assert "digraph" in b.to_dot()


class TestExhaustive:
    def test_small_corpus_agreement(self):
        for rep in run_word_automata(("p U q", "G p", "!(X p)"), max_word=4, max_stem=2, max_loop=2):
            assert rep.ok, rep


def _random_ltl(rng: random.Random, size: int):
    if size <= 1:
        return rng.choice(["p", "q", "true", "false"])
    op = rng.choice(["!", "X", "U", "R", "|", "&"])
    if op in "!X" or size < 3:
        return f"{op if op in '!X' else '!'} ({_random_ltl(rng, size - 1)})"
    left = rng.randint(1, size - 2)
    return f"({_random_ltl(rng, left)}) {op} ({_random_ltl(rng, size - 1 - left)})"


class TestRandomFormulas:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_nbw_and_nfw_match_evaluators(self, seed):
        rng = random.Random(seed)
        f = parse_any(_random_ltl(rng, rng.randint(1, 6)))
        letters = alphabet(["p", "q"])
        nfw = afw_to_nfw(build_afw_weak(f, ["p", "q"]))
        nbw = build_nbw(f, ["p", "q"])
        for n in range(1, 4):
            for w in itertools.product(letters, repeat=n):
                assert nfw.accepts(w) == eval_weak(f, w)
        for sl in range(2):
            for ll in range(1, 3):
                for stem in itertools.product(letters, repeat=sl):
                    for loop in itertools.product(letters, repeat=ll):
                        assert nbw.accepts_lasso(stem, loop) == eval_lasso(f, stem, loop)


@pytest.mark.parametrize("text", ["p R q", "X X p", "p U q"])
def test_weakly_satisfiable_on_some_short_word(text):
    f = parse_any(text)
    words = (w for n in range(1, 4) for w in itertools.product(alphabet(["p", "q"]), repeat=n))
    assert any(eval_weak(f, w) for w in words)
