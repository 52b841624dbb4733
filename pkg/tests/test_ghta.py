from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from gradelic.compiler import compile_formula
from gradelic.formula import parse
from gradelic.games import AUTOMATON, build_membership_game, solve_parity
from gradelic.generators import random_lts, random_state_formula
from gradelic.ghta import (
    EXIST,
    PB_FALSE,
    PB_TRUE,
    TRANS,
    UNIV,
    Box,
    Diamond,
    Move,
    PAnd,
    POr,
    dual,
    dualize,
    expand,
    make_ghta,
    map_states,
    models,
    occurring_states,
    pand,
    por,
    satisfies,
    transitive_closure,
    validate_hesitancy,
)

m1, m2, m3 = Move(1, 10), Move(2, 11), Move(1, 12)


# ===== Positive Boolean formulas =====


class TestPositiveBoolean:
    def test_constant_rules(self):
        assert por(m1, PB_TRUE) == PB_TRUE
        assert pand(m1, PB_FALSE) == PB_FALSE
        assert por() == PB_FALSE and pand() == PB_TRUE
        assert por(m1) == m1

    def test_flatten_and_dedupe(self):
        f = por(m1, por(m2, m1))
        assert isinstance(f, POr) and f.items == (m1, m2)

    def test_dual_is_involution(self):
        f = por(pand(m1, m2), Diamond((10, 11)), m3)
        assert dual(dual(f)) == f
        assert isinstance(dual(f), PAnd)

    def test_models_and_satisfies(self):
        f = por(pand(m1, m2), m3)
        ms = models(f)
        assert frozenset({m3}) in ms and frozenset({m1, m2}) in ms
        assert satisfies(f, {m3})
        assert not satisfies(f, {m1})

    def test_map_states(self):
        assert map_states(pand(m1, Diamond((10,))), lambda q: q + 1) == PAnd((Move(1, 11), Diamond((11,))))

    def test_occurring_states(self):
        assert occurring_states(por(m1, Box((5, 6)))) == {10, 5, 6}


class TestExpand:
    def test_diamond_degree_two(self):
        f = expand(Diamond((10, 11)), 2)
        assert set(map(frozenset, models(f))) == {
            frozenset({Move(1, 10), Move(2, 11)}),
            frozenset({Move(2, 10), Move(1, 11)}),
        }

    def test_diamond_too_wide_is_false(self):
        assert expand(Diamond((1, 2, 3)), 2) == PB_FALSE
        assert expand(Box((1, 2, 3)), 2) == PB_TRUE

    def test_box_is_dual_of_diamond(self):
        for d in (1, 2, 3):
            assert expand(Box((1, 2)), d) == dual(expand(Diamond((1, 2)), d))

    def test_degree_must_be_positive(self):
        with pytest.raises(ValueError):
            expand(m1, 0)


# ===== Automata =====


def tiny_automaton():
    """q0 (transient) launches q1 (universal, nothing rejecting) in every direction: A X G p."""
    table = {}
    for letter in (frozenset(), frozenset({"p"})):
        table[(0, letter)] = Box((1,))
        table[(1, letter)] = Box((1,)) if "p" in letter else PB_FALSE
    return make_ghta(
        ["p"],
        0,
        table,
        block_of={0: 0, 1: 1},
        kinds={0: TRANS, 1: UNIV},
        below={0: [1]},
    )


class TestGhta:
    def test_order_closure(self):
        closed = transitive_closure({0: [1], 1: [2], 2: []}, {0: TRANS, 1: EXIST, 2: UNIV})
        assert closed[0] == {1, 2}

    def test_order_cycle_rejected(self):
        with pytest.raises(ValueError, match="cycle"):
            transitive_closure({0: [1], 1: [0]}, {0: TRANS, 1: TRANS})

    def test_hand_built_accepts(self):
        from gradelic.structures import make_lts

        a = tiny_automaton()
        all_p = make_lts([("r", set()), ("x", {"p"})], [("r", "x"), ("x", "x")], "r")
        some_not = make_lts([("r", set()), ("x", set())], [("r", "x"), ("x", "x")], "r")
        for s, want in ((all_p, True), (some_not, False)):
            game = build_membership_game(a, s)
            assert (solve_parity(game).winner[game.initial] == AUTOMATON) == want

    def test_hesitancy_ok(self):
        assert validate_hesitancy(tiny_automaton(), 3).ok

    def test_hesitancy_violation_detected(self):
        table = {(0, frozenset()): pand(Move(1, 1), Move(2, 1))}
        a = make_ghta([], 0, table, block_of={0: 0, 1: 0}, kinds={0: EXIST})
        rep = validate_hesitancy(a, 2)
        assert not rep.ok
        assert any(v.startswith("(iii)") for v in rep.violations)

    def test_order_violation_detected(self):
        table = {(0, frozenset()): Move(1, 1)}
        a = make_ghta([], 0, table, block_of={0: 0, 1: 1}, kinds={0: EXIST, 1: EXIST}, below={1: [0]})
        assert any(v.startswith("(i)") for v in validate_hesitancy(a, 1).violations)

    def test_dumps(self):
        a = compile_formula(parse("E X p"))
        data = a.to_json()
        assert data["initial"] == a.initial and len(data["states"]) == len(a.states)
        assert a.to_dot().startswith("digraph")


class TestDualize:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_dual_automaton_complements(self, seed):
        rng = random.Random(seed)
        f = random_state_formula(rng, max_length=8, max_grade=2)
        s = random_lts(rng, n=3)
        a = compile_formula(f, ("p", "q"))
        b = dualize(a)
        ga, gb = build_membership_game(a, s), build_membership_game(b, s)
        wa = solve_parity(ga).winner[ga.initial] == AUTOMATON
        wb = solve_parity(gb).winner[gb.initial] == AUTOMATON
        assert wa != wb
