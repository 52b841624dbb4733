from __future__ import annotations

import pytest

from gradelic.formula import parse
from gradelic.games import compiled, model_check
from gradelic.satisfiability import (
    BudgetExceeded,
    ThreadAutomaton,
    _canonical_shapes,
    budget_from_env,
    candidate_models,
    dealternate,
    default_degree,
    emptiness,
    sat,
    sat_bounded,
    sat_full,
)


# ===== Bounded search =====


class TestBounded:
    def test_canonical_shapes_are_connected(self):
        shapes = list(_canonical_shapes(3, 2))
        assert shapes and len(set(shapes)) == len(shapes)
        for shape in shapes:
            assert all(1 <= len(succ) <= 2 for succ in shape)

    def test_one_state_shape(self):
        assert list(_canonical_shapes(1, 3)) == [((0,),)]

    def test_candidates_smallest_first(self):
        sizes = [len(s.states) for s in candidate_models(["p"], 2, 2)]
        assert sizes == sorted(sizes) and sizes[0] == 1

    def test_graded_witness(self):
        v = sat_bounded(parse("E>=2 X p"), 3, 2)
        assert v.is_sat and model_check(v.witness, v.witness.initial, parse("E>=2 X p"))
        assert v.witness.degree(v.witness.initial) == 2

    def test_unsat_at_bound(self):
        v = sat_bounded(parse("E>=2 X p & !E>=1 X p"), 2, 2)
        assert v.outcome == "unsat-at-bound" and v.bounds["max_states"] == 2

    def test_cap(self):
        with pytest.raises(BudgetExceeded):
            sat_bounded(parse("p & !p"), 3, 2, cap=5)

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            sat_bounded(parse("p"), 0, 1)


# ===== Budget =====


class TestBudget:
    def test_env(self, monkeypatch):
        monkeypatch.setenv("GRADELIC_BUDGET", "123")
        assert budget_from_env() == 123
        monkeypatch.setenv("GRADELIC_BUDGET", "zero")
        with pytest.raises(ValueError):
            budget_from_env()
        monkeypatch.delenv("GRADELIC_BUDGET")
        assert budget_from_env(7) == 7

    def test_tiny_budget_falls_back(self):
        # the same budget caps the bounded search, so use a formula found among the first candidates
        v = sat(parse("p"), budget=3)
        assert v.method == "bounded" and v.is_sat
        assert any("full mode skipped" in n for n in v.notes)

    def test_full_mode_raises(self):
        with pytest.raises(BudgetExceeded):
            sat(parse("E X p & E X !p"), mode="full", budget=3)

    def test_large_automata_refused(self):
        with pytest.raises(BudgetExceeded, match="tiny-scale"):
            dealternate(compiled(parse("E>=2 X p")), 2)


# ===== Full emptiness =====


class TestFull:
    def test_atom(self):
        v = sat_full(parse("p"))
        assert v.is_sat and v.method == "full"
        assert "p" in v.witness.label(v.witness.initial)

    def test_contradiction(self):
        v = sat_full(parse("p & !p"))
        assert v.outcome == "unsat"

    def test_dealternation_emptiness(self):
        assert not emptiness(dealternate(compiled(parse("p")), 1)).empty
        assert emptiness(dealternate(compiled(parse("p & !p")), 1)).empty

    def test_bad_thread_automaton_starts_untracked(self):
        a = compiled(parse("E G p"))
        init = ThreadAutomaton(a).initial()
        assert all(n[0] == "t" for n in init)

    def test_two_sons_needed(self):
        v = sat_full(parse("E X p & E X !p"), 2)
        assert v.is_sat and v.witness.degree(v.witness.initial) == 2
        assert sat_full(parse("E X p & E X !p"), 1).outcome == "unsat-at-bound"

    def test_default_degree_is_capped(self):
        a = compiled(parse("E X p"))
        assert default_degree(a) == 2
        assert default_degree(a, cap=100) == min(100, len(a.states) ** 2)

    @pytest.mark.parametrize(
        "text",
        ["E X p", "A X p", "A G p", "E G F p", "E F p & A G !p", "A X p & E X !p", "A G (p | X !p)"],
    )
    def test_agrees_with_bounded(self, text):
        f = parse(text)
        full = sat_full(f, 2)
        bounded = sat_bounded(f, 2, 2)
        if bounded.is_sat:
            assert full.is_sat
        if full.is_sat:
            w = full.witness
            assert model_check(w, w.initial, f) and w.max_degree() <= 2
        else:
            assert not bounded.is_sat


class TestDriver:
    def test_modes(self):
        assert sat(parse("p"), mode="bounded").method == "bounded"
        assert sat(parse("p"), mode="full").method == "full"
        with pytest.raises(ValueError):
            sat(parse("p"), mode="nope")

    def test_summary(self):
        assert sat(parse("p & !p"), mode="full").summary().startswith("unsat via full")
