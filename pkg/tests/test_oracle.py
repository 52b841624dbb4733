from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from gradelic.formula import ExistsAtLeast, parse, parse_any
from gradelic.games import model_check
from gradelic.generators import random_lasso_finite_lts, random_lts, random_state_formula
from gradelic.oracle import (
    BreakpointCertificate,
    LassoPrefixes,
    OracleError,
    breakpoint_search,
    count_minimal_conservative,
    count_x_successors,
    ctlstar_reference_check,
    enumerative_check,
    eval_boolean,
    has_finitely_many_paths,
    infinite_paths,
    validate_certificate,
)
from gradelic.structures import make_lts
from gradelic.word_automata import alphabet, eval_weak

P, E = frozenset({"p"}), frozenset()


def star(labels):
    states = [("r", set())] + [(f"c{i}", lab) for i, lab in enumerate(labels)]
    edges = [("r", f"c{i}") for i in range(len(labels))] + [(f"c{i}", f"c{i}") for i in range(len(labels))]
    return make_lts(states, edges, "r", ["p"])


def p_loop():
    return make_lts([("a", {"p"})], [("a", "a")], "a", ["p"])


# ===== Successor counting =====


class TestCountSuccessors:
    def test_counts(self):
        s = star([{"p"}, {"p"}, set()])
        p = parse("p")
        assert count_x_successors(s, "r", p, 2)
        assert not count_x_successors(s, "r", p, 3)
        assert count_x_successors(s, "r", p, 0)

    def test_boolean_eval(self):
        assert eval_boolean(parse("p & !q"), P)
        with pytest.raises(OracleError):
            eval_boolean(parse("E X p"), P)


# ===== Exact path enumeration =====


class TestEnumerative:
    def test_single_loop_has_one_path(self):
        s = p_loop()
        assert enumerative_check(s, "a", parse("E>=1 F p"))
        assert not enumerative_check(s, "a", parse("E>=2 F p"))
        assert model_check(s, "a", parse("E>=1 F p"))
        assert not model_check(s, "a", parse("E>=2 F p"))

    def test_minimal_paths_are_counted_once(self):
        # both sons satisfy p immediately; the minimal conservative paths are r c0 and r c1
        s = star([{"p"}, {"p"}])
        assert count_minimal_conservative(s, "r", parse_any("X p")) == 2
        assert count_minimal_conservative(s, "r", parse_any("F p")) == 2
        assert count_minimal_conservative(star([{"p"}, set()]), "r", parse_any("X p")) == 1

    def test_infinite_paths(self):
        s = star([{"p"}, set(), set()])
        assert has_finitely_many_paths(s, "r")
        assert len(infinite_paths(s, "r")) == 3
        loop2 = make_lts([("a", set())], [("a", "a")], "a")
        assert len(infinite_paths(loop2, "a")) == 1

    def test_branching_cycle_rejected(self):
        s = make_lts([("a", set()), ("b", set())], [("a", "a"), ("a", "b"), ("b", "a")], "a")
        assert not has_finitely_many_paths(s, "a")
        with pytest.raises(OracleError):
            infinite_paths(s, "a")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_agrees_with_ctlstar_on_grade_one(self, seed):
        rng = random.Random(seed)
        s = random_lasso_finite_lts(rng, ("p", "q"), rng.randint(1, 5), 3)
        f = random_state_formula(rng, ("p", "q"), max_length=8, max_grade=1)
        assert enumerative_check(s, s.initial, f) == ctlstar_reference_check(s, s.initial, f)


# ===== CTL* reference =====


class TestCtlStar:
    def test_examples(self):
        s = star([{"p"}, set()])
        assert ctlstar_reference_check(s, "r", parse("E X p"))
        assert not ctlstar_reference_check(s, "r", parse("A X p"))
        assert ctlstar_reference_check(s, "r", parse("E G F p"))

    def test_rejects_grades(self):
        with pytest.raises(OracleError):
            ctlstar_reference_check(star([{"p"}]), "r", parse("E>=2 X p"))


# ===== Prefix truth on lassos =====


class TestLassoPrefixes:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_matches_direct_evaluation(self, seed):
        rng = random.Random(seed)
        letters = alphabet(["p", "q"])
        psi = parse_any(rng.choice(["p U q", "X X p", "G p", "F q", "p R q", "X (p U X q)", "!(F p)"]))
        stem = [rng.choice(letters) for _ in range(rng.randint(0, 2))]
        loop = [rng.choice(letters) for _ in range(rng.randint(1, 3))]
        lp = LassoPrefixes(psi, stem, loop)
        word = (stem + loop * 20)[: lp.horizon + 5]
        for m in range(1, len(word) + 1):
            assert lp.prefix(m) == eval_weak(psi, word[:m]), m
        for m in range(1, 6):
            assert lp.all_from(m) == all(lp.prefix(i) for i in range(m, len(word) + 1))

    def test_globally_never_holds_on_prefixes(self):
        lp = LassoPrefixes(parse_any("G p"), [], [P])
        assert lp.infinite and not any(lp.prefix(m) for m in range(1, 10))


# ===== Breakpoint certificates =====


class TestBreakpoint:
    def test_two_sons_confirmed(self):
        s = star([{"p"}, {"p"}])
        res = breakpoint_search(s, "r", parse_any("X p"), 2, depth=3, lasso_bound=2)
        assert res.confirmed and str(res) == "confirmed"
        assert validate_certificate(s, "r", parse_any("X p"), res.certificate)

    def test_one_son_unknown(self):
        s = star([{"p"}, set()])
        assert not breakpoint_search(s, "r", parse_any("X p"), 2, depth=3, lasso_bound=2).confirmed

    def test_grade_zero_trivial(self):
        assert breakpoint_search(p_loop(), "a", parse_any("p"), 0, 1, 1).confirmed

    def test_tampered_certificate_rejected(self):
        s = star([{"p"}, {"p"}])
        cert = breakpoint_search(s, "r", parse_any("X p"), 2, depth=3, lasso_bound=2).certificate
        same = BreakpointCertificate([cert.nodes[0]] * 2, [cert.through[0]] * 2, [cert.refutations[0]] * 2)
        assert not validate_certificate(s, "r", parse_any("X p"), same)
        wrong_psi = parse_any("X !p")
        assert not validate_certificate(s, "r", wrong_psi, cert)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_confirmed_implies_model_check(self, seed):
        rng = random.Random(seed)
        s = random_lts(rng, ("p", "q"), rng.randint(1, 4), 3)
        psi = parse_any(rng.choice(["F p", "X p", "p U q", "X (q | X p)", "G F p"]))
        g = rng.randint(1, 3)
        res = breakpoint_search(s, s.initial, psi, g, depth=3, lasso_bound=2)
        if res.confirmed:
            assert validate_certificate(s, s.initial, psi, res.certificate)
            assert model_check(s, s.initial, ExistsAtLeast(g, psi))


def test_random_lasso_finite_lts_qualifies():
    rng = random.Random(3)
    for _ in range(20):
        s = random_lasso_finite_lts(rng, ("p",), 4, 3)
        assert has_finitely_many_paths(s, s.initial)
    assert list(itertools.islice(infinite_paths(s, s.initial), 1))
