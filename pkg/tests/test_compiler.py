from __future__ import annotations

import itertools

import pytest

from gradelic.compiler import Distributor, _partitions, active, compile_formula, legal_distributions
from gradelic.formula import Atom, ExistsAtLeast, Next, parse
from gradelic.games import build_membership_game, model_check, solve_parity
from gradelic.ghta import occurring_states, validate_hesitancy
from gradelic.structures import make_lts


def reachable_states(a, start):
    seen = {start}
    todo = [start]
    while todo:
        q = todo.pop()
        for letter in a.letters:
            for t in occurring_states(a.rule(q, letter)):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
    return seen


def star(labels):
    """Root with one son per label, every son looping on itself."""
    states = [("r", set())] + [(f"c{i}", lab) for i, lab in enumerate(labels)]
    edges = [("r", f"c{i}") for i in range(len(labels))] + [(f"c{i}", f"c{i}") for i in range(len(labels))]
    return make_lts(states, edges, "r", ["p"])


# ===== Set partitions and legal distributions =====


class TestPartitions:
    @pytest.mark.parametrize("n,bell", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15)])
    def test_bell_numbers(self, n, bell):
        parts = _partitions(tuple(range(n)))
        assert len(parts) == bell
        for p in parts:
            assert sorted(x for b in p for x in b) == list(range(n))


def toy_distributor(g=2):
    # Psi side: states 0,1 (0 -> {0,1}, 1 -> {1}); !Psi side: 0 -> {0,2}, 2 is the sink -> {2}
    plus = {0: (0, 1), 1: (1,)}
    minus = {0: (0, 2), 2: (2,)}
    return Distributor(g, lambda s, a: plus[s], lambda s, a: minus[s], 2)


def brute_force_legal(q, g, plus, minus, sink):
    """Every set of distinct vectors satisfying the four conditions, by enumeration."""
    coords = active(q)
    space = []
    pools = [(None,) + tuple((plus if i < g else minus)[q[i]]) if i in coords else (None,) for i in range(2 * g)]
    for v in itertools.product(*pools):
        if any(x is not None for x in v):
            space.append(v)
    out = set()
    for k in range(1, len(coords) + 1):
        for combo in itertools.combinations(space, k):
            used = [i for v in combo for i in active(v)]
            if sorted(used) != sorted(coords):
                continue
            ok = True
            for v in combo:
                psi = [i for i in range(g) if v[i] is not None]
                if len(psi) >= 2 and any(v[i + g] is None or v[i + g] == sink for i in psi):
                    ok = False
            if ok:
                out.add(frozenset(combo))
    return out


class TestLegalDistributions:
    def test_matches_brute_force(self):
        plus = {0: (0, 1), 1: (1,)}
        minus = {0: (0, 2), 2: (2,)}
        d = toy_distributor()
        for q in [(0, 0, 0, 0), (0, None, 0, None), (1, 0, 2, 0), (None, None, 0, 2), (0, 1, None, 0)]:
            got = {frozenset(x) for x in d.legal(q, frozenset())}
            assert got == brute_force_legal(q, 2, plus, minus, 2), q

    def test_members_are_distinct_and_canonical(self):
        d = toy_distributor()
        for dist in d.legal((0, 0, 0, 0), frozenset()):
            assert len(set(dist)) == len(dist)
            assert list(dist) == sorted(dist, key=lambda v: tuple(-1 if x is None else x for x in v))

    def test_wrapper_rejects_bad_vectors(self):
        with pytest.raises(ValueError):
            legal_distributions((None, None), frozenset(), (lambda s, a: (), lambda s, a: ()))
        with pytest.raises(ValueError):
            legal_distributions((0, 0, 0), frozenset(), (lambda s, a: (), lambda s, a: ()))


# ===== Structural counts =====


class TestCounts:
    @pytest.mark.parametrize("text", ["E>=2 X p", "E>=2 F p", "E>=3 X p", "E>=1 (p U q)"])
    def test_raw_q1_by_enumeration(self, text):
        a = compile_formula(parse(text))
        for step in a.graded_steps:
            pools = [range(step.plus.n_states + 1)] * step.g + [range(step.minus.n_states + 1)] * step.g
            count = sum(1 for v in itertools.product(*pools) if any(x > 0 for x in v))
            assert count == step.raw_q1
            assert count == (step.plus.n_states + 1) ** step.g * (step.minus.n_states + 1) ** step.g - 1
            assert len(step.vec_id) <= step.raw_q1

    def test_info_records_steps(self):
        a = compile_formula(parse("E>=2 X E X p"))
        assert [s["g"] for s in a.info["steps"]] == [1, 2]


# ===== Semantics of compiled automata =====


class TestCompiledSemantics:
    def test_one_versus_two_sons(self):
        f = parse("E>=2 X p")
        assert not model_check(star([{"p"}, set()]), "r", f)
        assert model_check(star([{"p"}, {"p"}]), "r", f)

    def test_grade_zero_is_true(self):
        f = ExistsAtLeast(0, Next(Atom("p")))
        assert model_check(star([set()]), "r", f)
        assert len(compile_formula(f, ["p"]).states) == 1

    def test_negation_is_twin(self):
        a = compile_formula(parse("E X p"))
        b = compile_formula(parse("!E X p"))
        assert len(a.states) == len(b.states)
        assert b.initial == a.initial ^ 1

    @pytest.mark.parametrize("text", ["E>=2 X p", "E X E>=2 X p", "E>=2 (p U E X p)"])
    def test_hesitancy(self, text):
        assert validate_hesitancy(compile_formula(parse(text)), 3).ok


class TestDisjointness:
    def test_unshared_sub_automata_are_disjoint(self):
        a = compile_formula(parse("E X (E X p | q)"), share_duals=False)
        for step in a.graded_steps:
            for pos, neg in step.launches:
                assert not reachable_states(a, pos) & reachable_states(a, neg)

    def test_unshared_agrees_with_shared(self):
        f = parse("E>=2 X (E X p)")
        shared = compile_formula(f)
        unshared = compile_formula(f, share_duals=False)
        for labels in ([{"p"}, {"p"}], [{"p"}, set()], [set(), set()]):
            # root -> two sons -> a shared p-labelled sink
            s = make_lts(
                [("r", set()), ("a", labels[0]), ("b", labels[1]), ("z", {"p"})],
                [("r", "a"), ("r", "b"), ("a", "z"), ("b", "z"), ("z", "z")],
                "r",
                ["p"],
            )
            verdicts = []
            for a in (shared, unshared):
                game = build_membership_game(a, s)
                verdicts.append(solve_parity(game).winner[game.initial])
            assert verdicts[0] == verdicts[1]
