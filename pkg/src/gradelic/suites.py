"""Seeded cross-validation suites: the main checker against independent oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .formula import ExistsAtLeast, Formula, Next, Not, degree, render
from .games import model_check
from .generators import (
    random_boolean,
    random_lasso_finite_lts,
    random_lts,
    random_state_formula,
    random_tree_lts,
    _path,
)
from .oracle import LassoPrefixes, breakpoint_search, count_x_successors, ctlstar_reference_check, enumerative_check, validate_certificate
from .structures import Lts, unroll

Checker = Callable[[Lts, str, Formula], bool]


@dataclass
class Mismatch:
    case: int
    formula: str
    lts: Lts
    expected: bool
    got: bool
    what: str = ""

    def line(self) -> str:
        extra = f" [{self.what}]" if self.what else ""
        return f"case {self.case}: {self.formula}: oracle={self.expected} checker={self.got}{extra}"


@dataclass
class SuiteReport:
    fragment: str
    seed: int
    cases: int
    mismatches: list[Mismatch] = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def lines(self) -> list[str]:
        out = [f"fragment={self.fragment} seed={self.seed} cases={self.cases} mismatches={len(self.mismatches)}"]
        for k in sorted(self.counts):
            out.append(f"  {k}: {self.counts[k]}")
        out.extend("  " + m.line() for m in self.mismatches)
        return out


def _bump(report: SuiteReport, key: str) -> None:
    report.counts[key] = report.counts.get(key, 0) + 1


# ===== Instance generators =====


def ex_count_instances(seed: int, cases: int):
    """Trees with <= 5 states and degree <= 3, formulas E>=n X phi with Boolean phi and n <= 3."""
    rng = random.Random(seed)
    for i in range(cases):
        s = random_tree_lts(rng, max_states=5, max_degree=3)
        n = rng.randint(1, 3)
        phi = random_boolean(rng, ("p", "q"), rng.randint(1, 4))
        yield i, s, n, phi


def ctlstar_instances(seed: int, cases: int):
    """LTSs with <= 5 states and formulas of length <= 12 whose grades are all <= 1."""
    rng = random.Random(seed)
    for i in range(cases):
        s = random_lts(rng, ("p", "q"), n=rng.randint(1, 5), max_degree=2)
        f = random_state_formula(rng, ("p", "q"), max_length=12, max_grade=1)
        yield i, s, f


def exact_instances(seed: int, cases: int, max_grade: int = 2, max_length: int = 10):
    """LTSs with finitely many infinite paths and graded formulas."""
    rng = random.Random(seed)
    for i in range(cases):
        s = random_lasso_finite_lts(rng, ("p", "q"), n=rng.randint(2, 5))
        f = random_state_formula(rng, ("p", "q"), max_length=max_length, max_grade=max_grade)
        yield i, s, f


def breakpoint_instances(seed: int, cases: int):
    rng = random.Random(seed)
    for i in range(cases):
        if rng.random() < 0.5:
            s = random_tree_lts(rng, ("p", "q"), max_states=5, max_degree=3)
        else:
            s = random_lasso_finite_lts(rng, ("p", "q"), n=rng.randint(2, 5))
        g = rng.choice((1, 1, 1, 2, 2, 3))
        psi = _path(rng, ("p", "q"), rng.randint(1, 4), 1)
        if rng.random() < 0.6:
            # a leading X keeps the one-node path from being conservative
            psi = Next(psi)
        yield i, s, g, psi


# ===== Suites =====


def run_ex_count(seed: int = 7, cases: int = 200, checker: Checker = model_check) -> SuiteReport:
    rep = SuiteReport("ex-count", seed, cases)
    for i, s, n, phi in ex_count_instances(seed, cases):
        f = ExistsAtLeast(n, Next(phi))
        want = count_x_successors(s, s.initial, phi, n)
        got = checker(s, s.initial, f)
        _bump(rep, f"verdict_{want}")
        if want != got:
            rep.mismatches.append(Mismatch(i, render(f), s, want, got))
    return rep


def run_ctlstar(seed: int = 7, cases: int = 200, checker: Checker = model_check) -> SuiteReport:
    rep = SuiteReport("ctlstar-g1", seed, cases)
    for i, s, f in ctlstar_instances(seed, cases):
        want = ctlstar_reference_check(s, s.initial, f)
        got = checker(s, s.initial, f)
        _bump(rep, f"verdict_{want}")
        if want != got:
            rep.mismatches.append(Mismatch(i, render(f), s, want, got))
    return rep


def run_exact(seed: int = 7, cases: int = 100, checker: Checker = model_check) -> SuiteReport:
    rep = SuiteReport("exact", seed, cases)
    for i, s, f in exact_instances(seed, cases):
        want = enumerative_check(s, s.initial, f)
        got = checker(s, s.initial, f)
        _bump(rep, f"graded_{degree(f) >= 2}_verdict_{want}")
        if want != got:
            rep.mismatches.append(Mismatch(i, render(f), s, want, got))
    return rep


def run_breakpoint(
    seed: int = 7, cases: int = 300, checker: Checker = model_check, depth: int = 4, lasso_bound: int = 3
) -> SuiteReport:
    """Soundness only: a confirmed certificate must imply a positive verdict."""
    rep = SuiteReport("breakpoint", seed, cases)
    rep.counts["confirmed"] = 0
    for i, s, g, psi in breakpoint_instances(seed, cases):
        f = ExistsAtLeast(g, psi)
        res = breakpoint_search(s, s.initial, psi, g, depth, lasso_bound)
        if not res.confirmed:
            _bump(rep, "unknown")
            continue
        rep.counts["confirmed"] += 1
        if not validate_certificate(s, s.initial, psi, res.certificate):
            rep.mismatches.append(Mismatch(i, render(f), s, True, False, "invalid certificate"))
            continue
        got = checker(s, s.initial, f)
        if not got:
            rep.mismatches.append(Mismatch(i, render(f), s, True, got))
    return rep


def run_invariants(seed: int = 7, cases: int = 200, checker: Checker = model_check, unroll_depths=(1, 2, 3)) -> SuiteReport:
    """Negation duality and unwinding invariance on the CTL* suite."""
    rep = SuiteReport("invariants", seed, cases)
    for i, s, f in ctlstar_instances(seed, cases):
        base = checker(s, s.initial, f)
        neg = checker(s, s.initial, Not(f))
        if neg == base:
            rep.mismatches.append(Mismatch(i, render(f), s, not base, neg, "negation"))
        for k in unroll_depths:
            u = unroll(s, k)
            got = checker(u, u.initial, f)
            if got != base:
                rep.mismatches.append(Mismatch(i, render(f), s, base, got, f"unroll {k}"))
    return rep


SUITES = {
    "ex-count": run_ex_count,
    "ctlstar-g1": run_ctlstar,
    "breakpoint": run_breakpoint,
    "exact": run_exact,
    "invariants": run_invariants,
}


def corrupted(checker: Checker) -> Checker:
    """A deliberately broken checker (negated verdicts) for harness sanity checks."""

    def broken(s: Lts, state: str, f: Formula) -> bool:
        return not checker(s, state, f)

    return broken


# ===== Word automata =====

WORD_CORPUS = (
    "p U q",
    "G p",
    "F q",
    "X p",
    "p R q",
    "!(p U q)",
    "G F p",
    "(X !p) | (q U (p & X q))",
)


@dataclass
class WordReport:
    formula: str
    finite_words: int = 0
    finite_bad: int = 0
    lassos: int = 0
    lasso_bad: int = 0
    closure_bad: int = 0

    @property
    def ok(self) -> bool:
        return not (self.finite_bad or self.lasso_bad or self.closure_bad)


def run_word_automata(
    corpus=WORD_CORPUS, atoms=("p", "q"), max_word: int = 5, max_stem: int = 3, max_loop: int = 3
) -> list[WordReport]:
    """Exhaustive comparison of the word automata with the direct evaluators.

    The prefix-closure automaton must accept a lasso iff the infinite word
    satisfies the formula or some finite prefix does; prefix truth is
    ultimately periodic, so one period past its start covers every prefix.
    """
    from itertools import product

    from .formula import parse_any
    from .word_automata import afw_to_nfw, alphabet, build_afw_weak, build_nbw, build_prefix_closure_nbw, eval_lasso, eval_weak

    letters = alphabet(atoms)
    out = []
    for text in corpus:
        f = parse_any(text)
        rep = WordReport(text)
        afw = build_afw_weak(f, atoms)
        nfw = afw_to_nfw(afw)
        nbw = build_nbw(f, atoms)
        pc = build_prefix_closure_nbw(f, atoms)
        for n in range(1, max_word + 1):
            for w in product(letters, repeat=n):
                rep.finite_words += 1
                want = eval_weak(f, w)
                if afw.accepts(w) != want or nfw.accepts(w) != want:
                    rep.finite_bad += 1
        for sl in range(max_stem + 1):
            for ll in range(1, max_loop + 1):
                for stem in product(letters, repeat=sl):
                    for loop in product(letters, repeat=ll):
                        rep.lassos += 1
                        want = eval_lasso(f, stem, loop)
                        if nbw.accepts_lasso(stem, loop) != want:
                            rep.lasso_bad += 1
                        word = LassoPrefixes(f, stem, loop)
                        closed = want or any(word.prefix(k) for k in range(1, word.horizon + 1))
                        if pc.accepts_lasso(stem, loop) != closed:
                            rep.closure_bad += 1
        out.append(rep)
    return out
