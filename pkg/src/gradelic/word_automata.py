"""LTL word automata and direct word evaluators.

* :func:`build_afw_weak` -- alternating automaton for finite words under the
  weak (pessimistic) semantics, with the distinguished final state ``ew``.
* :func:`afw_to_nfw` -- subset construction over minimal models.
* :func:`build_nbw` -- infinite words: very weak alternating Büchi automaton on
  the negation normal form, made nondeterministic with the Miyano-Hayashi
  breakpoint construction.
* :func:`build_prefix_closure_nbw` -- accepts infinite words that satisfy the
  formula or have a finite prefix satisfying it, via an accepting sink.
* :func:`eval_weak`, :func:`eval_lasso` -- reference evaluators.

Letters are frozensets of atom names.  Transition formulas of alternating
automata are kept in DNF as sets of minimal models (:data:`DNF`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formula import (
    And,
    Atom,
    Const,
    Formula,
    FormulaError,
    Next,
    Not,
    Or,
    Release,
    Until,
    atoms as formula_atoms,
    render,
)
from .graphs import has_accepting_cycle, live_nodes, reachable

Letter = frozenset
DNF = frozenset  # frozenset of frozensets of states

D_TRUE: DNF = frozenset({frozenset()})
D_FALSE: DNF = frozenset()


def d_var(q) -> DNF:
    return frozenset({frozenset({q})})


def _minimize(models: Iterable[frozenset]) -> DNF:
    models = sorted(set(models), key=len)
    kept: list[frozenset] = []
    for m in models:
        if not any(k <= m for k in kept):
            kept.append(m)
    return frozenset(kept)


def d_or(*parts: DNF) -> DNF:
    return _minimize(itertools.chain.from_iterable(parts))


def d_and(*parts: DNF) -> DNF:
    acc = D_TRUE
    for p in parts:
        acc = _minimize(x | y for x in acc for y in p)
        if not acc:
            return D_FALSE
    return acc


def alphabet(atoms: Iterable[str]) -> tuple[Letter, ...]:
    """All subsets of atoms, ordered by size then lexicographically."""
    atoms = sorted(set(atoms))
    out = []
    for k in range(len(atoms) + 1):
        for combo in itertools.combinations(atoms, k):
            out.append(frozenset(combo))
    return tuple(out)


def letter_key(a: Letter) -> tuple:
    return (len(a), tuple(sorted(a)))


def letter_str(a: Letter) -> str:
    return "{" + ",".join(sorted(a)) + "}"


# ===== Direct evaluators =====


def closure(f: Formula) -> list[Formula]:
    """Subformulas in post-order (children before parents), without duplicates."""
    out: list[Formula] = []
    seen: set[Formula] = set()

    def go(g: Formula) -> None:
        if g in seen:
            return
        for c in g.children:
            go(c)
        seen.add(g)
        out.append(g)

    go(f)
    return out


def _check_ltl(f: Formula) -> None:
    for g in f.subformulas():
        if not isinstance(g, (Atom, Const, Not, Or, And, Next, Until, Release)):
            raise FormulaError(f"not an LTL formula: {render(f)}")


def weak_vectors(psi: Formula, word: Sequence[Letter]) -> list[dict[Formula, bool]]:
    """Truth of every subformula at every position of a finite word (weak semantics)."""
    _check_ltl(psi)
    n = len(word)
    subs = closure(psi)
    vec: list[dict[Formula, bool]] = [dict() for _ in range(n)]
    for i in range(n - 1, -1, -1):
        v = vec[i]
        nxt = vec[i + 1] if i + 1 < n else None
        for g in subs:
            v[g] = weak_step(g, word[i], v, nxt)
    return vec


def weak_step(g: Formula, letter: Letter, v: dict, nxt: dict | None) -> bool:
    """Truth of g at a position from its children there and the vector of the next position."""
    if isinstance(g, Atom):
        return g.name in letter
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Not):
        return not v[g.arg]
    if isinstance(g, Or):
        return v[g.left] or v[g.right]
    if isinstance(g, And):
        return v[g.left] and v[g.right]
    if isinstance(g, Next):
        return nxt is not None and nxt[g.arg]
    if isinstance(g, Until):
        return v[g.right] or (v[g.left] and nxt is not None and nxt[g])
    if isinstance(g, Release):
        return v[g.right] and (v[g.left] or (nxt is not None and nxt[g]))
    raise FormulaError(f"not an LTL formula: {render(g)}")


def eval_weak(psi: Formula, word: Sequence[Letter]) -> bool:
    """Truth of psi on a nonempty finite word under the weak semantics."""
    if not word:
        raise ValueError("finite words must be nonempty")
    return weak_vectors(psi, word)[0][psi]


def eval_lasso(psi: Formula, stem: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    """Truth of psi on the infinite word stem . loop^omega."""
    return lasso_vectors(psi, stem, loop)[0][psi]


def lasso_vectors(psi: Formula, stem: Sequence[Letter], loop: Sequence[Letter]) -> list[dict[Formula, bool]]:
    """Truth of every subformula at every position of an ultimately periodic word.

    Until is a least and Release a greatest fixpoint over the cyclic position
    graph; each is computed by iterating around the loop until stable.
    """
    _check_ltl(psi)
    if not loop:
        raise ValueError("lasso loop must be nonempty")
    word = list(stem) + list(loop)
    n = len(word)
    back = len(stem)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else back

    vec: list[dict[Formula, bool]] = [dict() for _ in range(n)]
    for g in closure(psi):
        if isinstance(g, (Until, Release)):
            init = isinstance(g, Release)
            for i in range(n):
                vec[i][g] = init
            changed = True
            while changed:
                changed = False
                for i in range(n - 1, -1, -1):
                    v = vec[i]
                    nv = vec[succ(i)][g]
                    if isinstance(g, Until):
                        val = v[g.right] or (v[g.left] and nv)
                    else:
                        val = v[g.right] and (v[g.left] or nv)
                    if val != v[g]:
                        v[g] = val
                        changed = True
        elif isinstance(g, Next):
            for i in range(n):
                vec[i][g] = vec[succ(i)][g.arg]
        else:
            for i in range(n):
                vec[i][g] = weak_step(g, word[i], vec[i], None)
    return vec


# ===== Alternating automaton for finite words =====


class _EndOfWord:
    """The final state ``ew`` of the alternating automaton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ew"

    def __reduce__(self):
        return (_EndOfWord, ())


EW = _EndOfWord()


def neg(f: Formula) -> Formula:
    """Negation with double negations and negated constants removed."""
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, Const):
        return Const(not f.value)
    return Not(f)


def state_name(q) -> str:
    return "ew" if q is EW else render(q)


def state_key(q) -> tuple:
    return (0, "") if q is EW else (1, render(q))


@dataclass
class Afw:
    """Alternating automaton over finite words with final set ``{ew}``."""

    atoms: tuple[str, ...]
    initial: Formula
    states: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def alphabet(self) -> tuple[Letter, ...]:
        return alphabet(self.atoms)

    @property
    def final(self) -> frozenset:
        return frozenset({EW})

    def transition(self, q, a: Letter) -> DNF:
        key = (q, a)
        if key not in self._cache:
            self._cache[key] = self._delta(q, a)
        return self._cache[key]

    def _delta(self, q, a: Letter) -> DNF:
        if q is EW:
            return D_FALSE
        if isinstance(q, Const):
            return D_TRUE if q.value else D_FALSE
        if isinstance(q, Atom):
            return D_TRUE if q.name in a else D_FALSE
        if isinstance(q, Or):
            return d_or(self.transition(q.left, a), self.transition(q.right, a))
        if isinstance(q, And):
            return d_and(self.transition(q.left, a), self.transition(q.right, a))
        if isinstance(q, Next):
            return d_var(q.arg)
        if isinstance(q, Until):
            return d_or(self.transition(q.right, a), d_and(self.transition(q.left, a), d_var(q)))
        if isinstance(q, Release):
            r2 = self.transition(q.right, a)
            return d_or(d_and(self.transition(q.left, a), r2), d_and(r2, d_var(q)))
        if isinstance(q, Not):
            f = q.arg
            if isinstance(f, (Const, Atom)):
                return D_FALSE if self.transition(f, a) else D_TRUE
            if isinstance(f, Not):
                return self.transition(f.arg, a)
            if isinstance(f, Or):
                return d_and(self.transition(neg(f.left), a), self.transition(neg(f.right), a))
            if isinstance(f, And):
                return d_or(self.transition(neg(f.left), a), self.transition(neg(f.right), a))
            not_next = d_or(d_var(EW), d_var(Not(f)))
            if isinstance(f, Next):
                return d_or(d_var(EW), d_var(neg(f.arg)))
            if isinstance(f, Until):
                return d_and(
                    self.transition(neg(f.right), a),
                    d_or(self.transition(neg(f.left), a), not_next),
                )
            if isinstance(f, Release):
                return d_or(
                    self.transition(neg(f.right), a),
                    d_and(self.transition(neg(f.left), a), not_next),
                )
        raise FormulaError(f"not an LTL formula: {state_name(q)}")

    def accepts(self, word: Sequence[Letter]) -> bool:
        """Direct search for an accepting run tree (memoized per state and position)."""
        memo: dict = {}
        n = len(word)

        def acc(q, i: int) -> bool:
            if i == n:
                return q is EW
            key = (q, i)
            if key not in memo:
                memo[key] = any(all(acc(r, i + 1) for r in m) for m in self.transition(q, word[i]))
            return memo[key]

        return n > 0 and acc(self.initial, 0)


def build_afw_weak(psi: Formula, atoms: Iterable[str] | None = None) -> Afw:
    _check_ltl(psi)
    atoms = tuple(sorted(set(atoms) if atoms is not None else set(formula_atoms(psi))))
    a = Afw(atoms, psi)
    letters = a.alphabet

    def succ(q):
        out = set()
        for x in letters:
            for m in a.transition(q, x):
                out |= m
        return sorted(out, key=state_key)

    a.states = tuple(sorted(reachable([psi], succ), key=state_key))
    return a


# ===== Nondeterministic finite-word automaton =====


@dataclass
class Nfw:
    atoms: tuple[str, ...]
    states: tuple[frozenset, ...]
    initial: int
    trans: dict[tuple[int, Letter], tuple[int, ...]]
    final: frozenset[int]

    @property
    def alphabet(self) -> tuple[Letter, ...]:
        return alphabet(self.atoms)

    def successors(self, q: int, a: Letter) -> tuple[int, ...]:
        return self.trans.get((q, a), ())

    def accepts(self, word: Sequence[Letter]) -> bool:
        current = {self.initial}
        for a in word:
            current = {r for q in current for r in self.successors(q, a)}
        return bool(current & self.final)

    def state_name(self, q: int) -> str:
        return "{" + ", ".join(state_name(x) for x in sorted(self.states[q], key=state_key)) + "}"


def _successor_sets(a: Afw, members: Iterable, letter: Letter) -> list[frozenset]:
    """All unions obtained by picking one minimal model per member."""
    options = [sorted(a.transition(q, letter), key=lambda m: sorted(map(state_key, m))) for q in members]
    out = set()
    for choice in itertools.product(*options):
        out.add(frozenset().union(*choice) if choice else frozenset())
    return sorted(out, key=lambda s: (len(s), sorted(map(state_key, s))))


def afw_to_nfw(a: Afw) -> Nfw:
    """Subset construction; a subset is final iff all its obligations are ``ew``.

    The initial subset ``{initial}`` is kept apart from the empty set so that the
    empty word is never accepted.
    """
    start = ("init", frozenset({a.initial}))
    index: dict = {start: 0}
    order = [start]
    trans: dict[tuple[int, Letter], tuple[int, ...]] = {}
    i = 0
    while i < len(order):
        _, members = order[i]
        for x in a.alphabet:
            outs = []
            for s in _successor_sets(a, sorted(members, key=state_key), x):
                key = ("set", s)
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                outs.append(index[key])
            if outs:
                trans[(i, x)] = tuple(outs)
        i += 1
    final = frozenset(j for j, (tag, s) in enumerate(order) if tag == "set" and s <= {EW})
    return Nfw(a.atoms, tuple(s for _, s in order), 0, trans, final)


# ===== Nondeterministic Büchi automata =====


@dataclass
class Nbw:
    """Nondeterministic Büchi word automaton over integer states."""

    atoms: tuple[str, ...]
    n_states: int
    initial: int
    trans: dict[tuple[int, Letter], tuple[int, ...]]
    accepting: frozenset[int]
    names: list[str]
    sink: int | None = None
    dead: int | None = None

    @property
    def alphabet(self) -> tuple[Letter, ...]:
        return alphabet(self.atoms)

    @property
    def states(self) -> range:
        return range(self.n_states)

    def successors(self, q: int, a: Letter) -> tuple[int, ...]:
        return self.trans.get((q, a), ())

    def all_successors(self, q: int) -> list[int]:
        out = set()
        for a in self.alphabet:
            out.update(self.successors(q, a))
        return sorted(out)

    def accepts_lasso(self, stem: Sequence[Letter], loop: Sequence[Letter]) -> bool:
        word = list(stem) + list(loop)
        n = len(word)
        back = len(stem)

        def succ(node):
            q, i = node
            j = i + 1 if i + 1 < n else back
            return [(r, j) for r in self.successors(q, word[i])]

        return has_accepting_cycle([(self.initial, 0)], succ, lambda node: node[0] in self.accepting)

    def to_json(self) -> dict:
        return {
            "atoms": list(self.atoms),
            "states": [
                {
                    "id": q,
                    "name": self.names[q],
                    "accepting": q in self.accepting,
                    "sink": q == self.sink,
                    "dead": q == self.dead,
                }
                for q in self.states
            ],
            "initial": self.initial,
            "transitions": [
                [q, sorted(a), list(ts)]
                for (q, a), ts in sorted(self.trans.items(), key=lambda kv: (kv[0][0], letter_key(kv[0][1])))
            ],
        }

    def to_dot(self, name: str = "nbw") -> str:
        lines = [f"digraph {name} {{", "  __init [shape=point];", f"  __init -> q{self.initial};"]
        for q in self.states:
            shape = "doublecircle" if q in self.accepting else "circle"
            label = "⊤" if q == self.sink else self.names[q].replace('"', "'")
            lines.append(f'  q{q} [shape={shape}, label="{label}"];')
        for (q, a), ts in sorted(self.trans.items(), key=lambda kv: (kv[0][0], letter_key(kv[0][1]))):
            for t in ts:
                lines.append(f'  q{q} -> q{t} [label="{letter_str(a)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def trim(nbw: Nbw) -> Nbw:
    """Drop states without an accepting continuation; the initial state is kept."""
    live = live_nodes(
        reachable([nbw.initial], nbw.all_successors), nbw.all_successors, lambda q: q in nbw.accepting
    )
    keep = [q for q in nbw.states if q in live or q == nbw.initial]
    keep_set = set(keep)
    order = reachable([nbw.initial], lambda q: [t for t in nbw.all_successors(q) if t in keep_set])
    renum = {q: i for i, q in enumerate(order)}
    trans = {}
    for (q, a), ts in nbw.trans.items():
        if q in renum:
            outs = tuple(renum[t] for t in ts if t in renum and t in live)
            if outs:
                trans[(renum[q], a)] = outs
    return Nbw(
        nbw.atoms,
        len(order),
        0,
        trans,
        frozenset(renum[q] for q in nbw.accepting if q in renum),
        [nbw.names[q] for q in order],
        renum.get(nbw.sink) if nbw.sink is not None else None,
        renum.get(nbw.dead) if nbw.dead is not None else None,
    )


def complete(nbw: Nbw) -> Nbw:
    """Add a rejecting dead state so that every (state, letter) pair has a successor."""
    dead = nbw.n_states
    trans = dict(nbw.trans)
    added = False
    for q in nbw.states:
        for a in nbw.alphabet:
            if not trans.get((q, a)):
                trans[(q, a)] = (dead,)
                added = True
    if not added:
        return nbw
    for a in nbw.alphabet:
        trans[(dead, a)] = (dead,)
    return Nbw(nbw.atoms, dead + 1, nbw.initial, trans, nbw.accepting, nbw.names + ["dead"], nbw.sink, dead)


def nnf(f: Formula, negated: bool = False) -> Formula:
    """Push negations to atoms using the infinite-word dualities."""
    if isinstance(f, Atom):
        return Not(f) if negated else f
    if isinstance(f, Const):
        return Const(f.value != negated)
    if isinstance(f, Not):
        return nnf(f.arg, not negated)
    if isinstance(f, Next):
        return Next(nnf(f.arg, negated))
    dual = {Or: And, And: Or, Until: Release, Release: Until}
    cls = dual[type(f)] if negated else type(f)
    return cls(nnf(f.left, negated), nnf(f.right, negated))


def _delta_inf(q: Formula, a: Letter) -> DNF:
    if isinstance(q, Const):
        return D_TRUE if q.value else D_FALSE
    if isinstance(q, Atom):
        return D_TRUE if q.name in a else D_FALSE
    if isinstance(q, Not):
        return D_FALSE if q.arg.name in a else D_TRUE
    if isinstance(q, Or):
        return d_or(_delta_inf(q.left, a), _delta_inf(q.right, a))
    if isinstance(q, And):
        return d_and(_delta_inf(q.left, a), _delta_inf(q.right, a))
    if isinstance(q, Next):
        return d_var(q.arg)
    if isinstance(q, Until):
        return d_or(_delta_inf(q.right, a), d_and(_delta_inf(q.left, a), d_var(q)))
    if isinstance(q, Release):
        r2 = _delta_inf(q.right, a)
        return d_and(r2, d_or(_delta_inf(q.left, a), d_var(q)))
    raise FormulaError(f"not in negation normal form: {render(q)}")


def build_nbw(psi: Formula, atoms: Iterable[str] | None = None) -> Nbw:
    """NBW for the infinite words satisfying psi (breakpoint construction)."""
    _check_ltl(psi)
    atoms = tuple(sorted(set(atoms) if atoms is not None else set(formula_atoms(psi))))
    letters = alphabet(atoms)
    root = nnf(psi)
    cache: dict = {}

    def delta(q, a):
        if (q, a) not in cache:
            cache[(q, a)] = sorted(_delta_inf(q, a), key=lambda m: sorted(map(render, m)))
        return cache[(q, a)]

    def not_final(q) -> bool:
        return isinstance(q, Until)

    def key(macro):
        s, o = macro
        return (sorted(map(render, s)), sorted(map(render, o)))

    start = (frozenset({root}), frozenset())
    index = {start: 0}
    order = [start]
    trans: dict[tuple[int, Letter], tuple[int, ...]] = {}
    i = 0
    while i < len(order):
        s, o = order[i]
        members = sorted(s, key=render)
        for a in letters:
            outs = set()
            for choice in itertools.product(*(delta(q, a) for q in members)):
                picked = dict(zip(members, choice))
                s2 = frozenset().union(*choice) if choice else frozenset()
                if o:
                    o2 = frozenset().union(*(picked[q] for q in o))
                else:
                    o2 = s2
                o2 = frozenset(q for q in o2 if not_final(q))
                outs.add((s2, o2))
            ids = []
            for m in sorted(outs, key=key):
                if m not in index:
                    index[m] = len(order)
                    order.append(m)
                ids.append(index[m])
            if ids:
                trans[(i, a)] = tuple(sorted(ids))
        i += 1

    def name(m) -> str:
        s, o = m
        return "(" + "{" + ", ".join(sorted(map(render, s))) + "}" + " | " + "{" + ", ".join(sorted(map(render, o))) + "})"

    nbw = Nbw(
        atoms,
        len(order),
        0,
        trans,
        frozenset(j for j, (_, o) in enumerate(order) if not o),
        [name(m) for m in order],
    )
    return trim(nbw)


def build_prefix_closure_nbw(psi: Formula, atoms: Iterable[str] | None = None) -> Nbw:
    """NBW accepting w iff w satisfies psi or some nonempty finite prefix of w does.

    Union of :func:`build_nbw` and the NFW of the weak semantics under a fresh
    initial state; NFW transitions into final states are mirrored into an
    accepting sink.  The fresh initial state copies the mirrored transitions
    too, so one-letter prefixes reach the sink.
    """
    atoms = tuple(sorted(set(atoms) if atoms is not None else set(formula_atoms(psi))))
    a = build_nbw(psi, atoms)
    b = afw_to_nfw(build_afw_weak(psi, atoms))
    na, nb = a.n_states, len(b.states)
    top = na + nb
    start = top + 1
    letters = alphabet(atoms)
    trans: dict[tuple[int, Letter], tuple[int, ...]] = {}

    def b_out(q: int, x: Letter) -> set[int]:
        outs = set()
        for t in b.successors(q, x):
            outs.add(na + t)
            if t in b.final:
                outs.add(top)
        return outs

    for (q, x), ts in a.trans.items():
        trans[(q, x)] = ts
    for q in range(nb):
        for x in letters:
            outs = b_out(q, x)
            if outs:
                trans[(na + q, x)] = tuple(sorted(outs))
    for x in letters:
        trans[(top, x)] = (top,)
        outs = set(a.successors(a.initial, x)) | b_out(b.initial, x)
        if outs:
            trans[(start, x)] = tuple(sorted(outs))
    names = ["A:" + n for n in a.names] + ["B:" + b.state_name(q) for q in range(nb)] + ["top", "init"]
    nbw = Nbw(atoms, start + 1, start, trans, a.accepting | {top}, names, sink=top)
    return trim(nbw)
