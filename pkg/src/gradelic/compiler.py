"""Compilation of GCTL* state formulas into graded hesitant tree automata.

The construction is recursive on the formula:

* atoms and constants: one transient state;
* disjunction / conjunction: a fresh transient state combining the initial
  transitions of both operands;
* negation: the dual automaton;
* ``E>=g psi``: states are vectors of 2g coordinates.  The first g run the NBW
  for the LTL projection Psi of psi, the last g run the prefix-closure NBW of
  !Psi (completed with a rejecting dead state); ``None`` marks an inactive
  coordinate.  A vector guesses the truth of the maximal state subformulas on
  each node (a letter of Sigma'), launches their automata accordingly and
  distributes its active coordinates among distinct successor vectors.

State ids come in pairs: an even id is a state of a positive automaton, the odd
id ``q ^ 1`` is the same state in the dual automaton.  The automaton of
``!theta`` is therefore the polarity twin of the automaton of ``theta`` and both
share the automata of lower subformulas.  Distinct formula occurrences always
get fresh states.  With ``share_duals=False`` the twin is built from a fresh
copy instead, so the two automata are fully disjoint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .formula import And, Atom, Const, ExistsAtLeast, Formula, Not, Or, atoms as formula_atoms, ltl_project, render
from .ghta import (
    EXIST,
    PB,
    PB_FALSE,
    PB_TRUE,
    TRANS,
    UNIV,
    BoolConst,
    Box,
    Diamond,
    Distribute,
    Ghta,
    Move,
    PAnd,
    POr,
    dual,
    occurring_states,
    pand,
    por,
    transitive_closure,
)
from .word_automata import Nbw, alphabet, build_nbw, build_prefix_closure_nbw, complete

Vector = tuple  # tuple[int | None, ...]


class CompileBudgetError(RuntimeError):
    pass


def _partitions(items: tuple) -> list[tuple[tuple, ...]]:
    """All set partitions of ``items`` (sorted tuple); each block sorted, blocks sorted."""
    if not items:
        return [()]
    first, rest = items[0], items[1:]
    out = []
    for part in _partitions(rest):
        out.append(tuple(sorted(((first,),) + part)))
        for i in range(len(part)):
            merged = tuple(sorted((first,) + part[i]))
            out.append(tuple(sorted(part[:i] + (merged,) + part[i + 1:])))
    return sorted(set(out), key=lambda p: (len(p), p))


def active(v: Vector) -> tuple[int, ...]:
    return tuple(i for i, x in enumerate(v) if x is not None)


def flip_pb(theta: PB) -> PB:
    """Toggle the polarity bit of every state in a formula."""
    if isinstance(theta, POr):
        return POr(tuple(flip_pb(c) for c in theta.items))
    if isinstance(theta, PAnd):
        return PAnd(tuple(flip_pb(c) for c in theta.items))
    if isinstance(theta, Move):
        return Move(theta.direction, theta.state ^ 1)
    if isinstance(theta, Diamond):
        return Diamond(tuple(q ^ 1 for q in theta.states))
    if isinstance(theta, Box):
        return Box(tuple(q ^ 1 for q in theta.states))
    if isinstance(theta, Distribute):
        return Distribute(theta.owner, theta.owner_id, theta.vector, theta.letter, theta.dual, not theta.flip)
    return theta


# ===== Legal distributions =====


@dataclass
class Distributor:
    """Legal distributions of graded vectors over a pair of word automata.

    ``plus_succ(state, letter)`` and ``minus_succ(state, letter)`` give the
    successors of a Psi coordinate and of a !Psi coordinate; ``sink`` is the
    accepting sink of the !Psi automaton (or None).
    """

    g: int
    plus_succ: Callable[[int, frozenset], Sequence[int]]
    minus_succ: Callable[[int, frozenset], Sequence[int]]
    sink: int | None
    _choices: dict = field(default_factory=dict, repr=False)
    _parts: dict = field(default_factory=dict, repr=False)

    def coord_succ(self, i: int, state: int, letter: frozenset) -> Sequence[int]:
        return self.plus_succ(state, letter) if i < self.g else self.minus_succ(state, letter)

    def member_ok(self, v: Vector) -> bool:
        psi = [i for i in range(self.g) if v[i] is not None]
        if len(psi) < 2:
            return True
        return all(v[i + self.g] is not None and v[i + self.g] != self.sink for i in psi)

    def block_choices(self, q: Vector, block: tuple[int, ...], letter: frozenset) -> list[Vector]:
        """Successor vectors whose active coordinates are exactly ``block``."""
        key = (q, block, letter)
        if key not in self._choices:
            pools = [self.coord_succ(i, q[i], letter) for i in block]
            out = []
            for combo in itertools.product(*pools):
                v = [None] * (2 * self.g)
                for i, s in zip(block, combo):
                    v[i] = s
                v = tuple(v)
                if self.member_ok(v):
                    out.append(v)
            self._choices[key] = sorted(out, key=_vec_key)
        return self._choices[key]

    def partitions(self, q: Vector, letter: frozenset) -> list[tuple[tuple[int, ...], ...]]:
        """Partitions of the active coordinates all of whose blocks have a choice."""
        key = (q, letter)
        if key not in self._parts:
            out = []
            for part in _partitions(active(q)):
                if all(self.block_choices(q, b, letter) for b in part):
                    out.append(part)
            self._parts[key] = out
        return self._parts[key]

    def legal(self, q: Vector, letter: frozenset) -> list[tuple[Vector, ...]]:
        """All legal distributions as canonically ordered tuples of distinct vectors."""
        out = set()
        for part in self.partitions(q, letter):
            for combo in itertools.product(*(self.block_choices(q, b, letter) for b in part)):
                out.add(tuple(sorted(combo, key=_vec_key)))
        return sorted(out, key=lambda x: (len(x), [_vec_key(v) for v in x]))

    def targets(self, q: Vector, letter: frozenset) -> set[Vector]:
        out = set()
        for part in self.partitions(q, letter):
            for b in part:
                out.update(self.block_choices(q, b, letter))
        return out


def _vec_key(v: Vector) -> tuple:
    return tuple(-1 if x is None else x for x in v)


def legal_distributions(
    q: Vector,
    letter: frozenset,
    deltas: tuple[Callable[[int, frozenset], Sequence[int]], Callable[[int, frozenset], Sequence[int]]],
    sink: int | None = None,
) -> list[tuple[Vector, ...]]:
    """All legal distributions of vector q on letter (a letter of Sigma')."""
    if len(q) % 2 or not active(q):
        raise ValueError("q must have 2g coordinates, at least one of them active")
    return Distributor(len(q) // 2, deltas[0], deltas[1], sink).legal(q, letter)


# ===== Graded quantifier step =====


@dataclass
class GradedStep:
    """States and transitions contributed by one ``E>=g psi`` occurrence."""

    uid: int
    formula: Formula
    g: int
    plus: Nbw
    minus: Nbw
    names: tuple[str, ...]
    dist: Distributor
    vec_id: dict = field(default_factory=dict)
    id_vec: dict = field(default_factory=dict)
    block_id: dict = field(default_factory=dict)
    launches: list = field(default_factory=list)
    _expanded: dict = field(default_factory=dict, repr=False)

    @property
    def letters(self) -> tuple[frozenset, ...]:
        return alphabet(self.names)

    @property
    def raw_q1(self) -> int:
        return (self.plus.n_states + 1) ** self.g * (self.minus.n_states + 1) ** self.g - 1

    def initial_vector(self) -> Vector:
        return (self.plus.initial,) * self.g + (self.minus.initial,) * self.g

    def tracks(self, v: Vector) -> tuple[bool, ...]:
        coords = active(v)
        if self.g == 1:
            coords = tuple(i for i in coords if i == 0)
        return tuple(
            (v[i] in self.plus.accepting) if i < self.g else (v[i] in self.minus.accepting) for i in coords
        )

    def in_single_track_good(self, v: Vector) -> bool:
        """One psi coordinate left and it is accepting; recorded in ``good`` for dumps, acceptance uses tracks."""
        psi = [i for i in range(self.g) if v[i] is not None]
        return len(psi) == 1 and v[psi[0]] in self.plus.accepting

    def vector_name(self, v: Vector) -> str:
        cells = ["_" if x is None else str(x) for x in v]
        return f"E{self.uid}[" + ",".join(cells[: self.g]) + "|" + ",".join(cells[self.g:]) + "]"

    def distribute_targets(self, term: Distribute) -> set[int]:
        v = self.id_vec[term.vector]
        flip = 1 if term.flip else 0
        return {self.vec_id[t] ^ flip for t in self.dist.targets(v, term.letter)}

    def expand_distribute(self, term: Distribute, d: int) -> PB:
        key = (term.vector, term.letter, d, term.dual, term.flip)
        if key in self._expanded:
            return self._expanded[key]
        v = self.id_vec[term.vector]
        flip = 1 if term.flip else 0
        outer = []
        for part in self.dist.partitions(v, term.letter):
            if len(part) > d:
                continue
            choices = [[self.vec_id[c] ^ flip for c in self.dist.block_choices(v, b, term.letter)] for b in part]
            for sons in itertools.permutations(range(1, d + 1), len(part)):
                if term.dual:
                    outer.append(por(*(pand(*(Move(s, c) for c in cs)) for s, cs in zip(sons, choices))))
                else:
                    outer.append(pand(*(por(*(Move(s, c) for c in cs)) for s, cs in zip(sons, choices))))
        r = pand(*outer) if term.dual else por(*outer)
        self._expanded[key] = r
        return r


# ===== Compiler =====


@dataclass
class _Fragment:
    initial: int
    blocks: frozenset[int]


class Compiler:
    def __init__(self, atoms: Iterable[str], share_duals: bool = True, max_vectors: int = 200_000):
        self.atoms = tuple(sorted(set(atoms)))
        self.share_duals = share_duals
        self.max_vectors = max_vectors
        self.next_state = 0
        self.next_block = 0
        self.rules: dict[int, Callable[[frozenset], PB]] = {}
        self.block_of: dict[int, int] = {}
        self.kind: dict[int, str] = {}
        self.below: dict[int, set[int]] = {}
        self.good: set[int] = set()
        self.tracks: dict[int, tuple[bool, ...]] = {}
        self.names: dict[int, str] = {}
        self.steps: list[GradedStep] = []
        self._rule_cache: dict = {}

    # ----- allocation -----

    def new_state(self) -> int:
        q = self.next_state
        self.next_state += 2
        return q

    def new_block(self, kind: str, below: Iterable[int] = ()) -> int:
        b = self.next_block
        self.next_block += 2
        self.kind[b] = kind
        self.below[b] = set(below)
        return b

    def rule_of(self, q: int, letter: frozenset) -> PB:
        key = (q, letter)
        hit = self._rule_cache.get(key)
        if hit is None:
            if q & 1:
                hit = dual(flip_pb(self.rule_of(q ^ 1, letter)))
            else:
                hit = self.rules[q](letter)
            self._rule_cache[key] = hit
        return hit

    # ----- construction -----

    def build(self, f: Formula) -> _Fragment:
        if isinstance(f, Not):
            frag = self.build(f.arg)
            return _Fragment(frag.initial ^ 1, frozenset(b ^ 1 for b in frag.blocks))
        if isinstance(f, Atom):
            q = self.new_state()
            name = f.name
            self.rules[q] = lambda letter: PB_TRUE if name in letter else PB_FALSE
            return self._single(q, name, ())
        if isinstance(f, Const):
            q = self.new_state()
            value = PB_TRUE if f.value else PB_FALSE
            self.rules[q] = lambda letter: value
            return self._single(q, render(f), ())
        if isinstance(f, (Or, And)):
            left = self.build(f.left)
            right = self.build(f.right)
            q = self.new_state()
            join = por if isinstance(f, Or) else pand
            li, ri = left.initial, right.initial
            self.rules[q] = lambda letter: join(self.rule_of(li, letter), self.rule_of(ri, letter))
            return self._single(q, render(f), left.blocks | right.blocks)
        if isinstance(f, ExistsAtLeast):
            return self.build_graded(f)
        raise ValueError(f"not a state formula: {render(f)}")

    def _single(self, q: int, name: str, lower: Iterable[int]) -> _Fragment:
        lower = frozenset(lower)
        b = self.new_block(TRANS, lower)
        self.block_of[q] = b
        self.names[q] = name
        return _Fragment(q, lower | {b})

    def build_graded(self, f: ExistsAtLeast) -> _Fragment:
        if f.g == 0:
            q = self.new_state()
            self.rules[q] = lambda letter: PB_TRUE
            return self._single(q, render(f), ())
        proj = ltl_project(f.body)
        names = proj.atom_names
        launches: list[tuple[int, int]] = []
        lower: set[int] = set()
        for theta in proj.state_formulas:
            pos = self.build(theta)
            if self.share_duals:
                neg = _Fragment(pos.initial ^ 1, frozenset(b ^ 1 for b in pos.blocks))
            else:
                fresh = self.build(theta)
                neg = _Fragment(fresh.initial ^ 1, frozenset(b ^ 1 for b in fresh.blocks))
            launches.append((pos.initial, neg.initial))
            lower |= pos.blocks | neg.blocks
        plus = build_nbw(proj.ltl, names)
        minus = complete(build_prefix_closure_nbw(Not(proj.ltl), names))
        dist = Distributor(f.g, plus.successors, minus.successors, minus.sink)
        step = GradedStep(len(self.steps), f, f.g, plus, minus, names, dist, launches=launches)
        self.steps.append(step)

        # materialize the vectors reachable through legal distributions
        start = step.initial_vector()
        order = [start]
        seen = {start}
        i = 0
        while i < len(order):
            v = order[i]
            for letter in step.letters:
                for t in sorted(dist.targets(v, letter), key=_vec_key):
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
                        if len(order) > self.max_vectors:
                            raise CompileBudgetError(f"more than {self.max_vectors} vectors for {render(f)}")
            i += 1

        active_sets = sorted({active(v) for v in order}, key=lambda s: (len(s), s))
        for s in active_sets:
            below_sets = [step.block_id[t] for t in active_sets if set(t) < set(s)]
            step.block_id[s] = self.new_block(EXIST, list(lower) + below_sets)
        for v in order:
            q = self.new_state()
            step.vec_id[v] = q
            step.id_vec[q] = v
            self.block_of[q] = step.block_id[active(v)]
            self.names[q] = step.vector_name(v)
            self.tracks[q] = step.tracks(v)
            if step.in_single_track_good(v):
                self.good.add(q)
        for v in order:
            q = step.vec_id[v]
            self.rules[q] = self._graded_rule(step, q, launches)
        blocks = frozenset(lower) | frozenset(step.block_id.values())
        return _Fragment(step.vec_id[start], blocks)

    def _graded_rule(self, step: GradedStep, q: int, launches: list[tuple[int, int]]):
        def rule(letter: frozenset) -> PB:
            options = []
            for guess in step.letters:
                parts = [Distribute(step, step.uid, q, guess)]
                for name, (pos, neg) in zip(step.names, launches):
                    parts.append(self.rule_of(pos if name in guess else neg, letter))
                options.append(pand(*parts))
            return por(*options)

        return rule

    # ----- assembly -----

    def assemble(self, root: _Fragment, formula: Formula) -> Ghta:
        letters = alphabet(self.atoms)
        order = [root.initial]
        seen = {root.initial}
        i = 0
        while i < len(order):
            q = order[i]
            for letter in letters:
                for t in sorted(occurring_states(self.rule_of(q, letter))):
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
            i += 1
        states = tuple(sorted(order))

        def block(q: int) -> int:
            return self.block_of[q] if not q & 1 else self.block_of[q ^ 1] ^ 1

        def kind(b: int) -> str:
            k = self.kind[b & ~1]
            return k if not b & 1 else {TRANS: TRANS, EXIST: UNIV, UNIV: EXIST}[k]

        all_kinds = {b: kind(b) for b in range(self.next_block)}
        raw_below = {}
        for b in range(self.next_block):
            base = self.below[b & ~1]
            raw_below[b] = {c ^ (b & 1) for c in base}
        closed = transitive_closure(raw_below, all_kinds)
        present = {block(q) for q in states}
        good = frozenset(q for q in states if (q in self.good if not q & 1 else False))
        bad = frozenset(q for q in states if (q ^ 1 in self.good if q & 1 else False))
        names = {q: (self.names[q] if not q & 1 else "~" + self.names[q ^ 1]) for q in states}
        tracks = {q: self.tracks[q & ~1] for q in states if (q & ~1) in self.tracks}
        info = {
            "formula": render(formula),
            "steps": [
                {
                    "formula": render(s.formula),
                    "g": s.g,
                    "q_plus": s.plus.n_states,
                    "q_minus": s.minus.n_states,
                    "q1_raw": s.raw_q1,
                    "q1_materialized": len(s.vec_id),
                    "sets": len(s.block_id),
                }
                for s in self.steps
            ],
            "share_duals": self.share_duals,
        }
        rule_of = self.rule_of
        return Ghta(
            atoms=self.atoms,
            initial=root.initial,
            states=states,
            rule_fn=lambda q, letter: rule_of(q, letter),
            block_of={q: block(q) for q in states},
            kinds={b: all_kinds[b] for b in sorted(present)},
            below={b: closed[b] & present for b in present},
            good=good,
            bad=bad,
            tracks=tracks,
            names=names,
            info=info,
        )


def compile_formula(formula: Formula, atoms: Iterable[str] | None = None, share_duals: bool = True) -> Ghta:
    """Compile a state formula into a GHTA accepting its finitely branching tree models."""
    if not formula.is_state:
        raise ValueError("only state formulas can be compiled")
    atoms = formula_atoms(formula) if atoms is None else atoms
    c = Compiler(atoms, share_duals=share_duals)
    root = c.build(formula)
    a = c.assemble(root, formula)
    a.graded_steps = c.steps
    return a
