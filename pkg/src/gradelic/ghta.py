"""Graded hesitant tree automata (GHTA): data model, expansion, dualization and
the hesitancy validator.

Transition formulas are positive Boolean formulas (:class:`PB` nodes).  Their
leaves are ``Move(d, q)`` (send a copy in state q to direction d), the
distribution terms ``Diamond``/``Box`` of graded automata, and the factored
``Distribute`` term produced by the compiler for graded quantifier states, which
stands for the disjunction of ``Diamond(X)`` over all legal distributions X.

States are integers.  Acceptance is hesitant: a play trapped in an exist set
must visit G infinitely often, one trapped in a univ set must visit B finitely
often.  States of graded quantifier blocks may additionally carry *tracks*: a
tuple of flags, one per coordinate that has its own Büchi obligation.  In an
exist set every track must be good infinitely often; in a univ set (the dual)
some track must be good only finitely often.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

TRANS, EXIST, UNIV = "trans", "exist", "univ"
_DUAL_KIND = {TRANS: TRANS, EXIST: UNIV, UNIV: EXIST}


# ===== Positive Boolean formulas =====


class PB:
    __slots__ = ()

    def children(self) -> tuple[PB, ...]:
        return ()


@dataclass(frozen=True)
class BoolConst(PB):
    value: bool

    def __repr__(self) -> str:
        return "true" if self.value else "false"


PB_TRUE = BoolConst(True)
PB_FALSE = BoolConst(False)


class _Junction(PB):
    __slots__ = ("items", "_hash")

    def __init__(self, items: tuple[PB, ...]):
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_hash", hash((type(self).__name__, items)))

    def __setattr__(self, key, value):
        raise AttributeError("PB nodes are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and other._hash == self._hash
            and other.items == self.items
        )

    def children(self) -> tuple[PB, ...]:
        return self.items

    def __repr__(self) -> str:
        sep = " | " if isinstance(self, POr) else " & "
        return "(" + sep.join(map(repr, self.items)) + ")"


class POr(_Junction):
    __slots__ = ()


class PAnd(_Junction):
    __slots__ = ()


@dataclass(frozen=True)
class Move(PB):
    direction: int
    state: int

    def __repr__(self) -> str:
        return f"({self.direction},{self.state})"


@dataclass(frozen=True)
class Diamond(PB):
    states: tuple[int, ...]

    def __repr__(self) -> str:
        return "<>(" + ",".join(map(str, self.states)) + ")"


@dataclass(frozen=True)
class Box(PB):
    states: tuple[int, ...]

    def __repr__(self) -> str:
        return "[](" + ",".join(map(str, self.states)) + ")"


@dataclass(frozen=True)
class Distribute(PB):
    """Disjunction of ``Diamond(X)`` over legal distributions X of ``vector`` on ``letter``.

    ``dual`` turns it into the conjunction of ``Box(X)``; ``flip`` toggles the
    polarity bit of every produced state id (see :mod:`gradelic.compiler`).
    """

    owner: object = field(compare=False, hash=False)
    owner_id: int
    vector: int
    letter: frozenset
    dual: bool = False
    flip: bool = False

    def __repr__(self) -> str:
        head = "[]Dist" if self.dual else "<>Dist"
        sign = "~" if self.flip else ""
        return f"{head}({sign}{self.vector}/{{{','.join(sorted(map(str, self.letter)))}}})"


def por(*items: PB) -> PB:
    out: list[PB] = []
    seen: set[PB] = set()
    for it in items:
        parts = it.items if isinstance(it, POr) else (it,)
        for p in parts:
            if p == PB_TRUE:
                return PB_TRUE
            if p == PB_FALSE or p in seen:
                continue
            seen.add(p)
            out.append(p)
    if not out:
        return PB_FALSE
    if len(out) == 1:
        return out[0]
    return POr(tuple(out))


def pand(*items: PB) -> PB:
    out: list[PB] = []
    seen: set[PB] = set()
    for it in items:
        parts = it.items if isinstance(it, PAnd) else (it,)
        for p in parts:
            if p == PB_FALSE:
                return PB_FALSE
            if p == PB_TRUE or p in seen:
                continue
            seen.add(p)
            out.append(p)
    if not out:
        return PB_TRUE
    if len(out) == 1:
        return out[0]
    return PAnd(tuple(out))


def dual(theta: PB) -> PB:
    """Swap and/or, true/false, Diamond/Box.  An involution."""
    if isinstance(theta, BoolConst):
        return PB_FALSE if theta.value else PB_TRUE
    if isinstance(theta, POr):
        return PAnd(tuple(dual(c) for c in theta.items))
    if isinstance(theta, PAnd):
        return POr(tuple(dual(c) for c in theta.items))
    if isinstance(theta, Diamond):
        return Box(theta.states)
    if isinstance(theta, Box):
        return Diamond(theta.states)
    if isinstance(theta, Distribute):
        return Distribute(theta.owner, theta.owner_id, theta.vector, theta.letter, not theta.dual, theta.flip)
    return theta


def map_states(theta: PB, fn: Callable[[int], int]) -> PB:
    """Rename states in Move/Diamond/Box leaves (Distribute terms are left alone)."""
    if isinstance(theta, POr):
        return POr(tuple(map_states(c, fn) for c in theta.items))
    if isinstance(theta, PAnd):
        return PAnd(tuple(map_states(c, fn) for c in theta.items))
    if isinstance(theta, Move):
        return Move(theta.direction, fn(theta.state))
    if isinstance(theta, Diamond):
        return Diamond(tuple(map(fn, theta.states)))
    if isinstance(theta, Box):
        return Box(tuple(map(fn, theta.states)))
    return theta


def leaves(theta: PB) -> Iterator[PB]:
    stack = [theta]
    while stack:
        t = stack.pop()
        if isinstance(t, _Junction):
            stack.extend(reversed(t.items))
        else:
            yield t


def expand(theta: PB, d: int) -> PB:
    """Replace distribution terms by formulas over directions ``1..d``.

    ``Diamond(q1..qk)`` becomes the disjunction over ordered k-tuples of
    distinct directions of the conjunction of ``Move(s_i, q_i)``; ``Box`` is the
    dual.  With k > d the Diamond is false and the Box is true.
    """
    if d < 1:
        raise ValueError("expansion degree must be at least 1")
    memo: dict[PB, PB] = {}

    def go(t: PB) -> PB:
        if t in memo:
            return memo[t]
        if isinstance(t, POr):
            r = por(*(go(c) for c in t.items))
        elif isinstance(t, PAnd):
            r = pand(*(go(c) for c in t.items))
        elif isinstance(t, Diamond):
            r = por(
                *(
                    pand(*(Move(s, q) for s, q in zip(dirs, t.states)))
                    for dirs in itertools.permutations(range(1, d + 1), len(t.states))
                )
            )
        elif isinstance(t, Box):
            r = pand(
                *(
                    por(*(Move(s, q) for s, q in zip(dirs, t.states)))
                    for dirs in itertools.permutations(range(1, d + 1), len(t.states))
                )
            )
        elif isinstance(t, Distribute):
            r = t.owner.expand_distribute(t, d)
        else:
            r = t
        memo[t] = r
        return r

    return go(theta)


def occurring_states(theta: PB) -> set[int]:
    """States mentioned by a formula; distribution terms report their successor vectors."""
    out: set[int] = set()
    for leaf in leaves(theta):
        if isinstance(leaf, Move):
            out.add(leaf.state)
        elif isinstance(leaf, (Diamond, Box)):
            out.update(leaf.states)
        elif isinstance(leaf, Distribute):
            out.update(leaf.owner.distribute_targets(leaf))
    return out


def models(theta: PB) -> list[frozenset]:
    """Minimal satisfying sets of leaves (DNF).  Exponential; small formulas only."""
    if isinstance(theta, BoolConst):
        return [frozenset()] if theta.value else []
    if isinstance(theta, POr):
        out: list[frozenset] = []
        for c in theta.items:
            out.extend(models(c))
        return _minimal(out)
    if isinstance(theta, PAnd):
        acc = [frozenset()]
        for c in theta.items:
            acc = _minimal([a | b for a in acc for b in models(c)])
            if not acc:
                break
        return acc
    return [frozenset({theta})]


def _minimal(sets: Iterable[frozenset]) -> list[frozenset]:
    out: list[frozenset] = []
    for s in sorted(set(sets), key=lambda x: (len(x), sorted(map(repr, x)))):
        if not any(k <= s for k in out):
            out.append(s)
    return out


def satisfies(theta: PB, chosen: set) -> bool:
    """Truth of theta when exactly the leaves in ``chosen`` are true."""
    if isinstance(theta, BoolConst):
        return theta.value
    if isinstance(theta, POr):
        return any(satisfies(c, chosen) for c in theta.items)
    if isinstance(theta, PAnd):
        return all(satisfies(c, chosen) for c in theta.items)
    return theta in chosen


# ===== Automaton =====


@dataclass
class Ghta:
    """A graded hesitant tree automaton over the alphabet ``2^atoms``.

    ``rule(q, letter)`` yields the (unexpanded) transition formula; letters are
    restricted to ``atoms`` before lookup so labels may carry extra atoms.
    """

    atoms: tuple[str, ...]
    initial: int
    states: tuple[int, ...]
    rule_fn: Callable[[int, frozenset], PB]
    block_of: dict[int, int]
    kinds: dict[int, str]
    below: dict[int, frozenset[int]]
    good: frozenset[int] = frozenset()
    bad: frozenset[int] = frozenset()
    tracks: dict[int, tuple[bool, ...]] = field(default_factory=dict)
    names: dict[int, str] = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._atom_set = frozenset(self.atoms)
        self.below = transitive_closure(self.below, self.kinds)

    def rule(self, q: int, letter: Iterable[str]) -> PB:
        key = (q, frozenset(letter) & self._atom_set)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.rule_fn(*key)
            self._cache[key] = hit
        return hit

    @property
    def letters(self) -> list[frozenset]:
        out = []
        for k in range(len(self.atoms) + 1):
            out.extend(frozenset(c) for c in itertools.combinations(self.atoms, k))
        return out

    def kind_of(self, q: int) -> str:
        return self.kinds[self.block_of[q]]

    def block_states(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {b: [] for b in self.kinds}
        for q in self.states:
            out[self.block_of[q]].append(q)
        return out

    def leq(self, b1: int, b2: int) -> bool:
        return b1 == b2 or b1 in self.below[b2]

    def depth(self) -> int:
        """Number of sets on the longest chain of the order."""
        memo: dict[int, int] = {}

        def height(b: int) -> int:
            if b not in memo:
                memo[b] = 1 + max((height(c) for c in self.below[b]), default=0)
            return memo[b]

        return max((height(b) for b in self.kinds), default=0)

    def name(self, q: int) -> str:
        return self.names.get(q, str(q))

    # ----- dumps -----

    def to_json(self, letters: Iterable[frozenset] | None = None) -> dict:
        letters = list(self.letters if letters is None else letters)
        return {
            "atoms": list(self.atoms),
            "initial": self.initial,
            "states": [
                {
                    "id": q,
                    "name": self.name(q),
                    "set": self.block_of[q],
                    "good": q in self.good,
                    "bad": q in self.bad,
                    "tracks": list(self.tracks[q]) if q in self.tracks else None,
                }
                for q in self.states
            ],
            "sets": [
                {"id": b, "type": self.kinds[b], "below": sorted(self.below[b])} for b in sorted(self.kinds)
            ],
            "transitions": [
                {"state": q, "letter": sorted(a), "formula": repr(self.rule(q, a))}
                for q in self.states
                for a in letters
            ],
            "info": self.info,
        }

    def to_dot(self) -> str:
        lines = ["digraph ghta {", "  compound=true;"]
        for b, members in sorted(self.block_states().items()):
            lines.append(f"  subgraph cluster_{b} {{")
            lines.append(f'    label="set {b} ({self.kinds[b]})";')
            for q in members:
                shape = "doublecircle" if q in self.good or q in self.bad else "circle"
                label = self.name(q).replace('"', "'")
                lines.append(f'    s{q} [shape={shape}, label="{label}"];')
            lines.append("  }")
        for q in self.states:
            targets = set()
            for a in self.letters:
                targets |= occurring_states(self.rule(q, a))
            for t in sorted(targets):
                lines.append(f"  s{q} -> s{t};")
        lines.append(f'  __init [shape=point]; __init -> s{self.initial};')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dump_json(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def transitive_closure(below: dict[int, Iterable[int]], kinds: dict[int, str]) -> dict[int, frozenset[int]]:
    """Close the strict order; raises on cycles."""
    direct = {b: set(below.get(b, ())) for b in kinds}
    out: dict[int, frozenset[int]] = {}
    visiting: set[int] = set()

    def close(b: int) -> frozenset[int]:
        if b in out:
            return out[b]
        if b in visiting:
            raise ValueError(f"the order on sets has a cycle through set {b}")
        visiting.add(b)
        acc = set()
        for c in direct[b]:
            acc.add(c)
            acc |= close(c)
        visiting.discard(b)
        out[b] = frozenset(acc)
        return out[b]

    for b in kinds:
        close(b)
    return out


def dualize(a: Ghta) -> Ghta:
    """Dual automaton: complemented language, same states, partition and order."""
    base = a.rule

    def rule_fn(q: int, letter: frozenset) -> PB:
        return dual(base(q, letter))

    return Ghta(
        atoms=a.atoms,
        initial=a.initial,
        states=a.states,
        rule_fn=rule_fn,
        block_of=dict(a.block_of),
        kinds={b: _DUAL_KIND[k] for b, k in a.kinds.items()},
        below=dict(a.below),
        good=a.bad,
        bad=a.good,
        tracks=dict(a.tracks),
        names=dict(a.names),
        info=dict(a.info),
    )


# ===== Hesitancy validation =====


@dataclass
class HesitancyReport:
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _same_set_weight(theta: PB, members: frozenset[int], conj_is_sum: bool) -> int:
    """Largest number of same-set leaves in one DNF disjunct (or CNF conjunct).

    With ``conj_is_sum`` a conjunction adds its children's weights and a
    disjunction takes the maximum, which bounds the DNF count; otherwise the
    roles swap, bounding the CNF count.
    """
    if isinstance(theta, BoolConst):
        return 0
    if isinstance(theta, Move):
        return 1 if theta.state in members else 0
    if isinstance(theta, (Diamond, Box)):
        raise ValueError("distribution terms must be expanded before validation")
    ws = [_same_set_weight(c, members, conj_is_sum) for c in theta.items]
    if isinstance(theta, PAnd) == conj_is_sum:
        return sum(ws)
    return max(ws, default=0)


def validate_hesitancy(a: Ghta, d_max: int, letters: Iterable[frozenset] | None = None) -> HesitancyReport:
    """Check ordering, transient and single-occurrence conditions on ``expand_n`` for n <= d_max."""
    report = HesitancyReport()
    letters = list(a.letters if letters is None else letters)
    blocks = {b: frozenset(m) for b, m in a.block_states().items()}
    for q in a.states:
        b = a.block_of[q]
        kind = a.kinds[b]
        for letter in letters:
            raw = a.rule(q, letter)
            for n in range(1, d_max + 1):
                theta = expand(raw, n)
                report.checked += 1
                where = f"state {a.name(q)}, letter {sorted(letter)}, degree {n}"
                for leaf in leaves(theta):
                    if isinstance(leaf, Move) and not a.leq(a.block_of[leaf.state], b):
                        report.violations.append(f"(i) {where}: state {a.name(leaf.state)} lies above its set")
                if kind == TRANS:
                    if any(isinstance(l, Move) and l.state in blocks[b] for l in leaves(theta)):
                        report.violations.append(f"(ii) {where}: transient set refers to itself")
                elif kind == EXIST:
                    if _same_set_weight(theta, blocks[b], True) > 1:
                        report.violations.append(f"(iii) {where}: a disjunct has two same-set states")
                else:
                    if _same_set_weight(theta, blocks[b], False) > 1:
                        report.violations.append(f"(iii) {where}: a conjunct has two same-set states")
    return report


def make_ghta(
    atoms: Iterable[str],
    initial: int,
    table: dict[tuple[int, frozenset], PB],
    block_of: dict[int, int],
    kinds: dict[int, str],
    below: dict[int, Iterable[int]] | None = None,
    good: Iterable[int] = (),
    bad: Iterable[int] = (),
    default: PB = PB_FALSE,
) -> Ghta:
    """Hand-built automaton from an explicit transition table (missing entries use ``default``)."""
    atoms = tuple(sorted(set(atoms)))

    def rule_fn(q: int, letter: frozenset) -> PB:
        return table.get((q, letter), default)

    return Ghta(
        atoms=atoms,
        initial=initial,
        states=tuple(sorted(block_of)),
        rule_fn=rule_fn,
        block_of=dict(block_of),
        kinds=dict(kinds),
        below={b: frozenset((below or {}).get(b, ())) for b in kinds},
        good=frozenset(good),
        bad=frozenset(bad),
    )
