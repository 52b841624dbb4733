"""Membership games and model checking.

The membership game of an automaton A and an LTS S is played between the
*automaton* (player 0) and the *pathfinder* (player 1).  Main positions are
triples (q, c, t): automaton state q, track counter c and LTS state t.  From a
main position the play walks down the parse tree of the expanded transition
formula of q on the label of t: the automaton resolves disjunctions, the
pathfinder conjunctions, and a leaf ``Move(d, q')`` continues at
``(q', c', d-th successor of t)``.  Constant leaves lead to the sinks.

Priorities follow the hesitant acceptance condition under max-parity (even
wins for the automaton): in an exist set accepting states get 2 and the others
1, in a univ set rejecting states get 1 and the others 0, transient states 0.  States with tracks use a round-robin counter: the counter
points at one track, and advances when that track is good; a main position is
"accepting" when the pointed-to track is good.  For untracked states the G/B
sets are used directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .compiler import compile_formula
from .formula import Formula, atoms as formula_atoms, render
from .ghta import EXIST, PB, TRANS, UNIV, BoolConst, Ghta, Move, PAnd, POr, expand
from .structures import Lts

AUTOMATON, PATHFINDER = 0, 1


@dataclass
class ParityGame:
    owner: list[int] = field(default_factory=list)
    priority: list[int] = field(default_factory=list)
    succ: list[list[int]] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    initial: int = 0

    def add(self, owner: int, priority: int, label: str = "") -> int:
        self.owner.append(owner)
        self.priority.append(priority)
        self.succ.append([])
        self.labels.append(label)
        return len(self.owner) - 1

    def __len__(self) -> int:
        return len(self.owner)

    def predecessors(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in self.owner]
        for v, outs in enumerate(self.succ):
            for w in outs:
                pred[w].append(v)
        return pred

    def to_dot(self) -> str:
        lines = ["digraph game {"]
        for v in range(len(self)):
            shape = "box" if self.owner[v] == PATHFINDER else "ellipse"
            label = (self.labels[v] or str(v)).replace('"', "'")
            lines.append(f'  n{v} [shape={shape}, label="{label}\\np{self.priority[v]}"];')
        for v, outs in enumerate(self.succ):
            for w in outs:
                lines.append(f"  n{v} -> n{w};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class Solution:
    winner: list[int]
    strategy: dict[int, int]  # automaton positions in its winning region -> chosen successor
    opponent_strategy: dict[int, int] = field(default_factory=dict)

    def region(self, player: int) -> list[int]:
        return [v for v, w in enumerate(self.winner) if w == player]


# ===== Solver =====


def _attractor(game: ParityGame, pred: list[list[int]], nodes: set[int], target: set[int], player: int):
    """Attractor of ``target`` for ``player`` inside the subgame ``nodes``.

    Returns the attractor and an attracting move for each of the player's
    nodes added to it.
    """
    attr = set(target)
    strat: dict[int, int] = {}
    count = {}
    queue = sorted(target)
    head = 0
    while head < len(queue):
        w = queue[head]
        head += 1
        for v in pred[w]:
            if v not in nodes or v in attr:
                continue
            if game.owner[v] == player:
                attr.add(v)
                strat[v] = w
                queue.append(v)
            else:
                if v not in count:
                    count[v] = sum(1 for x in game.succ[v] if x in nodes)
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strat


def _solve(game: ParityGame, pred: list[list[int]], nodes: set[int]):
    win = (set(), set())
    strat: tuple[dict[int, int], dict[int, int]] = ({}, {})
    while nodes:
        top = max(game.priority[v] for v in nodes)
        p = top % 2
        u = {v for v in nodes if game.priority[v] == top}
        a, a_strat = _attractor(game, pred, nodes, u, p)
        sub_win, sub_strat = _solve(game, pred, nodes - a)
        if not sub_win[1 - p]:
            win[p].update(nodes)
            strat[p].update(sub_strat[p])
            strat[p].update(a_strat)
            for v in sorted(u):
                if game.owner[v] == p:
                    strat[p][v] = next(w for w in game.succ[v] if w in nodes)
            break
        b, b_strat = _attractor(game, pred, nodes, sub_win[1 - p], 1 - p)
        win[1 - p].update(b)
        strat[1 - p].update(sub_strat[1 - p])
        strat[1 - p].update(b_strat)
        nodes = nodes - b
    return win, strat


def solve_parity(game: ParityGame) -> Solution:
    """Zielonka's recursive algorithm; exact, deterministic, positional strategies."""
    pred = game.predecessors()
    win, strat = _solve(game, pred, set(range(len(game))))
    winner = [0 if v in win[0] else 1 for v in range(len(game))]
    s0 = {v: w for v, w in sorted(strat[0].items()) if winner[v] == 0 and game.owner[v] == AUTOMATON}
    s1 = {v: w for v, w in sorted(strat[1].items()) if winner[v] == 1 and game.owner[v] == PATHFINDER}
    return Solution(winner, s0, s1)


# ===== Automata with fixed direction sets =====


@dataclass
class Ahta:
    """A GHTA whose distribution terms are expanded over directions ``1..d``."""

    base: Ghta
    d: int
    _cache: dict = field(default_factory=dict, repr=False)

    def rule(self, q: int, letter: Iterable[str]) -> PB:
        letter = frozenset(letter) & frozenset(self.base.atoms)
        key = (q, letter)
        if key not in self._cache:
            self._cache[key] = expand(self.base.rule(q, letter), self.d)
        return self._cache[key]

    @property
    def directions(self) -> range:
        return range(1, self.d + 1)


def ghta_to_ahta(a: Ghta, d: int) -> Ahta:
    if d < 1:
        raise ValueError("d must be at least 1")
    return Ahta(a, d)


class _Expansions:
    """Per-degree expansions of one GHTA, shared by all games built from it."""

    def __init__(self, a: Ghta):
        self.a = a
        self.by_degree: dict[int, Ahta] = {}

    def rule(self, q: int, letter: frozenset, d: int) -> PB:
        if d not in self.by_degree:
            self.by_degree[d] = Ahta(self.a, d)
        return self.by_degree[d].rule(q, letter)


def _expansions(a: Ghta) -> _Expansions:
    ex = getattr(a, "_expansions", None)
    if ex is None:
        ex = _Expansions(a)
        a._expansions = ex
    return ex


# ===== Membership game =====


class DegreeError(ValueError):
    pass


def _priority(a: Ghta, q: int, c: int) -> int:
    kind = a.kinds[a.block_of[q]]
    if kind == TRANS:
        return 0
    tracks = a.tracks.get(q)
    if tracks is not None:
        accepting = (not tracks) or tracks[c]
        if kind == EXIST:
            return 2 if accepting else 1
        return 1 if accepting else 0
    if kind == EXIST:
        return 2 if q in a.good else 1
    return 1 if q in a.bad else 0


def _next_counter(a: Ghta, q: int, c: int, q2: int) -> int:
    tracks = a.tracks.get(q)
    if not tracks or a.block_of[q2] != a.block_of[q]:
        return 0
    return (c + 1) % len(tracks) if tracks[c] else c


def build_membership_game(automaton: Ghta | Ahta, s: Lts, root: str | None = None) -> ParityGame:
    """Game whose initial position is won by the automaton iff it accepts the unwinding of s from root.

    A GHTA is expanded at every node with that node's own degree.  An AHTA is
    used literally: moves into directions a node does not have are losing for
    the automaton, and nodes with more than ``d`` successors are rejected.
    """
    if isinstance(automaton, Ahta):
        a = automaton.base
        d_fixed = automaton.d
        if s.max_degree() > d_fixed:
            bad = next(t for t in s.states if s.degree(t) > d_fixed)
            raise DegreeError(f"state {bad} has {s.degree(bad)} successors, more than {d_fixed}")

        def rule(q: int, t: str) -> PB:
            return automaton.rule(q, s.label(t))

    else:
        a = automaton
        ex = _expansions(a)

        def rule(q: int, t: str) -> PB:
            return ex.rule(q, s.label(t) & frozenset(a.atoms), s.degree(t))

    root = s.initial if root is None else root
    game = ParityGame()
    top = game.add(AUTOMATON, 2, "true")
    bot = game.add(AUTOMATON, 1, "false")
    game.succ[top].append(top)
    game.succ[bot].append(bot)
    index: dict = {}
    todo: list[tuple[int, int, str]] = []

    def main(q: int, c: int, t: str) -> int:
        key = (q, c, t)
        v = index.get(key)
        if v is None:
            v = game.add(AUTOMATON, _priority(a, q, c), f"{a.name(q)}#{c}@{t}")
            index[key] = v
            todo.append(key)
        return v

    game.initial = main(a.initial, 0, root)
    while todo:
        q, c, t = todo.pop()
        v = index[(q, c, t)]
        theta = rule(q, t)
        succ_t = s.succ[t]
        local: dict[int, int] = {}

        def node(f: PB) -> int:
            if isinstance(f, BoolConst):
                return top if f.value else bot
            if isinstance(f, Move):
                if f.direction > len(succ_t):
                    return bot
                return main(f.state, _next_counter(a, q, c, f.state), succ_t[f.direction - 1])
            fid = id(f)
            hit = local.get(fid)
            if hit is not None:
                return hit
            owner = AUTOMATON if isinstance(f, POr) else PATHFINDER
            w = game.add(owner, 0)
            local[fid] = w
            game.succ[w] = [node(ch) for ch in f.items]
            return w

        game.succ[v] = [node(theta)]
    return game


# ===== Model checking =====

_COMPILED: dict[tuple, Ghta] = {}


def compiled(formula: Formula, atoms: Iterable[str] = ()) -> Ghta:
    """Compile with memoization on (formula, atom universe)."""
    universe = tuple(sorted(set(formula_atoms(formula))))
    key = (render(formula), universe)
    a = _COMPILED.get(key)
    if a is None:
        if len(_COMPILED) > 256:
            _COMPILED.clear()
        a = compile_formula(formula, universe)
        _COMPILED[key] = a
    return a


def model_check(s: Lts, state: str, formula: Formula) -> bool:
    """Does the unwinding of s from ``state`` satisfy the state formula?"""
    if state not in s.index:
        raise ValueError(f"unknown state {state}")
    a = compiled(formula)
    game = build_membership_game(a, s, state)
    sol = solve_parity(game)
    return sol.winner[game.initial] == AUTOMATON


def check_with_game(s: Lts, state: str, formula: Formula) -> tuple[bool, ParityGame, Solution]:
    a = compiled(formula)
    game = build_membership_game(a, s, state)
    sol = solve_parity(game)
    return sol.winner[game.initial] == AUTOMATON, game, sol
