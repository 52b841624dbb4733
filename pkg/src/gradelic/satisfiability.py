"""Satisfiability over trees of bounded branching.

Two procedures are offered.

* :func:`sat_bounded` enumerates small total LTSs in a canonical order and
  returns the first one the model checker accepts.  Sound for ``sat``; a
  negative answer only holds up to the bounds.
* :func:`sat_full` decides emptiness of the compiled automaton at a fixed
  maximum degree.  The alternating automaton is turned into a nondeterministic
  parity tree automaton whose states are pairs (macrostate, Safra tree): the
  macrostate holds the automaton states required at a node, the Safra tree
  determinizes a Büchi automaton that guesses a losing thread of the run.  The
  emptiness game is solved with the parity solver and a winning strategy of
  the builder is read back as a finite witness LTS.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .formula import Formula, atoms as formula_atoms, render
from .games import AUTOMATON, PATHFINDER, ParityGame, compiled, model_check, solve_parity
from .ghta import EXIST, UNIV, Ghta, Move, expand, models
from .structures import Lts, make_lts

DEFAULT_BUDGET = 200_000
DEFAULT_DEGREE_CAP = 2
TINY_STATES = 40


class BudgetExceeded(RuntimeError):
    """A search ran out of its configured budget (distinct from a negative answer)."""


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("GRADELIC_BUDGET")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"GRADELIC_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("GRADELIC_BUDGET must be positive")
    return value


@dataclass
class SatVerdict:
    """Outcome of a satisfiability query.

    ``outcome`` is ``"sat"``, ``"unsat-at-bound"`` or ``"unsat"``.  ``method``
    names the procedure that produced the verdict and ``bounds`` records the
    parameters a bounded answer is relative to.
    """

    outcome: str
    witness: Lts | None = None
    method: str = ""
    bounds: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def is_sat(self) -> bool:
        return self.outcome == "sat"

    def summary(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in sorted(self.bounds.items()))
        return f"{self.outcome} via {self.method}" + (f" ({extra})" if extra else "")


# ===== Bounded model search =====


def _canonical_shapes(n: int, max_degree: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Successor lists over states 0..n-1 whose BFS from 0 (successors in increasing
    order) discovers the states exactly in index order."""
    options = []
    for k in range(1, min(max_degree, n) + 1):
        options.extend(itertools.combinations(range(n), k))
    for shape in itertools.product(options, repeat=n):
        order = [0]
        seen = {0}
        i = 0
        while i < len(order):
            for t in shape[order[i]]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            i += 1
        if order == list(range(n)):
            yield shape


def candidate_models(
    atoms: Iterable[str], max_states: int, max_degree: int
) -> Iterator[Lts]:
    """All canonical total LTSs up to the bounds, smallest first."""
    atoms = tuple(sorted(set(atoms)))
    letters = [frozenset(c) for k in range(len(atoms) + 1) for c in itertools.combinations(atoms, k)]
    for n in range(1, max_states + 1):
        names = [f"s{i}" for i in range(n)]
        for shape in _canonical_shapes(n, max_degree):
            edges = [(names[i], names[j]) for i, succ in enumerate(shape) for j in succ]
            for labels in itertools.product(letters, repeat=n):
                yield make_lts(list(zip(names, labels)), edges, "s0", atoms)


def sat_bounded(formula: Formula, max_states: int = 3, max_degree: int = 2, cap: int | None = None) -> SatVerdict:
    """First canonical LTS within the bounds satisfying the formula, if any."""
    if max_states < 1 or max_degree < 1:
        raise ValueError("max_states and max_degree must be at least 1")
    cap = budget_from_env() if cap is None else cap
    tried = 0
    for s in candidate_models(formula_atoms(formula), max_states, max_degree):
        tried += 1
        if tried > cap:
            raise BudgetExceeded(f"bounded search exceeded {cap} candidates")
        if model_check(s, s.initial, formula):
            return SatVerdict("sat", s, "bounded", {"max_states": max_states, "max_degree": max_degree})
    return SatVerdict(
        "unsat-at-bound", None, "bounded", {"max_states": max_states, "max_degree": max_degree, "candidates": tried}
    )


# ===== Bad-thread automaton =====


class ThreadAutomaton:
    """Nondeterministic Büchi automaton over edge sets E ⊆ Q×Q that accepts iff some
    thread through the layered graph violates the acceptance condition.

    A state ``("t", q)`` follows a thread without commitment.  ``("e", q, j)``
    claims the thread stays in the existential set of q and track j is never
    good again; ``("u", q, c)`` claims it stays in the universal set of q and
    keeps hitting the rejecting condition (c is a round-robin track counter).
    """

    def __init__(self, a: Ghta):
        self.a = a

    def _tracks(self, q: int):
        return self.a.tracks.get(q)

    def _good(self, q: int, j: int) -> bool:
        tr = self._tracks(q)
        if tr is None:
            return q in self.a.good
        return tr[j]

    def commits(self, q: int) -> list[tuple]:
        out: list[tuple] = [("t", q)]
        kind = self.a.kind_of(q)
        tr = self._tracks(q)
        if kind == EXIST:
            if tr is None:
                if q not in self.a.good:
                    out.append(("e", q, 0))
            else:
                out.extend(("e", q, j) for j in range(len(tr)) if not tr[j])
        elif kind == UNIV:
            out.append(("u", q, 0))
        return out

    def initial(self) -> frozenset:
        return frozenset(self.commits(self.a.initial))

    def accepting(self, n: tuple) -> bool:
        if n[0] == "e":
            return True
        if n[0] == "u":
            q, c = n[1], n[2]
            tr = self._tracks(q)
            if tr is None:
                return q in self.a.bad
            if not tr:
                return True
            return c == 0 and tr[0]
        return False

    def step(self, n: tuple, edges: dict[int, list[int]]) -> list[tuple]:
        q = n[1]
        out: list[tuple] = []
        same = self.a.block_of[q]
        for q2 in edges.get(q, ()):
            if n[0] == "t":
                out.extend(self.commits(q2))
            elif self.a.block_of[q2] != same:
                continue
            elif n[0] == "e":
                if not self._good(q2, n[2]):
                    out.append(("e", q2, n[2]))
            else:
                tr = self._tracks(q)
                c = n[2]
                if tr:
                    c = (c + 1) % len(tr) if tr[c] else c
                out.append(("u", q2, c))
        return out


# ===== Safra trees =====


@dataclass(frozen=True)
class SafraNode:
    name: int
    label: frozenset
    children: tuple[SafraNode, ...] = ()


class Safra:
    """Deterministic parity automaton for a :class:`ThreadAutomaton` (compact Safra trees).

    Priorities follow the min-parity convention: an even minimum occurring
    infinitely often means the Büchi automaton accepts.
    """

    def __init__(self, nba: ThreadAutomaton, size_bound: int):
        self.nba = nba
        self.none_priority = 2 * size_bound + 1
        self._memo: dict = {}
        self._nba_memo: dict = {}

    def initial(self) -> SafraNode | None:
        label = self.nba.initial()
        return SafraNode(1, label) if label else None

    def step(self, tree: SafraNode | None, edges: dict[int, list[int]]) -> tuple[SafraNode | None, int]:
        ekey = tuple(sorted((q, tuple(v)) for q, v in edges.items()))
        key = (tree, ekey)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._step(tree, edges, ekey)
            self._memo[key] = hit
        return hit

    def _nba_step(self, x: tuple, edges: dict[int, list[int]], ekey: tuple) -> list[tuple]:
        k = (x, ekey)
        hit = self._nba_memo.get(k)
        if hit is None:
            hit = self.nba.step(x, edges)
            self._nba_memo[k] = hit
        return hit

    def _step(self, tree: SafraNode | None, edges: dict[int, list[int]], ekey: tuple) -> tuple[SafraNode | None, int]:
        if tree is None:
            return None, 1
        acc = self.nba.accepting
        used = self._names(tree)
        counter = itertools.count(max(used) + 1)
        events_red: set[int] = set()
        events_green: set[int] = set()

        # spawn children for accepting states, then move every label
        def spawn_move(v: SafraNode) -> list:
            kids = [spawn_move(c) for c in v.children]
            fin = frozenset(x for x in v.label if acc(x))
            if fin:
                kids.append([next(counter), fin, []])
            return [v.name, v.label, kids]

        def move(node: list) -> None:
            nxt = set()
            for x in node[1]:
                nxt.update(self._nba_step(x, edges, ekey))
            node[1] = frozenset(nxt)
            for c in node[2]:
                move(c)

        root = spawn_move(tree)
        move(root)

        # horizontal merge: a state stays only in the oldest branch holding it
        def horizontal(node: list, taken: set) -> None:
            node[1] = frozenset(x for x in node[1] if x not in taken)
            local: set = set()
            for c in node[2]:
                c[1] = frozenset(x for x in c[1] if x in node[1])
                horizontal(c, taken | local)
                local |= c[1]

        horizontal(root, set())

        def prune(node: list):
            kept = []
            for c in node[2]:
                r = prune(c)
                if r is not None:
                    kept.append(r)
            if not node[1]:
                collect(node, events_red)
                return None
            node[2] = kept
            union = frozenset().union(*(c[1] for c in kept)) if kept else frozenset()
            if kept and union == node[1]:
                for c in kept:
                    collect(c, events_red)
                node[2] = []
                events_green.add(node[0])
            return node

        def collect(node: list, into: set) -> None:
            into.add(node[0])
            for c in node[2]:
                collect(c, into)

        pruned = prune(root)
        if pruned is None:
            p = 2 * min(events_red) - 1 if events_red else 1
            return None, min(p, 1)
        alive = sorted(self._list_names(pruned))
        rename = {old: i + 1 for i, old in enumerate(alive)}
        candidates = [2 * n - 1 for n in events_red if n <= max(used)]
        candidates += [2 * n for n in events_green]
        priority = min(candidates) if candidates else self.none_priority
        return self._freeze(pruned, rename), priority

    @staticmethod
    def _names(t: SafraNode) -> list[int]:
        out = [t.name]
        for c in t.children:
            out.extend(Safra._names(c))
        return out

    @staticmethod
    def _list_names(node: list) -> list[int]:
        out = [node[0]]
        for c in node[2]:
            out.extend(Safra._list_names(c))
        return out

    def _freeze(self, node: list, rename: dict[int, int]) -> SafraNode:
        return SafraNode(rename[node[0]], node[1], tuple(self._freeze(c, rename) for c in node[2]))


# ===== Nondeterministic parity tree automaton =====


@dataclass(frozen=True)
class NptaState:
    macro: frozenset
    tree: SafraNode | None
    priority: int


@dataclass
class Npta:
    """Nondeterministic parity tree automaton obtained from a compiled GHTA.

    States are explored lazily.  ``transitions(state, letter, n)`` lists the
    tuples of successor states (one per direction 1..n).  Priorities use the
    max-parity convention with even accepting.
    """

    base: Ghta
    d: int
    thread: ThreadAutomaton
    safra: Safra
    top_priority: int
    budget: int = DEFAULT_BUDGET
    _models: dict = field(default_factory=dict, repr=False)
    explored: int = 0

    def initial(self) -> NptaState:
        return NptaState(frozenset({self.base.initial}), self.safra.initial(), 0)

    def _rule_models(self, q: int, letter: frozenset, n: int) -> list[frozenset]:
        key = (q, letter, n)
        hit = self._models.get(key)
        if hit is None:
            hit = models(expand(self.base.rule(q, letter), n))
            self.explored += len(hit)
            if self.explored > self.budget:
                raise BudgetExceeded(f"dealternation exceeded {self.budget} steps")
            self._models[key] = hit
        return hit

    def transitions(self, state: NptaState, letter: frozenset, n: int) -> list[tuple[NptaState, ...]]:
        per_state = []
        for q in sorted(state.macro):
            ms = self._rule_models(q, letter, n)
            if not ms:
                return []
            per_state.append((q, ms))
        out: dict = {}
        for combo in itertools.product(*(ms for _, ms in per_state)):
            edges: list[dict[int, list[int]]] = [dict() for _ in range(n)]
            for (q, _), model in zip(per_state, combo):
                for mv in model:
                    assert isinstance(mv, Move)
                    edges[mv.direction - 1].setdefault(q, []).append(mv.state)
            succs = []
            for k in range(n):
                e = {q: sorted(set(v)) for q, v in edges[k].items()}
                tree, p = self.safra.step(state.tree, e)
                macro = frozenset(x for v in e.values() for x in v)
                succs.append(NptaState(macro, tree, self.top_priority - p))
            key = tuple(succs)
            if key not in out:
                out[key] = None
                self.explored += 1
                if self.explored > self.budget:
                    raise BudgetExceeded(f"dealternation exceeded {self.budget} steps")
        return list(out)


def dealternate(a: Ghta, d: int, budget: int | None = None, max_states: int = TINY_STATES) -> Npta:
    """Nondeterministic parity tree automaton accepting the trees of branching <= d
    accepted by ``a``.  Refuses automata above the tiny-scale state bound."""
    budget = budget_from_env() if budget is None else budget
    if len(a.states) > max_states:
        raise BudgetExceeded(f"automaton has {len(a.states)} states, above the tiny-scale bound {max_states}")
    thread = ThreadAutomaton(a)
    size = 2 * len(a.states) * (1 + max((len(t) for t in a.tracks.values()), default=1)) + 2
    safra = Safra(thread, size)
    # Builder wins when the thread automaton rejects, i.e. the min priority is odd.
    top = 2 * size + 3
    return Npta(a, d, thread, safra, top, budget)


@dataclass
class EmptinessResult:
    empty: bool
    witness: Lts | None
    game_size: int


def emptiness(npta: Npta) -> EmptinessResult:
    """Solve the emptiness game; on nonemptiness, read a witness from the builder's strategy."""
    atoms = npta.base.atoms
    letters = [frozenset(c) for k in range(len(atoms) + 1) for c in itertools.combinations(atoms, k)]
    game = ParityGame()
    lose = game.add(AUTOMATON, 1, "stuck")
    game.succ[lose].append(lose)
    win = game.add(AUTOMATON, 2, "free")
    game.succ[win].append(win)
    index: dict[NptaState, int] = {}
    choice: dict[int, tuple[frozenset, tuple[NptaState, ...]]] = {}
    todo: list[NptaState] = []

    def node(st: NptaState) -> int:
        v = index.get(st)
        if v is None:
            v = game.add(AUTOMATON, st.priority, f"{sorted(st.macro)}")
            index[st] = v
            todo.append(st)
            if len(game) > npta.budget:
                raise BudgetExceeded(f"emptiness game exceeded {npta.budget} positions")
        return v

    root = node(npta.initial())
    while todo:
        st = todo.pop()
        v = index[st]
        if not st.macro:
            game.succ[v] = [win]
            continue
        outs = []
        for n in range(1, npta.d + 1):
            for letter in letters:
                for succs in npta.transitions(st, letter, n):
                    w = game.add(PATHFINDER, 0, "dir")
                    choice[w] = (letter, succs)
                    game.succ[w] = [node(x) for x in succs]
                    outs.append(w)
        game.succ[v] = outs or [lose]
    sol = solve_parity(game)
    if sol.winner[root] != AUTOMATON:
        return EmptinessResult(True, None, len(game))
    return EmptinessResult(False, _witness(game, sol.strategy, root, choice, index, atoms), len(game))


def _witness(game, strategy, root, choice, index, atoms) -> Lts:
    names: dict[tuple[int, int], str] = {}
    states: list[tuple[str, frozenset]] = []
    edges: list[tuple[str, str]] = []
    todo: list[tuple[int, int]] = []

    def name(key):
        if key not in names:
            names[key] = f"w{len(names)}"
            todo.append(key)
        return names[key]

    name((root, 0))
    done = set()
    while todo:
        key = todo.pop()
        if key in done:
            continue
        done.add(key)
        v = key[0]
        me = names[key]
        w = strategy.get(v)
        if w is None or w not in choice:
            # no obligations left: any total continuation will do
            states.append((me, frozenset()))
            edges.append((me, me))
            continue
        letter, succs = choice[w]
        states.append((me, letter))
        for k, st in enumerate(succs):
            edges.append((me, name((index[st], k))))
    return make_lts(states, edges, names[(root, 0)], atoms)


# ===== Driver =====


def default_degree(a: Ghta, cap: int = DEFAULT_DEGREE_CAP) -> int:
    return max(1, min(len(a.states) ** 2, cap))


def sat_full(formula: Formula, degree: int | None = None, budget: int | None = None) -> SatVerdict:
    """Emptiness of the compiled automaton restricted to branching <= degree."""
    a = compiled(formula)
    full_bound = max(1, len(a.states) ** 2)
    d = default_degree(a) if degree is None else degree
    npta = dealternate(a, d, budget)
    res = emptiness(npta)
    bounds = {"degree": d, "game_positions": res.game_size}
    if res.empty:
        if d >= full_bound:
            return SatVerdict("unsat", None, "full", bounds)
        return SatVerdict("unsat-at-bound", None, "full", bounds)
    w = res.witness
    if not model_check(w, w.initial, formula):
        raise AssertionError(f"witness for {render(formula)} failed re-verification")
    return SatVerdict("sat", w, "full", bounds)


def sat(
    formula: Formula,
    degree_override: int | None = None,
    mode: str = "auto",
    max_states: int = 3,
    budget: int | None = None,
) -> SatVerdict:
    """Satisfiability driver.  ``mode`` is ``full``, ``bounded`` or ``auto``
    (full emptiness when within budget, bounded search otherwise)."""
    if mode not in ("auto", "full", "bounded"):
        raise ValueError(f"unknown mode {mode!r}")
    budget = budget_from_env() if budget is None else budget
    notes = []
    if mode in ("auto", "full"):
        try:
            return sat_full(formula, degree_override, budget)
        except BudgetExceeded as exc:
            if mode == "full":
                raise
            notes.append(f"full mode skipped: {exc}")
    d = degree_override if degree_override is not None else DEFAULT_DEGREE_CAP
    verdict = sat_bounded(formula, max_states, d, budget)
    if verdict.is_sat:
        w = verdict.witness
        if not model_check(w, w.initial, formula):
            raise AssertionError(f"witness for {render(formula)} failed re-verification")
    verdict.notes.extend(notes)
    return verdict
