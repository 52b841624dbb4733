"""Finite labelled transition systems, paths, unrolling and file I/O.

An :class:`Lts` has a total edge relation: every state has a successor.  States
are identified by strings; successor lists are kept in declaration order so that
all derived constructions (games, dumps) are deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


class LtsError(ValueError):
    pass


@dataclass(frozen=True)
class Lts:
    atoms: tuple[str, ...]
    states: tuple[str, ...]
    labels: Mapping[str, frozenset[str]]
    succ: Mapping[str, tuple[str, ...]]
    initial: str
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})
        self.validate()

    def validate(self) -> None:
        if len(self.index) != len(self.states):
            raise LtsError("duplicate state identifiers")
        if self.initial not in self.index:
            raise LtsError(f"initial state {self.initial} is not declared")
        universe = set(self.atoms)
        for s in self.states:
            extra = set(self.labels.get(s, ())) - universe
            if extra:
                raise LtsError(f"state {s} uses undeclared atoms {sorted(extra)}")
            nxt = self.succ.get(s, ())
            if not nxt:
                raise LtsError(f"state {s} has no successor")
            for t in nxt:
                if t not in self.index:
                    raise LtsError(f"edge {s} -> {t} has a dangling endpoint")

    def label(self, s: str) -> frozenset[str]:
        return self.labels.get(s, frozenset())

    def degree(self, s: str) -> int:
        return len(self.succ[s])

    def max_degree(self) -> int:
        return max(len(self.succ[s]) for s in self.states)

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(s, t) for s in self.states for t in self.succ[s]]

    def reachable(self, start: str | None = None) -> list[str]:
        """States reachable from ``start`` (default: initial), in BFS order."""
        start = self.initial if start is None else start
        seen = {start}
        order = [start]
        i = 0
        while i < len(order):
            for t in self.succ[order[i]]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            i += 1
        return order

    def with_initial(self, s: str) -> Lts:
        return Lts(self.atoms, self.states, self.labels, self.succ, s)


def make_lts(
    states: Iterable[tuple[str, Iterable[str]]],
    edges: Iterable[tuple[str, str]],
    initial: str,
    atoms: Iterable[str] | None = None,
) -> Lts:
    """Build an Lts from (id, label) pairs and an edge list."""
    states = [(s, frozenset(lab)) for s, lab in states]
    ids = tuple(s for s, _ in states)
    labels = dict(states)
    succ: dict[str, list[str]] = {s: [] for s in ids}
    for a, b in edges:
        if a not in succ:
            raise LtsError(f"edge {a} -> {b} has a dangling endpoint")
        if b not in succ[a]:
            succ[a].append(b)
    if atoms is None:
        atoms = set().union(*labels.values()) if labels else set()
    return Lts(tuple(sorted(set(atoms))), ids, labels, {s: tuple(v) for s, v in succ.items()}, initial)


# ===== File I/O =====


def load_lts(text: str) -> Lts:
    """Parse the JSON LTS format ``{"atoms", "states", "edges", "initial"}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LtsError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise LtsError("top-level value must be an object")
    for key in ("states", "edges", "initial"):
        if key not in data:
            raise LtsError(f"missing key {key!r}")
    try:
        states = [(str(st["id"]), [str(a) for a in st.get("label", [])]) for st in data["states"]]
        edges = [(str(a), str(b)) for a, b in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise LtsError(f"malformed states or edges: {exc}") from exc
    atoms = data.get("atoms")
    if atoms is not None:
        atoms = [str(a) for a in atoms]
    return make_lts(states, edges, str(data["initial"]), atoms)


def dump_lts(s: Lts) -> str:
    data = {
        "atoms": list(s.atoms),
        "states": [{"id": q, "label": sorted(s.label(q))} for q in s.states],
        "edges": [[a, b] for a, b in s.edges],
        "initial": s.initial,
    }
    return json.dumps(data, indent=2) + "\n"


def lts_to_dot(s: Lts) -> str:
    lines = ["digraph lts {", '  __init [shape=point];', f'  __init -> "{s.initial}";']
    for q in s.states:
        lab = ",".join(sorted(s.label(q)))
        lines.append(f'  "{q}" [label="{q}\\n{{{lab}}}"];')
    for a, b in s.edges:
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ===== Paths =====

FinitePath = tuple[str, ...]


@dataclass(frozen=True)
class Lasso:
    """The infinite path stem . loop . loop . ..."""

    stem: tuple[str, ...]
    loop: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.loop:
            raise LtsError("lasso loop must be nonempty")

    def prefix(self, n: int) -> FinitePath:
        out = list(self.stem[:n])
        while len(out) < n:
            out.extend(self.loop[: n - len(out)])
        return tuple(out)

    def is_path_of(self, s: Lts) -> bool:
        seq = self.stem + self.loop + self.loop[:1]
        return all(b in s.succ[a] for a, b in zip(seq, seq[1:]))


def is_path(s: Lts, path: Iterable[str]) -> bool:
    path = tuple(path)
    return bool(path) and all(b in s.succ[a] for a, b in zip(path, path[1:]))


def is_prefix(a: FinitePath, b: FinitePath) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def finite_paths(s: Lts, start: str, max_len: int) -> Iterator[FinitePath]:
    """All paths from start with 1..max_len states, in DFS order."""

    def go(path: list[str]) -> Iterator[FinitePath]:
        yield tuple(path)
        if len(path) < max_len:
            for t in s.succ[path[-1]]:
                path.append(t)
                yield from go(path)
                path.pop()

    if max_len >= 1:
        yield from go([start])


def lassos_from(s: Lts, prefix: FinitePath, max_extra: int) -> Iterator[Lasso]:
    """Lassos whose infinite path starts with ``prefix``.

    The prefix is extended by up to ``max_extra`` states and then closed by an
    edge from the last state back to any earlier position.
    """
    for ext in finite_paths(s, prefix[-1], max_extra + 1):
        seq = prefix + ext[1:]
        last = seq[-1]
        for j in range(len(seq)):
            if seq[j] in s.succ[last]:
                yield Lasso(seq[:j], seq[j:])


# ===== Transformations =====


def unroll(s: Lts, k: int) -> Lts:
    """Unroll the first k steps from the initial state into a tree.

    Path nodes of depth below k point to path nodes, the depth-k frontier points
    back into an untouched copy of s.  The unwinding from the new initial state
    is isomorphic to the unwinding of s.
    """
    if k < 0:
        raise LtsError("k must be non-negative")
    if k == 0:
        return s

    def pid(path: tuple[str, ...]) -> str:
        return "u:" + "/".join(path)

    states: list[tuple[str, frozenset[str]]] = []
    edges: list[tuple[str, str]] = []
    frontier = [(s.initial,)]
    for depth in range(k + 1):
        nxt = []
        for path in frontier:
            states.append((pid(path), s.label(path[-1])))
            for t in s.succ[path[-1]]:
                if depth < k:
                    child = path + (t,)
                    edges.append((pid(path), pid(child)))
                    nxt.append(child)
                else:
                    edges.append((pid(path), t))
        frontier = nxt
    states.extend((q, s.label(q)) for q in s.states)
    edges.extend(s.edges)
    full = make_lts(states, edges, pid((s.initial,)), s.atoms)
    keep = set(full.reachable())
    return make_lts(
        [(q, full.label(q)) for q in full.states if q in keep],
        [(a, b) for a, b in full.edges if a in keep],
        full.initial,
        s.atoms,
    )


def relabel(s: Lts, assignment: Mapping[str, Iterable[str]], atoms: Iterable[str] | None = None) -> Lts:
    """Same states and edges with labels replaced by ``assignment``."""
    labels = {q: frozenset(assignment[q]) for q in s.states}
    if atoms is None:
        atoms = set().union(*labels.values()) if labels else set()
    return Lts(tuple(sorted(set(atoms))), s.states, labels, s.succ, s.initial)


def restrict_reachable(s: Lts, start: str | None = None) -> Lts:
    keep = s.reachable(start)
    keep_set = set(keep)
    return Lts(
        s.atoms,
        tuple(q for q in s.states if q in keep_set),
        {q: s.label(q) for q in keep},
        {q: s.succ[q] for q in keep},
        keep[0],
    )
