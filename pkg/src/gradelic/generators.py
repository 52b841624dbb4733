"""Seeded random LTSs and formulas for cross-validation."""

from __future__ import annotations

import random
from typing import Sequence

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    ExistsAtLeast,
    Formula,
    Next,
    Not,
    Or,
    Release,
    Until,
    length,
)
from .structures import Lts, make_lts


def _label(rng: random.Random, atoms: Sequence[str]) -> frozenset[str]:
    return frozenset(a for a in atoms if rng.random() < 0.5)


def random_tree_lts(
    rng: random.Random, atoms: Sequence[str] = ("p", "q"), max_states: int = 5, max_degree: int = 3
) -> Lts:
    """A finite tree with at most ``max_states`` nodes whose leaves carry self-loops."""
    states: list[tuple[str, frozenset]] = [("r", _label(rng, atoms))]
    edges: list[tuple[str, str]] = []
    queue = ["r"]
    while queue:
        name = queue.pop(0)
        room = max_states - len(states)
        k = rng.randint(0, min(max_degree, room)) if room > 0 else 0
        if name == "r" and room > 0 and k == 0:
            k = 1
        if k == 0:
            edges.append((name, name))
            continue
        for i in range(k):
            child = f"{name}{i}"
            states.append((child, _label(rng, atoms)))
            edges.append((name, child))
            queue.append(child)
    return make_lts(states, edges, "r", atoms)


def random_lasso_finite_lts(
    rng: random.Random, atoms: Sequence[str] = ("p", "q"), n: int = 5, max_degree: int = 3
) -> Lts:
    """An LTS with finitely many infinite paths: a random DAG over states 0..n-1 whose
    sinks close into short deterministic cycles."""
    names = [f"s{i}" for i in range(n)]
    states = [(s, _label(rng, atoms)) for s in names]
    edges = []
    for i in range(n - 1):
        k = rng.randint(0, max_degree)
        targets = sorted(rng.sample(range(i + 1, n), min(k, n - 1 - i)))
        if i == 0 and not targets:
            targets = [rng.randrange(1, n)]
        edges.extend((names[i], names[j]) for j in targets)
    has_succ = {a for a, _ in edges}
    extra = 0
    for s in names:
        if s in has_succ:
            continue
        if rng.random() < 0.5:
            edges.append((s, s))
        else:
            loop = f"c{extra}"
            extra += 1
            states.append((loop, _label(rng, atoms)))
            edges.append((s, loop))
            edges.append((loop, s))
    return make_lts(states, edges, names[0], atoms)


def random_lts(
    rng: random.Random, atoms: Sequence[str] = ("p", "q"), n: int = 4, max_degree: int = 2
) -> Lts:
    """A random total LTS with arbitrary cycles."""
    names = [f"s{i}" for i in range(n)]
    states = [(s, _label(rng, atoms)) for s in names]
    edges = []
    for s in names:
        for t in rng.sample(names, rng.randint(1, min(max_degree, n))):
            edges.append((s, t))
    return make_lts(states, edges, names[0], atoms)


def random_boolean(rng: random.Random, atoms: Sequence[str] = ("p", "q"), size: int = 3) -> Formula:
    if size <= 1:
        r = rng.random()
        if r < 0.08:
            return TRUE if rng.random() < 0.5 else FALSE
        return Atom(rng.choice(atoms))
    op = rng.choice(["not", "or", "and"])
    if op == "not":
        return Not(random_boolean(rng, atoms, size - 1))
    left = rng.randint(1, size - 2) if size > 2 else 1
    cls = Or if op == "or" else And
    return cls(random_boolean(rng, atoms, left), random_boolean(rng, atoms, max(1, size - 1 - left)))


def _path(rng: random.Random, atoms: Sequence[str], size: int, max_grade: int) -> Formula:
    if size <= 1:
        return Atom(rng.choice(atoms))
    op = rng.choice(["not", "X", "X", "U", "U", "R", "R", "or", "and", "state"])
    if op == "state":
        return _state(rng, atoms, size, max_grade)
    if op == "not":
        return Not(_path(rng, atoms, size - 1, max_grade))
    if op == "X":
        return Next(_path(rng, atoms, size - 1, max_grade))
    if size < 3:
        return Atom(rng.choice(atoms))
    left = rng.randint(1, size - 2)
    cls = {"U": Until, "R": Release, "or": Or, "and": And}[op]
    return cls(_path(rng, atoms, left, max_grade), _path(rng, atoms, size - 1 - left, max_grade))


def _state(rng: random.Random, atoms: Sequence[str], size: int, max_grade: int) -> Formula:
    if size <= 1:
        return Atom(rng.choice(atoms))
    op = rng.choice(["E", "E", "not", "or", "and"])
    if op == "E":
        g = rng.randint(1, max_grade)
        if size - g - 1 >= 1:
            return ExistsAtLeast(g, _path(rng, atoms, size - g - 1, max_grade))
        return Atom(rng.choice(atoms))
    if op == "not":
        return Not(_state(rng, atoms, size - 1, max_grade))
    if size < 3:
        return Atom(rng.choice(atoms))
    left = rng.randint(1, size - 2)
    cls = Or if op == "or" else And
    return cls(_state(rng, atoms, left, max_grade), _state(rng, atoms, size - 1 - left, max_grade))


def random_state_formula(
    rng: random.Random, atoms: Sequence[str] = ("p", "q"), max_length: int = 12, max_grade: int = 1
) -> Formula:
    """A random state formula with at least one path quantifier and length <= max_length."""
    while True:
        size = rng.randint(min(max_length, 5), max_length)
        g = rng.randint(1, max_grade)
        f = ExistsAtLeast(g, _path(rng, atoms, max(1, size - g - 1), max_grade))
        if rng.random() < 0.3:
            f = Not(f)
        if length(f) <= max_length:
            return f
