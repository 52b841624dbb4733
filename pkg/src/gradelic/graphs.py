"""Small graph helpers shared by the automaton and game code."""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, TypeVar

N = TypeVar("N", bound=Hashable)


def reachable(roots: Iterable[N], succ: Callable[[N], Iterable[N]]) -> list[N]:
    """Nodes reachable from roots, in deterministic BFS order."""
    order: list[N] = []
    seen: set[N] = set()
    for r in roots:
        if r not in seen:
            seen.add(r)
            order.append(r)
    i = 0
    while i < len(order):
        for t in succ(order[i]):
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order


def sccs(nodes: Iterable[N], succ: Callable[[N], Iterable[N]]) -> list[list[N]]:
    """Strongly connected components (iterative Tarjan), in reverse topological order."""
    index: dict[N, int] = {}
    low: dict[N, int] = {}
    on_stack: set[N] = set()
    stack: list[N] = []
    out: list[list[N]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def has_accepting_cycle(
    roots: Iterable[N], succ: Callable[[N], Iterable[N]], accepting: Callable[[N], bool]
) -> bool:
    """True iff some cycle reachable from roots passes through an accepting node."""
    nodes = reachable(roots, succ)
    for comp in sccs(nodes, succ):
        if not any(accepting(v) for v in comp):
            continue
        if len(comp) > 1:
            return True
        v = comp[0]
        if v in set(succ(v)):
            return True
    return False


def live_nodes(nodes: Iterable[N], succ: Callable[[N], Iterable[N]], accepting: Callable[[N], bool]) -> set[N]:
    """Nodes from which some accepting cycle is reachable."""
    nodes = list(nodes)
    good: set[N] = set()
    for comp in sccs(nodes, succ):
        # reverse topological order: successors' components are final already
        members = set(comp)
        cyclic = len(comp) > 1 or comp[0] in set(succ(comp[0]))
        if cyclic and any(accepting(v) for v in comp):
            good |= members
            continue
        if any(w in good for v in comp for w in succ(v)):
            good |= members
    return good
