"""Independent semantic checks used to cross-validate the automata pipeline.

None of these functions touch the tree-automaton or game code paths, except
where a caller explicitly delegates nested state formulas to the main checker.

* :func:`count_x_successors` -- ``E>=n X phi`` as "at least n successors satisfy phi".
* :func:`breakpoint_search` -- one-sided search for breakpoint certificates of
  ``E>=g psi`` in a bounded unwinding.
* :func:`ctlstar_reference_check` -- classic CTL* labelling for grades <= 1,
  using an NBW product for path quantifiers.
* :func:`enumerative_check` -- exact GCTL* semantics by enumerating paths, for
  LTSs with finitely many infinite paths (every state on a cycle has exactly one
  successor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .formula import And, Atom, Const, ExistsAtLeast, Formula, Not, Or, degree, ltl_project, render
from .graphs import live_nodes, sccs
from .structures import FinitePath, Lasso, Lts, finite_paths, is_prefix, lassos_from
from .word_automata import build_nbw, closure, eval_lasso, eval_weak, weak_step

StateEval = Callable[[Lts, str, Formula], bool]


class OracleError(ValueError):
    pass


# ===== Boolean and successor counting =====


def is_boolean(f: Formula) -> bool:
    return all(isinstance(g, (Atom, Const, Not, Or, And)) for g in f.subformulas())


def eval_boolean(f: Formula, label: frozenset) -> bool:
    if isinstance(f, Atom):
        return f.name in label
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not eval_boolean(f.arg, label)
    if isinstance(f, Or):
        return eval_boolean(f.left, label) or eval_boolean(f.right, label)
    if isinstance(f, And):
        return eval_boolean(f.left, label) and eval_boolean(f.right, label)
    raise OracleError(f"not a Boolean formula: {render(f)}")


def default_state_eval(s: Lts, t: str, f: Formula) -> bool:
    """Evaluate a state formula with the most independent applicable oracle."""
    if is_boolean(f):
        return eval_boolean(f, s.label(t))
    if degree(f) <= 1:
        return ctlstar_reference_check(s, t, f)
    if has_finitely_many_paths(s, t):
        return enumerative_check(s, t, f)
    from .games import model_check

    return model_check(s, t, f)


def count_x_successors(s: Lts, state: str, phi: Formula, n: int, state_eval: StateEval | None = None) -> bool:
    """At least n successors of state satisfy phi."""
    if n <= 0:
        return True
    ev = state_eval or default_state_eval
    return sum(1 for t in s.succ[state] if ev(s, t, phi)) >= n


# ===== CTL* reference checker =====


def ctlstar_reference_check(s: Lts, state: str, formula: Formula) -> bool:
    """Classic bottom-up CTL* labelling; every quantifier must have grade <= 1."""
    return state in _ctl_label(s, formula, {})


def _ctl_label(s: Lts, f: Formula, memo: dict) -> frozenset[str]:
    if f in memo:
        return memo[f]
    if isinstance(f, Atom):
        out = frozenset(t for t in s.states if f.name in s.label(t))
    elif isinstance(f, Const):
        out = frozenset(s.states) if f.value else frozenset()
    elif isinstance(f, Not):
        out = frozenset(s.states) - _ctl_label(s, f.arg, memo)
    elif isinstance(f, Or):
        out = _ctl_label(s, f.left, memo) | _ctl_label(s, f.right, memo)
    elif isinstance(f, And):
        out = _ctl_label(s, f.left, memo) & _ctl_label(s, f.right, memo)
    elif isinstance(f, ExistsAtLeast):
        if f.g >= 2:
            raise OracleError(f"the reference checker only handles grades <= 1: {render(f)}")
        if f.g == 0:
            out = frozenset(s.states)
        else:
            out = _exists_path(s, f.body, memo)
    else:
        raise OracleError(f"not a state formula: {render(f)}")
    memo[f] = out
    return out


def _exists_path(s: Lts, psi: Formula, memo: dict) -> frozenset[str]:
    """States with an infinite path satisfying psi (product of s with an NBW)."""
    proj = ltl_project(psi)
    sets = [_ctl_label(s, theta, memo) for theta in proj.state_formulas]
    letter = {
        t: frozenset(name for name, members in zip(proj.atom_names, sets) if t in members) for t in s.states
    }
    nbw = build_nbw(proj.ltl, proj.atom_names)

    def succ(node):
        t, q = node
        return [(t2, q2) for q2 in nbw.successors(q, letter[t]) for t2 in s.succ[t]]

    roots = [(t, nbw.initial) for t in s.states]
    nodes = []
    seen = set()
    stack = list(roots)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        nodes.append(v)
        stack.extend(succ(v))
    live = live_nodes(sorted(nodes), succ, lambda v: v[1] in nbw.accepting)
    return frozenset(t for t in s.states if (t, nbw.initial) in live)


# ===== Exact enumeration for finitely many infinite paths =====


def has_finitely_many_paths(s: Lts, state: str) -> bool:
    """True iff every state on a cycle reachable from state has a single successor."""
    reach = s.reachable(state)
    for comp in sccs(reach, lambda t: s.succ[t]):
        cyclic = len(comp) > 1 or comp[0] in s.succ[comp[0]]
        if cyclic and any(len(s.succ[t]) > 1 for t in comp):
            return False
    return True


def infinite_paths(s: Lts, state: str) -> list[Lasso]:
    """All infinite paths from state as lassos (stem ends before the first repeat)."""
    if not has_finitely_many_paths(s, state):
        raise OracleError("the LTS has infinitely many infinite paths from this state")
    out = []

    def go(path: list[str]) -> None:
        last = path[-1]
        for t in s.succ[last]:
            if t in path:
                j = path.index(t)
                out.append(Lasso(tuple(path[:j]), tuple(path[j:])))
            else:
                path.append(t)
                go(path)
                path.pop()

    go([state])
    return out


@dataclass
class LassoPrefixes:
    """Weak-semantics truth of psi on every finite prefix of an ultimately periodic word."""

    psi: Formula
    stem: Sequence[frozenset]
    loop: Sequence[frozenset]
    infinite: bool = field(init=False)
    _period_from: int = field(init=False)
    _period: int = field(init=False)
    _values: dict = field(init=False)

    def __post_init__(self) -> None:
        self.infinite = eval_lasso(self.psi, self.stem, self.loop)
        subs = closure(self.psi)
        u, v = list(self.stem), list(self.loop)

        def back(letters, nxt):
            for a in reversed(letters):
                cur: dict = {}
                for g in subs:
                    cur[g] = weak_step(g, a, cur, nxt)
                nxt = cur
            return nxt

        def freeze(vec):
            return None if vec is None else frozenset(g for g in subs if vec[g])

        # For prefix length m = |u| + k|v| + r the suffix after the stem is
        # v^k v[:r]; iterate k per residue r until the suffix vector repeats.
        pre_max, lcm = 0, 1
        per_residue = []
        for r in range(len(v)):
            vec = back(v[:r], None)
            seen: dict = {}
            seq = []
            k = 0
            while freeze(vec) not in seen:
                seen[freeze(vec)] = k
                seq.append(vec)
                vec = back(v, vec)
                k += 1
            start = seen[freeze(vec)]
            per_residue.append((seq, start, k - start))
            pre_max = max(pre_max, start)
            lcm = lcm * (k - start) // math.gcd(lcm, k - start)
        self._period_from = len(u) + len(v) * (pre_max + 1)
        self._period = len(v) * lcm
        self._values = {}
        for m in range(1, self._period_from + self._period + 1):
            if m <= len(u):
                self._values[m] = eval_weak(self.psi, u[:m])
                continue
            k, r = divmod(m - len(u), len(v))
            seq, start, period = per_residue[r]
            idx = k if k < len(seq) else start + (k - start) % period
            vec = back(u, seq[idx])
            self._values[m] = bool(vec[self.psi])

    def prefix(self, m: int) -> bool:
        if m >= self._period_from + self._period:
            m = self._period_from + (m - self._period_from) % self._period
        return self._values[m]

    def all_from(self, m: int) -> bool:
        """Every prefix of length >= m satisfies psi."""
        end = max(m, self._period_from) + self._period
        return all(self.prefix(i) for i in range(m, end + 1))

    @property
    def horizon(self) -> int:
        return len(self.stem) + self._period_from + self._period + 1


def count_minimal_conservative(
    s: Lts, state: str, psi: Formula, state_eval: StateEval | None = None
) -> int:
    """Number of minimal psi-conservative paths from state (finitely many infinite paths only)."""
    ev = state_eval or enumerative_check
    proj = ltl_project(psi)
    reach = s.reachable(state)
    letter = {
        t: frozenset(n for n, theta in zip(proj.atom_names, proj.state_formulas) if ev(s, t, theta))
        for t in reach
    }
    lassos = infinite_paths(s, state)
    words = [
        LassoPrefixes(proj.ltl, [letter[t] for t in l.stem], [letter[t] for t in l.loop]) for l in lassos
    ]

    def conservative(prefix: FinitePath) -> bool:
        n = len(prefix)
        for l, w in zip(lassos, words):
            if l.prefix(n) == prefix and not (w.infinite and w.all_from(n)):
                return False
        return True

    minimal: set = set()
    for l, w in zip(lassos, words):
        found = None
        for m in range(1, w.horizon + 1):
            if conservative(l.prefix(m)):
                found = l.prefix(m)
                break
        if found is not None:
            minimal.add(("finite", found))
        elif w.infinite:
            minimal.add(("infinite", l.stem, l.loop))
    return len(minimal)


def enumerative_check(s: Lts, state: str, formula: Formula) -> bool:
    """Exact GCTL* semantics by path enumeration."""
    memo: dict = {}

    def ev(s_: Lts, t: str, f: Formula) -> bool:
        key = (t, f)
        if key not in memo:
            memo[key] = _enum_eval(s_, t, f, ev)
        return memo[key]

    return ev(s, state, formula)


def _enum_eval(s: Lts, t: str, f: Formula, ev: StateEval) -> bool:
    if isinstance(f, Atom):
        return f.name in s.label(t)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not ev(s, t, f.arg)
    if isinstance(f, Or):
        return ev(s, t, f.left) or ev(s, t, f.right)
    if isinstance(f, And):
        return ev(s, t, f.left) and ev(s, t, f.right)
    if isinstance(f, ExistsAtLeast):
        if f.g == 0:
            return True
        return count_minimal_conservative(s, t, f.body, ev) >= f.g
    raise OracleError(f"not a state formula: {render(f)}")


# ===== Breakpoint certificates =====


@dataclass
class BreakpointCertificate:
    nodes: list[FinitePath]
    through: list[Lasso]
    refutations: list[FinitePath | Lasso]


@dataclass
class BreakpointResult:
    confirmed: bool
    certificate: BreakpointCertificate | None = None

    def __str__(self) -> str:
        return "confirmed" if self.confirmed else "unknown"


def _letters(path: Sequence[str], letter: dict) -> list[frozenset]:
    return [letter[t] for t in path]


def breakpoint_search(
    s: Lts,
    state: str,
    psi: Formula,
    g: int,
    depth: int,
    lasso_bound: int,
    state_eval: StateEval | None = None,
) -> BreakpointResult:
    """Look for g pairwise non-descendant nodes y_i of the unwinding (depth <= ``depth``) such that
    the path to the father of y_i is not psi-conservative and some infinite
    path through y_i satisfies psi.  One-sided: ``confirmed`` implies
    ``E>=g psi`` holds at state; ``unknown`` proves nothing.
    """
    if g <= 0:
        return BreakpointResult(True, BreakpointCertificate([], [], []))
    ev = state_eval or default_state_eval
    proj = ltl_project(psi)
    letter = {
        t: frozenset(n for n, theta in zip(proj.atom_names, proj.state_formulas) if ev(s, t, theta))
        for t in s.reachable(state)
    }
    ltl = proj.ltl
    refuted: dict[FinitePath, FinitePath | Lasso | None] = {}

    def refutation(x: FinitePath):
        if x not in refuted:
            found = None
            for ext in finite_paths(s, x[-1], lasso_bound + 1):
                path = x + ext[1:]
                if not eval_weak(ltl, _letters(path, letter)):
                    found = path
                    break
            if found is None:
                for l in lassos_from(s, x, lasso_bound):
                    if not eval_lasso(ltl, _letters(l.stem, letter), _letters(l.loop, letter)):
                        found = l
                        break
            refuted[x] = found
        return refuted[x]

    candidates = []
    for y in finite_paths(s, state, depth + 1):
        if len(y) < 2:
            continue
        ref = refutation(y[:-1])
        if ref is None:
            continue
        lasso = next(
            (
                l
                for l in lassos_from(s, y, lasso_bound)
                if eval_lasso(ltl, _letters(l.stem, letter), _letters(l.loop, letter))
            ),
            None,
        )
        if lasso is not None:
            candidates.append((y, lasso, ref))

    chosen: list = []

    def pick(start: int) -> bool:
        if len(chosen) == g:
            return True
        for i in range(start, len(candidates)):
            y = candidates[i][0]
            if any(is_prefix(y, c[0]) or is_prefix(c[0], y) for c in chosen):
                continue
            chosen.append(candidates[i])
            if pick(i + 1):
                return True
            chosen.pop()
        return False

    if not pick(0):
        return BreakpointResult(False)
    cert = BreakpointCertificate([c[0] for c in chosen], [c[1] for c in chosen], [c[2] for c in chosen])
    return BreakpointResult(True, cert)


def validate_certificate(
    s: Lts, state: str, psi: Formula, cert: BreakpointCertificate, state_eval: StateEval | None = None
) -> bool:
    """Re-check a certificate using only the word evaluators."""
    ev = state_eval or default_state_eval
    proj = ltl_project(psi)
    letter = {
        t: frozenset(n for n, theta in zip(proj.atom_names, proj.state_formulas) if ev(s, t, theta))
        for t in s.reachable(state)
    }
    ys = cert.nodes
    for i, a in enumerate(ys):
        for b in ys[i + 1:]:
            if is_prefix(a, b) or is_prefix(b, a):
                return False
    for y, lasso, ref in zip(ys, cert.through, cert.refutations):
        if y[0] != state or len(y) < 2:
            return False
        full = lasso.prefix(len(y))
        if full != y or not lasso.is_path_of(s):
            return False
        if not eval_lasso(proj.ltl, _letters(lasso.stem, letter), _letters(lasso.loop, letter)):
            return False
        x = y[:-1]
        if isinstance(ref, Lasso):
            if ref.prefix(len(x)) != x or not ref.is_path_of(s):
                return False
            if eval_lasso(proj.ltl, _letters(ref.stem, letter), _letters(ref.loop, letter)):
                return False
        else:
            if not is_prefix(x, ref) or any(b not in s.succ[a] for a, b in zip(ref, ref[1:])):
                return False
            if eval_weak(proj.ltl, _letters(ref, letter)):
                return False
    return True
