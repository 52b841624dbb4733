"""GCTL* formulas: AST, parser, canonical printer, metrics and LTL projection.

State formulas are atoms, constants, graded existential quantifiers and Boolean
combinations of state formulas.  Path formulas additionally allow the temporal
operators X, U and R.  Sugar (``->``, ``F``, ``G``, ``E``, ``A``, ``A<g``) is
expanded by the parser, so every AST only contains the core node kinds below.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator


class FormulaError(ValueError):
    """Raised for syntax errors and ill-classified formulas."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


# ===== AST =====


class Formula:
    """Base class of all AST nodes.  Nodes are immutable and hashable."""

    __slots__ = ()

    @property
    def children(self) -> tuple[Formula, ...]:
        return ()

    @property
    def is_state(self) -> bool:
        raise NotImplementedError

    @property
    def is_path(self) -> bool:
        return not self.is_state

    def __str__(self) -> str:
        return render(self)

    def subformulas(self) -> Iterator[Formula]:
        """Pre-order traversal including ``self``."""
        yield self
        for c in self.children:
            yield from c.subformulas()


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    @property
    def is_state(self) -> bool:
        return True


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    @property
    def is_state(self) -> bool:
        return True


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.arg,)

    @cached_property
    def is_state(self) -> bool:
        return self.arg.is_state


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    @cached_property
    def is_state(self) -> bool:
        return self.left.is_state and self.right.is_state


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    @cached_property
    def is_state(self) -> bool:
        return self.left.is_state and self.right.is_state


@dataclass(frozen=True)
class ExistsAtLeast(Formula):
    g: int
    body: Formula

    def __post_init__(self) -> None:
        if self.g < 0:
            raise FormulaError(f"negative grade {self.g}")

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.body,)

    @property
    def is_state(self) -> bool:
        return True


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.arg,)

    @property
    def is_state(self) -> bool:
        return False


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    @property
    def is_state(self) -> bool:
        return False


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    @property
    def is_state(self) -> bool:
        return False


TRUE = Const(True)
FALSE = Const(False)


# ===== Sugar constructors =====


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def eventually(a: Formula) -> Formula:
    return Until(TRUE, a)


def always(a: Formula) -> Formula:
    return Release(FALSE, a)


def exists(body: Formula, g: int = 1) -> Formula:
    return ExistsAtLeast(g, body)


def forall_but(body: Formula, g: int = 1) -> Formula:
    """``A<g body``: fewer than g minimal conservative paths violate body."""
    return Not(ExistsAtLeast(g, Not(body)))


def negate(f: Formula) -> Formula:
    """Negation that cancels a leading double negation."""
    return f.arg if isinstance(f, Not) else Not(f)


# ===== Printer =====


def render(f: Formula) -> str:
    """Canonical fully parenthesized rendering.  ``parse(render(f)) == f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return "!" + render(f.arg)
    if isinstance(f, Next):
        return "X " + render(f.arg)
    if isinstance(f, ExistsAtLeast):
        return f"E>={f.g} " + render(f.body)
    ops = {Or: "|", And: "&", Until: "U", Release: "R"}
    op = ops[type(f)]
    return f"({render(f.left)} {op} {render(f.right)})"


# ===== Parser =====

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<exists>E>=\s*\d+)|(?P<forall>A<\s*\d+)"
    r"|(?P<op>->|[!&|()])"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_']*))"
)

_KEYWORDS = {"X", "F", "G", "U", "R", "E", "A", "true", "false"}


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        tok = m.group(kind)
        if kind == "word" and tok in _KEYWORDS:
            kind = "kw"
        tokens.append(_Token(kind, tok, start))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    # Precedence, loosest first: ->, |, &, U/R, unary/quantifiers.

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.text != text:
            raise FormulaError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)

    def parse(self) -> Formula:
        f = self.implication()
        tok = self.peek()
        if tok.kind != "eof":
            raise FormulaError(f"unexpected token {tok.text!r}", tok.pos)
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().text == "->":
            self.take()
            return implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek().text == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.temporal()
        while self.peek().text == "&":
            self.take()
            f = And(f, self.temporal())
        return f

    def temporal(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok.text == "U":
            self.take()
            return Until(left, self.temporal())
        if tok.text == "R":
            self.take()
            return Release(left, self.temporal())
        return left

    def unary(self) -> Formula:
        tok = self.take()
        if tok.text == "!":
            return Not(self.unary())
        if tok.text == "X":
            return Next(self.unary())
        if tok.text == "F":
            return eventually(self.unary())
        if tok.text == "G":
            return always(self.unary())
        if tok.kind == "exists":
            g = int(re.search(r"\d+", tok.text).group())
            return ExistsAtLeast(g, self.unary())
        if tok.kind == "forall":
            g = int(re.search(r"\d+", tok.text).group())
            return forall_but(self.unary(), g)
        if tok.text == "E":
            return ExistsAtLeast(1, self.unary())
        if tok.text == "A":
            return forall_but(self.unary(), 1)
        if tok.text == "true":
            return TRUE
        if tok.text == "false":
            return FALSE
        if tok.text == "(":
            f = self.implication()
            self.expect(")")
            return f
        if tok.kind == "word":
            return Atom(tok.text)
        raise FormulaError(f"unexpected token {tok.text or 'end of input'!r}", tok.pos)


def parse_any(text: str) -> Formula:
    """Parse a state or path formula."""
    return _Parser(text).parse()


def parse(text: str) -> Formula:
    """Parse a GCTL* state formula; path formulas at the root are rejected."""
    f = parse_any(text)
    if not f.is_state:
        raise FormulaError("root must be a state formula; wrap path formulas in a quantifier")
    return f


# ===== Metrics =====


def length(f: Formula) -> int:
    """Formula length, where a quantifier E>=g adds g + 1."""
    if isinstance(f, ExistsAtLeast):
        return f.g + 1 + length(f.body)
    return 1 + sum(length(c) for c in f.children)


def degree(f: Formula) -> int:
    """Largest grade occurring in f (0 without quantifiers)."""
    own = f.g if isinstance(f, ExistsAtLeast) else 0
    return max([own] + [degree(c) for c in f.children])


def metrics(f: Formula) -> tuple[int, int]:
    return length(f), degree(f)


def atoms(f: Formula) -> tuple[str, ...]:
    """Sorted atom names occurring in f."""
    return tuple(sorted({s.name for s in f.subformulas() if isinstance(s, Atom)}))


def quantifier_depth(f: Formula) -> int:
    own = 1 if isinstance(f, ExistsAtLeast) else 0
    return own + max((quantifier_depth(c) for c in f.children), default=0)


# ===== Maximal state subformulas and LTL projection =====


def max_state_subformulas(psi: Formula) -> tuple[Formula, ...]:
    """Maximal state subformulas of psi, ordered by canonical rendering.

    Boolean constants inside a path formula stay part of its LTL skeleton and
    are not reported.  A state formula is its own single maximal subformula.
    """
    found: set[Formula] = set()

    def walk(f: Formula) -> None:
        if isinstance(f, Const):
            return
        if f.is_state:
            found.add(f)
            return
        for c in f.children:
            walk(c)

    walk(psi)
    return tuple(sorted(found, key=render))


@dataclass(frozen=True)
class Projection:
    """An LTL skeleton whose atom ``atom_names[i]`` stands for ``state_formulas[i]``."""

    ltl: Formula
    state_formulas: tuple[Formula, ...]
    atom_names: tuple[str, ...]

    def meaning(self, atom_name: str) -> Formula:
        return self.state_formulas[self.atom_names.index(atom_name)]


def ltl_project(psi: Formula) -> Projection:
    """Replace every maximal state subformula of psi by a fresh atom ``a1, a2, ...``."""
    subs = max_state_subformulas(psi)
    names = tuple(f"a{i + 1}" for i in range(len(subs)))
    table = dict(zip(subs, names))

    def go(f: Formula) -> Formula:
        if f in table:
            return Atom(table[f])
        if isinstance(f, Const):
            return f
        if isinstance(f, Not):
            return Not(go(f.arg))
        if isinstance(f, Next):
            return Next(go(f.arg))
        if isinstance(f, (Or, And, Until, Release)):
            return type(f)(go(f.left), go(f.right))
        raise FormulaError(f"unexpected node in path formula: {render(f)}")

    return Projection(go(psi), subs, names)


def substitute(ltl: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace atoms of an LTL formula by formulas (inverse of ltl_project)."""
    if isinstance(ltl, Atom):
        return mapping.get(ltl.name, ltl)
    if isinstance(ltl, Const):
        return ltl
    if isinstance(ltl, (Not, Next)):
        return type(ltl)(substitute(ltl.arg, mapping))
    if isinstance(ltl, ExistsAtLeast):
        return ExistsAtLeast(ltl.g, substitute(ltl.body, mapping))
    return type(ltl)(substitute(ltl.left, mapping), substitute(ltl.right, mapping))


def is_ltl(f: Formula) -> bool:
    return not any(isinstance(s, ExistsAtLeast) for s in f.subformulas())


def is_gctl(f: Formula) -> bool:
    """True when every temporal operator sits directly under a quantifier,
    possibly behind one negation, and has state-formula arguments."""

    def temporal_ok(t: Formula) -> bool:
        return isinstance(t, (Next, Until, Release)) and all(c.is_state for c in t.children)

    def ok(g: Formula) -> bool:
        if isinstance(g, (Next, Until, Release)):
            return False
        if isinstance(g, ExistsAtLeast):
            body = g.body.arg if isinstance(g.body, Not) else g.body
            return temporal_ok(body) and all(ok(c) for c in body.children)
        return all(ok(c) for c in g.children)

    return ok(f)
