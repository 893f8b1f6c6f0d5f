"""
First-order formulas in the language of set theory.

Grammar (ASCII), loosest binding last:

    atom := NAME 'in' NAME | NAME '=' NAME
    f    := atom | '~' f | f '&' f | f '|' f | f '->' f | f '<->' f
          | ('forall' | 'exists') NAME '.' f | '(' f ')'

Precedence is ~ > & > | > -> > <->; a quantifier body extends as far
right as possible; '->' associates to the right.

After parsing, every quantifier binds a name used by no other quantifier
and by no free variable (clashes get a numeric suffix), so a name always
denotes one variable. Stratification and evaluation rely on that.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence, Union

from src.errors import WorkbenchError
from src.hyperset import CanonSet
from src.models import ErrorCode

logger = logging.getLogger(__name__)


class FormulaSyntaxError(WorkbenchError):
    code = ErrorCode.syntax_error


class EvaluationError(WorkbenchError):
    code = ErrorCode.unbound_variable


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Member:
    left: str
    right: str


@dataclass(frozen=True)
class Equal:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Atom = Union[Member, Equal]
Formula = Union[Member, Equal, Not, And, Or, Implies, Iff, Forall, Exists]

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def format_formula(f: Formula) -> str:
    if isinstance(f, Member):
        return f"{f.left} in {f.right}"
    if isinstance(f, Equal):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        return f"~{_wrapped(f.body)}"
    if isinstance(f, (Forall, Exists)):
        word = "forall" if isinstance(f, Forall) else "exists"
        return f"{word} {f.var}. {format_formula(f.body)}"
    return f"{_wrapped(f.left)} {_BINARY[type(f)]} {_wrapped(f.right)}"


def _wrapped(f: Formula) -> str:
    text = format_formula(f)
    return text if isinstance(f, Not) else f"({text})"


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: int


_SYMBOLS = [
    ("<->", "IFF"),
    ("->", "IMPLIES"),
    ("~", "NOT"),
    ("&", "AND"),
    ("|", "OR"),
    ("=", "EQ"),
    (".", "DOT"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
]
_KEYWORDS = {"in": "IN", "forall": "FORALL", "exists": "EXISTS"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for symbol, kind in _SYMBOLS:
            if text.startswith(symbol, i):
                tokens.append(Token(kind, symbol, i))
                i += len(symbol)
                break
        else:
            if ch.isascii() and (ch.isalpha() or ch == "_"):
                j = i
                while j < len(text) and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                word = text[i:j]
                tokens.append(Token(_KEYWORDS.get(word, "NAME"), word, i))
                i = j
            else:
                raise FormulaSyntaxError(
                    f"unexpected character {ch!r}", line=1, column=i + 1, token=ch
                )
    tokens.append(Token("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self._tokens = tokenize(text)
        self._pos = 0

    @property
    def current(self) -> Token:
        return self._tokens[self._pos]

    def _fail(self, expected: str) -> FormulaSyntaxError:
        tok = self.current
        found = "end of input" if tok.kind == "EOF" else repr(tok.value)
        return FormulaSyntaxError(
            f"expected {expected}, found {found}",
            line=1,
            column=tok.pos + 1,
            token=tok.value or None,
        )

    def eat(self, kind: str, expected: str) -> Token:
        if self.current.kind != kind:
            raise self._fail(expected)
        self._pos += 1
        return self._tokens[self._pos - 1]

    def parse(self) -> Formula:
        f = self.iff()
        self.eat("EOF", "end of input")
        return f

    def iff(self) -> Formula:
        left = self.implies()
        while self.current.kind == "IFF":
            self._pos += 1
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.current.kind == "IMPLIES":
            self._pos += 1
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.current.kind == "OR":
            self._pos += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.current.kind == "AND":
            self._pos += 1
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind = self.current.kind
        if kind == "NOT":
            self._pos += 1
            return Not(self.unary())
        if kind in ("FORALL", "EXISTS"):
            self._pos += 1
            var = self.eat("NAME", "a variable after the quantifier").value
            self.eat("DOT", "'.'")
            body = self.iff()
            return Forall(var, body) if kind == "FORALL" else Exists(var, body)
        if kind == "LPAREN":
            self._pos += 1
            f = self.iff()
            self.eat("RPAREN", "')'")
            return f
        return self.atom()

    def atom(self) -> Formula:
        left = self.eat("NAME", "a formula").value
        tok = self.current
        if tok.kind == "IN":
            self._pos += 1
            return Member(left, self.eat("NAME", "a name after 'in'").value)
        if tok.kind == "EQ":
            self._pos += 1
            return Equal(left, self.eat("NAME", "a name after '='").value)
        raise self._fail("'in' or '='")


def parse_formula(text: str) -> Formula:
    """Parse and rename binders apart."""
    return rename_apart(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Member, Equal)):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


def atoms(f: Formula) -> Iterator[Atom]:
    """Atoms in left-to-right order."""
    if isinstance(f, (Member, Equal)):
        yield f
    elif isinstance(f, (Not, Forall, Exists)):
        yield from atoms(f.body)
    else:
        yield from atoms(f.left)
        yield from atoms(f.right)


def variables(f: Formula) -> list[str]:
    """Every name in order of first occurrence, binders included."""
    seen: dict[str, None] = {}

    def walk(g: Formula) -> None:
        if isinstance(g, (Member, Equal)):
            seen.setdefault(g.left)
            seen.setdefault(g.right)
        elif isinstance(g, (Forall, Exists)):
            seen.setdefault(g.var)
            walk(g.body)
        elif isinstance(g, Not):
            walk(g.body)
        else:
            walk(g.left)
            walk(g.right)

    walk(f)
    return list(seen)


def rename_apart(f: Formula) -> Formula:
    """Give every binder a name distinct from all free names and other binders."""
    used = set(free_vars(f))

    def fresh(name: str) -> str:
        if name not in used:
            used.add(name)
            return name
        i = 1
        while f"{name}_{i}" in used:
            i += 1
        used.add(f"{name}_{i}")
        return f"{name}_{i}"

    def walk(g: Formula, scope: Mapping[str, str]) -> Formula:
        if isinstance(g, Member):
            return Member(scope.get(g.left, g.left), scope.get(g.right, g.right))
        if isinstance(g, Equal):
            return Equal(scope.get(g.left, g.left), scope.get(g.right, g.right))
        if isinstance(g, Not):
            return Not(walk(g.body, scope))
        if isinstance(g, (Forall, Exists)):
            new = fresh(g.var)
            return type(g)(new, walk(g.body, {**scope, g.var: new}))
        return type(g)(walk(g.left, scope), walk(g.right, scope))

    return walk(f, {})


# ---------------------------------------------------------------------------
# Stratification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessStep:
    """One traversed constraint: level(target) = level(source) + weight."""

    atom: Atom
    source: str
    target: str
    weight: int


@dataclass(frozen=True)
class StratResult:
    levels: Optional[dict[str, int]] = None
    witness: tuple[WitnessStep, ...] = ()

    @property
    def stratified(self) -> bool:
        return self.levels is not None

    @property
    def witness_weight(self) -> int:
        return sum(step.weight for step in self.witness)


def stratify(f: Formula) -> StratResult:
    """
    Find levels with level(x) + 1 = level(y) for every x in y and
    level(x) = level(y) for every x = y, or a cycle of constraints whose
    weights do not cancel.
    """
    names = variables(f)
    edges: dict[str, list[tuple[str, int, Atom]]] = {v: [] for v in names}
    for atom in atoms(f):
        weight = 1 if isinstance(atom, Member) else 0
        edges[atom.left].append((atom.right, weight, atom))
        edges[atom.right].append((atom.left, -weight, atom))

    level: dict[str, int] = {}
    parent: dict[str, tuple[str, int, Atom]] = {}
    for start in names:
        if start in level:
            continue
        level[start] = 0
        component = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, weight, atom in edges[u]:
                if v not in level:
                    level[v] = level[u] + weight
                    parent[v] = (u, weight, atom)
                    component.append(v)
                    queue.append(v)
                elif level[v] != level[u] + weight:
                    witness = _witness(parent, u, v, weight, atom)
                    logger.debug("unstratified: %d-step witness", len(witness))
                    return StratResult(witness=witness)
        lowest = min(level[v] for v in component)
        for v in component:
            level[v] -= lowest
    return StratResult(levels={v: level[v] for v in names})


def _tree_path(parent: Mapping[str, tuple[str, int, Atom]], v: str) -> list[str]:
    path = [v]
    while path[-1] in parent:
        path.append(parent[path[-1]][0])
    return path[::-1]


def _witness(parent, u: str, v: str, weight: int, atom: Atom) -> tuple[WitnessStep, ...]:
    to_u, to_v = _tree_path(parent, u), _tree_path(parent, v)
    shared = 0
    while shared < min(len(to_u), len(to_v)) and to_u[shared] == to_v[shared]:
        shared += 1
    steps: list[WitnessStep] = []
    for node in to_u[shared:]:
        p, w, a = parent[node]
        steps.append(WitnessStep(a, p, node, w))
    steps.append(WitnessStep(atom, u, v, weight))
    for node in reversed(to_v[shared:]):
        p, w, a = parent[node]
        steps.append(WitnessStep(a, node, p, -w))
    return tuple(steps)


# ---------------------------------------------------------------------------
# Evaluation over a finite universe
# ---------------------------------------------------------------------------


def evaluate(
    f: Formula, env: Mapping[str, CanonSet], universe: Sequence[CanonSet]
) -> bool:
    """
    Truth of f with free names from env and quantifiers over universe.

    env values may lie outside the universe; quantified claims about their
    members then only see the members that are in the universe.
    """
    missing = free_vars(f) - env.keys()
    if missing:
        name = sorted(missing)[0]
        raise EvaluationError(f"no value for free variable '{name}'", token=name)
    return _eval(f, dict(env), universe)


def _eval(f: Formula, env: dict[str, CanonSet], universe: Sequence[CanonSet]) -> bool:
    if isinstance(f, Member):
        return env[f.left] in env[f.right].element_set
    if isinstance(f, Equal):
        return env[f.left] == env[f.right]
    if isinstance(f, Not):
        return not _eval(f.body, env, universe)
    if isinstance(f, And):
        return _eval(f.left, env, universe) and _eval(f.right, env, universe)
    if isinstance(f, Or):
        return _eval(f.left, env, universe) or _eval(f.right, env, universe)
    if isinstance(f, Implies):
        return not _eval(f.left, env, universe) or _eval(f.right, env, universe)
    if isinstance(f, Iff):
        return _eval(f.left, env, universe) == _eval(f.right, env, universe)

    universal = isinstance(f, Forall)
    previous = env.get(f.var)
    result = universal
    for u in universe:
        env[f.var] = u
        if _eval(f.body, env, universe) != universal:
            result = not universal
            break
    if previous is None:
        env.pop(f.var, None)
    else:
        env[f.var] = previous
    return result
