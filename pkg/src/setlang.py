"""
Set-literal language: parsing, rendering and DOT export.

Grammar (ASCII):

    program := ('let' NAME '=' set ';')* set
    set     := '{}' | '{' set (',' set)* '}' | NAME | '@I'
    NAME    := [A-Za-z_][A-Za-z0-9_]*

`let` bindings may be mutually recursive. `@I` (the placeholder) is only
accepted when parsing totality terms. A program is exactly an equation
system: nested literals are flattened into fresh variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import Optional, Union

from src.errors import WorkbenchError
from src.hyperset import Apg, CanonSet
from src.models import ErrorCode
from src.solver import EquationSystem, Term, system_graph

INLINE_LIMIT = 40


class SetSyntaxError(WorkbenchError):
    code = ErrorCode.syntax_error


class UnboundNameError(WorkbenchError):
    code = ErrorCode.unbound_name


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ref:
    name: str
    line: int
    column: int


@dataclass(frozen=True)
class Literal:
    items: tuple["Node", ...]


@dataclass(frozen=True)
class Hole:
    pass


Node = Union[Ref, Literal, Hole]


@dataclass(frozen=True)
class Binding:
    name: str
    value: Node
    line: int
    column: int


@dataclass(frozen=True)
class Program:
    bindings: tuple[Binding, ...]
    body: Node


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


_PUNCT = {"{": "LBRACE", "}": "RBRACE", ",": "COMMA", ";": "SEMI", "=": "EQ"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            col, i = col + 1, i + 1
            continue
        if text.startswith("@I", i):
            tokens.append(Token("HOLE", "@I", line, col))
            col, i = col + 2, i + 2
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < len(text) and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token("LET" if word == "let" else "NAME", word, line, col))
            col, i = col + (j - i), j
            continue
        raise SetSyntaxError(f"unexpected character {ch!r}", line=line, column=col, token=ch)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_hole: bool) -> None:
        self._tokens = tokenize(text)
        self._pos = 0
        self._allow_hole = allow_hole

    @property
    def current(self) -> Token:
        return self._tokens[self._pos]

    def _fail(self, expected: str) -> SetSyntaxError:
        tok = self.current
        found = "end of input" if tok.kind == "EOF" else repr(tok.value)
        return SetSyntaxError(
            f"expected {expected}, found {found}",
            line=tok.line,
            column=tok.column,
            token=tok.value or None,
        )

    def eat(self, kind: str, expected: str) -> Token:
        tok = self.current
        if tok.kind != kind:
            raise self._fail(expected)
        self._pos += 1
        return tok

    def program(self) -> Program:
        bindings: list[Binding] = []
        while self.current.kind == "LET":
            self.eat("LET", "'let'")
            name = self.eat("NAME", "a name after 'let'")
            self.eat("EQ", "'='")
            value = self.set()
            self.eat("SEMI", "';'")
            bindings.append(Binding(name.value, value, name.line, name.column))
        body = self.set()
        self.eat("EOF", "end of input")
        return Program(tuple(bindings), body)

    def set(self) -> Node:
        tok = self.current
        if tok.kind == "NAME":
            self._pos += 1
            return Ref(tok.value, tok.line, tok.column)
        if tok.kind == "HOLE":
            if not self._allow_hole:
                raise SetSyntaxError(
                    "placeholder @I is only allowed in totality terms",
                    line=tok.line,
                    column=tok.column,
                    token=tok.value,
                )
            self._pos += 1
            return Hole()
        self.eat("LBRACE", "'{', a name or '@I'" if self._allow_hole else "'{' or a name")
        items: list[Node] = []
        if self.current.kind != "RBRACE":
            items.append(self.set())
            while self.current.kind == "COMMA":
                self._pos += 1
                items.append(self.set())
        self.eat("RBRACE", "',' or '}'")
        return Literal(tuple(items))


def parse_program(text: str, allow_hole: bool = False) -> Program:
    return _Parser(text, allow_hole).program()


# ---------------------------------------------------------------------------
# Flattening into equation systems
# ---------------------------------------------------------------------------


def to_system(program: Program) -> tuple[EquationSystem, str]:
    """Flatten a program; returns the system and the variable of the body."""
    declared: dict[str, Binding] = {}
    for b in program.bindings:
        if b.name in declared:
            raise SetSyntaxError(
                f"duplicate binding for '{b.name}'", line=b.line, column=b.column, token=b.name
            )
        declared[b.name] = b

    def check(ref: Ref) -> None:
        if ref.name not in declared:
            raise UnboundNameError(
                f"unbound name '{ref.name}'", line=ref.line, column=ref.column, token=ref.name
            )

    # `let a = b;` makes a an alias; follow chains to a literal binding
    def resolve(ref: Ref) -> str:
        seen: list[str] = []
        name = ref.name
        check(ref)
        while isinstance(declared[name].value, Ref):
            seen.append(name)
            target = declared[name].value
            check(target)
            name = target.name
            if name in seen:
                b = declared[name]
                raise SetSyntaxError(
                    f"circular alias through '{name}'", line=b.line, column=b.column, token=name
                )
        return name

    bindings: list[tuple[str, tuple[Term, ...]]] = []
    fresh = count(1)

    def flatten(node: Node, name: Optional[str] = None) -> str:
        if isinstance(node, Ref):
            return resolve(node)
        if isinstance(node, Hole):
            raise SetSyntaxError("placeholder @I cannot appear in a set program")
        var = name or f"${next(fresh)}"
        slot = len(bindings)
        bindings.append((var, ()))
        bindings[slot] = (var, tuple(flatten(item) for item in node.items))
        return var

    for b in program.bindings:
        if isinstance(b.value, Literal):
            flatten(b.value, b.name)
    # an alias shares its target's members, hence its solution
    for b in program.bindings:
        if isinstance(b.value, Ref):
            target = resolve(b.value)
            bindings.append((b.name, dict(bindings)[target]))
    root = flatten(program.body)
    return EquationSystem(tuple(bindings)), root


def parse_set(text: str) -> Apg:
    """Parse a set literal or let-program into its picture."""
    system, root = to_system(parse_program(text))
    builder, node_of = system_graph(system)
    start = node_of[root]
    order = [start]
    index = {start: 0}
    for v in order:
        for c in builder.succ[v]:
            if c not in index:
                index[c] = len(order)
                order.append(c)
    return Apg.from_succ([[index[c] for c in builder.succ[v]] for v in order], 0)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _inline_sizes(s: CanonSet) -> dict[int, int]:
    """Unfolded tree size of every well-founded node (capped past the limit)."""
    pending = [len(children) for children in s.succ]
    parents: list[list[int]] = [[] for _ in s.succ]
    for p, children in enumerate(s.succ):
        for c in children:
            parents[c].append(p)
    ready = [v for v in range(s.size) if pending[v] == 0]
    sizes: dict[int, int] = {}
    while ready:
        v = ready.pop()
        sizes[v] = min(INLINE_LIMIT + 1, 1 + sum(sizes[c] for c in s.succ[v]))
        for p in parents[v]:
            pending[p] -= 1
            if pending[p] == 0:
                ready.append(p)
    return sizes


def render_set(s: CanonSet, prefix: str = "s") -> str:
    """
    Minimal self-describing text for s.

    Small well-founded parts print as braces; everything else is bound by
    `let` to a name derived from its canonical index.
    """
    sizes = _inline_sizes(s)
    inline = {v for v, size in sizes.items() if size <= INLINE_LIMIT}
    named: list[int] = []
    seen: set[int] = set()

    def text(v: int) -> str:
        if v in inline:
            return "{" + ", ".join(text(c) for c in s.succ[v]) + "}"
        if v not in seen:
            seen.add(v)
            named.append(v)
        return f"{prefix}{v}"

    body = text(0)
    lets: dict[int, str] = {}
    i = 0
    while i < len(named):
        v = named[i]
        lets[v] = "{" + ", ".join(text(c) for c in s.succ[v]) + "}"
        i += 1
    parts = [f"let {prefix}{v} = {lets[v]};" for v in sorted(lets)]
    return " ".join(parts + [body])


def render_system(system: EquationSystem) -> str:
    """
    Equations one per line. Embedded sets print inline when they have a
    braces form, otherwise as a parenthesised let-program.
    """
    lines = []
    for name, terms in system.bindings:
        rendered = []
        for t in terms:
            if isinstance(t, str):
                rendered.append(t)
                continue
            literal = render_set(t)
            rendered.append(literal if not literal.startswith("let ") else f"({literal})")
        lines.append(f"{name} = {{{', '.join(rendered)}}}")
    return "\n".join(lines)


def to_dot(s: CanonSet, name: str = "hyperset") -> str:
    """Deterministic Graphviz digraph of the canonical picture."""
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for v in range(s.size):
        shape = ", shape=doublecircle" if v == 0 else ""
        lines.append(f'  n{v} [label="{v}"{shape}];')
    for v, children in enumerate(s.succ):
        for c in children:
            lines.append(f"  n{v} -> n{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"
