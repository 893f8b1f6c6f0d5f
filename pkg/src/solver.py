"""
Flat systems of recursive set equations and their unique solutions.

A system binds each variable to a finite aggregation of terms; a term is
either a variable name or an embedded CanonSet. Every such system has
exactly one solution up to bisimulation: build one node per variable,
graft the embedded sets, and read each variable's set off its node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from src.errors import WorkbenchError
from src.hyperset import CanonSet, GraphBuilder
from src.models import ErrorCode

logger = logging.getLogger(__name__)

Term = Union[str, CanonSet]


class EquationError(WorkbenchError):
    """Raised when solve() is given a system that does not validate."""

    code = ErrorCode.invalid_system


@dataclass(frozen=True)
class Diagnostic:
    code: ErrorCode
    variable: str
    message: str


@dataclass(frozen=True)
class EquationSystem:
    """Ordered bindings `variable = {term, ...}`; order is presentation only."""

    bindings: tuple[tuple[str, tuple[Term, ...]], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Iterable[Term]]) -> "EquationSystem":
        return cls(tuple((name, tuple(terms)) for name, terms in mapping.items()))

    def variables(self) -> list[str]:
        return [name for name, _ in self.bindings]

    def as_dict(self) -> dict[str, tuple[Term, ...]]:
        out: dict[str, tuple[Term, ...]] = {}
        for name, terms in self.bindings:
            out.setdefault(name, terms)
        return out

    def renamed(self, mapping: Mapping[str, str]) -> "EquationSystem":
        def rename(t: Term) -> Term:
            return mapping.get(t, t) if isinstance(t, str) else t

        return EquationSystem(
            tuple(
                (mapping.get(name, name), tuple(rename(t) for t in terms))
                for name, terms in self.bindings
            )
        )


def validate(system: EquationSystem) -> list[Diagnostic]:
    """Report duplicate bindings and unbound variables; empty iff solvable."""
    diagnostics: list[Diagnostic] = []
    bound: set[str] = set()
    for name, _ in system.bindings:
        if name in bound:
            diagnostics.append(
                Diagnostic(ErrorCode.invalid_system, name, f"duplicate binding for '{name}'")
            )
        bound.add(name)
    reported: set[str] = set()
    for name, terms in system.bindings:
        for t in terms:
            if isinstance(t, str) and t not in bound and t not in reported:
                reported.add(t)
                diagnostics.append(
                    Diagnostic(
                        ErrorCode.unbound_variable,
                        t,
                        f"variable '{t}' used in '{name}' is not bound",
                    )
                )
    return diagnostics


def system_graph(system: EquationSystem) -> tuple[GraphBuilder, dict[str, int]]:
    """One node per variable (in binding order) plus grafted embedded sets."""
    builder = GraphBuilder()
    node_of: dict[str, int] = {}
    for name in system.as_dict():
        node_of[name] = builder.add_node()
    for name, terms in system.as_dict().items():
        for t in terms:
            child = node_of[t] if isinstance(t, str) else builder.embed(t)
            builder.add_edge(node_of[name], child)
    return builder, node_of


def solve(system: EquationSystem) -> dict[str, CanonSet]:
    """Map every variable to its canonical solution."""
    diagnostics = validate(system)
    if diagnostics:
        first = diagnostics[0]
        error = EquationError(first.message, token=first.variable)
        error.code = first.code
        raise error
    builder, node_of = system_graph(system)
    solution = {name: builder.canonical(node) for name, node in node_of.items()}
    logger.debug("solved %d equations", len(solution))
    return solution


def system_of(s: CanonSet, prefix: str = "s") -> tuple[EquationSystem, str]:
    """The canonical system of s: one variable per canonical node."""
    names = [f"{prefix}{i}" for i in range(s.size)]
    system = EquationSystem(
        tuple((names[v], tuple(names[c] for c in children)) for v, children in enumerate(s.succ))
    )
    return system, names[0]
