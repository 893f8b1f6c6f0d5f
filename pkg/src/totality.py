"""
Finite universes, ideal and complete totalities, n-constructibility.

The ideal totality of a predicate P(x) is the list E of universe members
satisfying P. The complete totality adds, for every hypothetical object
built from the ideal aggregate I = from_elements(E) that satisfies P, the
same object with I replaced by the totality itself. Hypothetical objects
are placeholder terms (PTerms) whose `@I` leaves stand for the aggregate
under construction. Replacing I by the totality is done by binding those
leaves to the variable C of one equation

    C = {e1, ..., en, h1[C], ..., hm[C]}

and solving it; strongest (bisimulation) equality then decides which
built objects coincide with C or with members of E.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, count, product
from math import comb
from typing import Iterable, Mapping, Optional, Sequence, Union

from src.errors import ResourceLimitError, WorkbenchError
from src.hyperset import CanonSet, canonical_from_succ, canonicalize, from_elements
from src.logic import Formula, evaluate, format_formula, free_vars
from src.models import ErrorCode
from src.setlang import Hole, Literal, Ref, parse_program, parse_set, render_set
from src.solver import EquationSystem, Term, solve

logger = logging.getLogger(__name__)

COMPLETE_VAR = "C"
DEFAULT_MAX_POOL = 200_000

ORD_FORMULA = (
    "(forall a. a in x -> (forall b. b in a -> b in x))"
    " & (forall a. forall b. (a in x & b in x) -> (a in b | a = b | b in a))"
    " & ((exists a. a in x) -> (exists e. e in x & (forall b. ~(b in e))))"
)

PRESETS: dict[str, str] = {
    "empty": "~(x = x)",
    "universal": "x = x",
    "russell": "~(x in x)",
    "self-membered": "x in x",
    "ord": ORD_FORMULA,
    "ord-below": f"({ORD_FORMULA}) & x in bound",
    "wf-below": "x in bound",
}

STRATEGIES = ("bare", "singleton", "successor", "pair-with")

_PAIR_WITH = re.compile(r"pair-with\((?P<literal>.*)\)", re.DOTALL)


class PredicateError(WorkbenchError):
    code = ErrorCode.predicate_rejected


class StrategyError(WorkbenchError):
    code = ErrorCode.unknown_strategy


def predicate_text(name_or_formula: str) -> str:
    """Expand a preset name; anything else is returned as formula text."""
    return PRESETS.get(name_or_formula.strip(), name_or_formula)


# ---------------------------------------------------------------------------
# Universes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Universe:
    """
    Every hyperset with at most k canonical nodes, in (size, shape) order.

    `extras` holds computed sets adjoined after enumeration; quantifiers
    range over members followed by extras.
    """

    k: int
    members: tuple[CanonSet, ...]
    extras: tuple[CanonSet, ...] = ()

    @property
    def all_members(self) -> tuple[CanonSet, ...]:
        return self.members + self.extras

    @cached_property
    def _index(self) -> frozenset[CanonSet]:
        return frozenset(self.all_members)

    def __contains__(self, s: object) -> bool:
        return s in self._index

    def __len__(self) -> int:
        return len(self.members) + len(self.extras)

    def adjoin(self, sets: Iterable[CanonSet]) -> "Universe":
        """A universe that additionally quantifies over `sets`."""
        fresh = tuple(dict.fromkeys(s for s in sets if s not in self._index))
        return Universe(k=self.k, members=self.members, extras=self.extras + fresh)


def _bfs_numbered(succ: Sequence[Sequence[int]]) -> bool:
    """True iff breadth-first search from 0 reaches every node in index order."""
    order = [0]
    seen = {0}
    for v in order:
        for c in sorted(succ[v]):
            if c not in seen:
                seen.add(c)
                order.append(c)
    return order == list(range(len(succ)))


def enumerate_universe(k: int, limit: Optional[int] = None) -> Universe:
    """
    Brute-force every pointed digraph with at most k nodes, keep the
    accessible ones, canonicalise and deduplicate.

    Only graphs numbered in breadth-first order are canonicalised; every
    accessible graph is isomorphic to one of those.
    """
    if k < 1:
        raise WorkbenchError(f"universe bound k must be at least 1, got {k}", token=str(k))
    if limit is not None and k > limit:
        logger.warning("refusing universe enumeration for k=%d (limit %d)", k, limit)
        raise ResourceLimitError("max_universe_k", limit, k)

    found: set[CanonSet] = set()
    for m in range(1, k + 1):
        for bits in product((False, True), repeat=m * m):
            succ = [[c for c in range(m) if bits[p * m + c]] for p in range(m)]
            if _bfs_numbered(succ):
                found.add(canonical_from_succ(succ))
    members = tuple(sorted(found, key=lambda s: (s.size, s.succ)))
    logger.info("universe k=%d: %d members", k, len(members))
    return Universe(k=k, members=members)


# ---------------------------------------------------------------------------
# Placeholder terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Placeholder:
    """The `@I` leaf: the aggregate under construction."""


@dataclass(frozen=True)
class Given:
    value: CanonSet


@dataclass(frozen=True)
class Aggregate:
    parts: tuple["PTerm", ...]


PTerm = Union[Placeholder, Given, Aggregate]
Strategy = Union[str, Placeholder, Aggregate]


def format_term(t: PTerm) -> str:
    if isinstance(t, Placeholder):
        return "@I"
    if isinstance(t, Given):
        text = render_set(t.value)
        return f"({text})" if text.startswith("let ") else text
    return "{" + ", ".join(format_term(p) for p in t.parts) + "}"


def instantiate(t: PTerm, ideal: CanonSet) -> CanonSet:
    """The concrete set h[I]: every placeholder leaf becomes `ideal`."""
    if isinstance(t, Placeholder):
        return ideal
    if isinstance(t, Given):
        return t.value
    return from_elements(instantiate(p, ideal) for p in t.parts)


def has_placeholder(t: PTerm) -> bool:
    if isinstance(t, Placeholder):
        return True
    if isinstance(t, Given):
        return False
    return any(has_placeholder(p) for p in t.parts)


def parse_term(text: str) -> PTerm:
    """Parse a set literal with `@I` leaves, e.g. `{@I, {}}`."""
    program = parse_program(text, allow_hole=True)
    if program.bindings:
        first = program.bindings[0]
        raise StrategyError(
            "placeholder terms cannot use 'let'", line=first.line, column=first.column, token="let"
        )
    term = _term_of(program.body)
    if not has_placeholder(term):
        raise StrategyError(f"term {text!r} contains no placeholder @I", token=text)
    return term


def _term_of(node: Union[Ref, Literal, Hole]) -> PTerm:
    if isinstance(node, Hole):
        return Placeholder()
    if isinstance(node, Ref):
        raise StrategyError(
            f"name '{node.name}' is not allowed in a placeholder term",
            line=node.line,
            column=node.column,
            token=node.name,
        )
    parts = tuple(_term_of(item) for item in node.items)
    if all(isinstance(p, Given) for p in parts):
        return Given(from_elements(p.value for p in parts))
    return Aggregate(parts)


def split_strategies(text: str) -> list[str]:
    """Split `bare,pair-with({}, {{}})` on commas outside brackets."""
    names: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == "," and depth == 0:
            names.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    tail = "".join(current).strip()
    if tail:
        names.append(tail)
    return [n for n in names if n]


def check_strategy(name: str) -> None:
    """Raise StrategyError unless `name` is a known strategy."""
    name = name.strip()
    if name in STRATEGIES:
        return
    match = _PAIR_WITH.fullmatch(name)
    if match is None:
        raise StrategyError(
            f"unknown strategy '{name}' (expected one of {', '.join(STRATEGIES)} "
            "or pair-with(LITERAL))",
            token=name,
        )
    parse_set(match.group("literal"))


def _expand(strategy: Strategy, universe: Universe, ideal: Sequence[CanonSet]) -> list[PTerm]:
    if not isinstance(strategy, str):
        return [strategy]
    name = strategy.strip()
    check_strategy(name)
    if name == "bare":
        return [Placeholder()]
    if name == "singleton":
        return [Aggregate((Placeholder(),))]
    if name == "successor":
        return [Aggregate(tuple(Given(e) for e in ideal) + (Placeholder(),))]
    if name == "pair-with":
        return [Aggregate((Placeholder(), Given(u))) for u in universe.all_members]
    literal = _PAIR_WITH.fullmatch(name).group("literal")
    return [Aggregate((Placeholder(), Given(canonicalize(parse_set(literal)))))]


def _generate(
    strategies: Sequence[Strategy], universe: Universe, ideal: Sequence[CanonSet]
) -> list[PTerm]:
    terms: dict[PTerm, None] = {}
    for strategy in strategies:
        for term in _expand(strategy, universe, ideal):
            terms.setdefault(term, None)
    return list(terms)


def placeholder_terms(
    strategies: Sequence[Strategy],
    universe: Universe,
    budget: int,
    ideal: Sequence[CanonSet] = (),
) -> list[PTerm]:
    """
    Terms from named strategies and user PTerms, duplicates dropped, in
    strategy order and capped at `budget`. `ideal` feeds `successor`.
    """
    if budget < 1:
        raise StrategyError(f"budget must be at least 1, got {budget}", token=str(budget))
    return _generate(strategies, universe, ideal)[:budget]


# ---------------------------------------------------------------------------
# Totalities
# ---------------------------------------------------------------------------


def _free_variable(predicate: Formula, constants: Mapping[str, CanonSet]) -> str:
    free = sorted(free_vars(predicate) - constants.keys())
    if len(free) != 1:
        raise PredicateError(
            "a totality predicate must have exactly one free variable besides "
            f"constants, found {len(free)}: {', '.join(free) or 'none'}",
            token=free[1] if len(free) > 1 else None,
        )
    return free[0]


def ideal_totality(
    predicate: Formula,
    universe: Universe,
    constants: Optional[Mapping[str, CanonSet]] = None,
) -> list[CanonSet]:
    """All universe members satisfying the predicate, in universe order."""
    constants = dict(constants or {})
    variable = _free_variable(predicate, constants)
    scope = universe.all_members
    return [
        u
        for u in scope
        if evaluate(predicate, {**constants, variable: u}, scope)
    ]


@dataclass(frozen=True)
class TermTrial:
    """One placeholder term and its verdict on the hypothetical object h[I]."""

    term: PTerm
    instance: CanonSet
    accepted: bool
    value: Optional[CanonSet] = None
    identified_with: Optional[str] = None


@dataclass(frozen=True)
class TotalityReport:
    predicate: str
    variable: str
    k: int
    ideal_elements: tuple[CanonSet, ...]
    ideal_aggregate: CanonSet
    ideal_satisfies: bool
    trials: tuple[TermTrial, ...]
    equation: EquationSystem
    complete: CanonSet
    intruders: tuple[CanonSet, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def accepted_terms(self) -> tuple[TermTrial, ...]:
        return tuple(t for t in self.trials if t.accepted)


def complete_totality(
    predicate: Formula,
    universe: Universe,
    strategies: Sequence[Strategy],
    budget: int,
    constants: Optional[Mapping[str, CanonSet]] = None,
) -> TotalityReport:
    """Ideal totality, placeholder trials and the solved complete totality."""
    constants = dict(constants or {})
    variable = _free_variable(predicate, constants)
    if budget < 1:
        raise StrategyError(f"budget must be at least 1, got {budget}", token=str(budget))
    scope = universe.all_members
    warnings: list[str] = []

    def holds(s: CanonSet) -> bool:
        return evaluate(predicate, {**constants, variable: s}, scope)

    for name in sorted(constants):
        outside = [m for m in constants[name].element_list if m not in universe]
        if outside:
            warnings.append(
                f"constant '{name}' has {len(outside)} member(s) outside the universe "
                f"(k={universe.k}); the ideal totality may be truncated"
            )

    ideal = [u for u in scope if holds(u)]
    aggregate = from_elements(ideal)
    ideal_satisfies = holds(aggregate)
    if not ideal_satisfies:
        well_founded = [u for u in ideal if u.well_founded]
        cyclic = len(ideal) - len(well_founded)
        if cyclic and holds(from_elements(well_founded)):
            warnings.append(
                f"the ideal aggregate fails the predicate only because of {cyclic} "
                f"non-well-founded member(s) of the k={universe.k} universe; "
                "its well-founded part satisfies it"
            )
    if aggregate not in universe:
        warnings.append(
            f"ideal aggregate has {aggregate.size} canonical nodes, beyond the "
            f"universe bound k={universe.k}"
        )

    if not strategies:
        warnings.append("no placeholder strategies given; hypothetical objects not tested")
    generated = _generate(strategies, universe, ideal)
    tested = generated[:budget]
    if len(generated) > budget:
        warnings.append(
            f"{len(generated)} placeholder terms generated, only the first {budget} tested"
        )
    if ideal_satisfies and Placeholder() not in tested:
        warnings.append("the ideal aggregate satisfies the predicate but bare @I was not tested")

    aux: list[tuple[str, tuple[Term, ...]]] = []

    def bind(t: PTerm, name: str) -> Term:
        if isinstance(t, Placeholder):
            return COMPLETE_VAR
        if isinstance(t, Given):
            return t.value
        slot = len(aux)
        aux.append((name, ()))
        sub = count(1)
        aux[slot] = (name, tuple(bind(p, f"{name}_{next(sub)}") for p in t.parts))
        return name

    trials: list[tuple[PTerm, CanonSet, bool, Optional[Term]]] = []
    for i, term in enumerate(tested, start=1):
        instance = instantiate(term, aggregate)
        accepted = holds(instance)
        logger.debug("term %s: %s", format_term(term), "accepted" if accepted else "rejected")
        ref = bind(term, f"T{i}") if accepted else None
        trials.append((term, instance, accepted, ref))

    members: list[Term] = list(ideal)
    members.extend(ref for _, _, accepted, ref in trials if accepted)
    equation = EquationSystem(((COMPLETE_VAR, tuple(members)),) + tuple(aux))
    solution = solve(equation)
    complete = solution[COMPLETE_VAR]

    def identify(value: CanonSet) -> Optional[str]:
        if value == complete:
            return "complete"
        if value in ideal:
            return f"ideal:{ideal.index(value)}"
        return None

    results = []
    for term, instance, accepted, ref in trials:
        if not accepted:
            results.append(TermTrial(term, instance, False))
            continue
        value = solution[ref] if isinstance(ref, str) else ref
        results.append(TermTrial(term, instance, True, value, identify(value)))

    intruders = tuple(e for e in complete.element_list if not holds(e))
    for warning in warnings:
        logger.warning("totality: %s", warning)
    logger.info(
        "totality over k=%d: %d ideal, %d/%d terms accepted, %d intruders",
        universe.k,
        len(ideal),
        sum(1 for t in results if t.accepted),
        len(results),
        len(intruders),
    )
    return TotalityReport(
        predicate=format_formula(predicate),
        variable=variable,
        k=universe.k,
        ideal_elements=tuple(ideal),
        ideal_aggregate=aggregate,
        ideal_satisfies=ideal_satisfies,
        trials=tuple(results),
        equation=equation,
        complete=complete,
        intruders=intruders,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# n-constructibility
# ---------------------------------------------------------------------------


def _step(pool: list[CanonSet], width: int, max_pool: int) -> list[CanonSet]:
    """One round: keep the pool, add every member and every small aggregation."""
    arity = min(width, len(pool))
    requested = len(pool) + sum(len(z.element_list) for z in pool)
    requested += sum(comb(len(pool), r) for r in range(arity + 1))
    if requested > max_pool:
        logger.warning("constructibility pool would reach %d sets (limit %d)", requested, max_pool)
        raise ResourceLimitError("max_pool_size", max_pool, requested)
    grown: dict[CanonSet, None] = dict.fromkeys(pool)
    for z in pool:
        grown.update(dict.fromkeys(z.element_list))
    for r in range(arity + 1):
        for chosen in combinations(pool, r):
            grown.setdefault(from_elements(chosen), None)
    return list(grown)


def _reached(pool: list[CanonSet], y: CanonSet, width: int) -> bool:
    """Is y in (or a member of a set in) the round after `pool`?"""
    base = set(pool)
    near = base.union(*(z.element_set for z in pool))
    if y in near or any(y in z.element_set for z in near):
        return True
    return len(y.element_list) <= width and y.element_set <= base


def n_constructible(
    x: CanonSet, y: CanonSet, n: int, width: int = 2, max_pool: int = DEFAULT_MAX_POOL
) -> bool:
    """
    Breadth-first closure from x: each round disaggregates pool members and
    aggregates up to `width` of them. y is n-constructible iff it is in the
    round-n pool or a member of something in it. The last round is decided
    without materialising its aggregations.
    """
    if n < 0:
        raise WorkbenchError(f"n must be non-negative, got {n}", token=str(n))
    if width < 1:
        raise WorkbenchError(f"width must be at least 1, got {width}", token=str(width))
    if n == 0:
        return y == x or y in x.element_set
    pool = [x]
    for _ in range(n - 1):
        pool = _step(pool, width, max_pool)
    return _reached(pool, y, width)


def constructible_depth(
    x: CanonSet, y: CanonSet, max_n: int, width: int = 2, max_pool: int = DEFAULT_MAX_POOL
) -> Optional[int]:
    """Least n <= max_n with y n-constructible from x, or None."""
    if width < 1:
        raise WorkbenchError(f"width must be at least 1, got {width}", token=str(width))
    if y == x or y in x.element_set:
        return 0
    pool = [x]
    for n in range(1, max_n + 1):
        if _reached(pool, y, width):
            return n
        if n < max_n:
            pool = _step(pool, width, max_pool)
    return None
