"""
Workbench service: orchestrates parsing, the library operations and the
universe cache, and produces the pydantic views used by both the HTTP API
and the CLI's JSON output.
"""

from __future__ import annotations

import logging
from typing import Mapping, Optional, Sequence

from src.cache import TTLCache
from src.config import AppConfig
from src.hyperset import CanonSet, bisimilar, canonicalize, replace
from src.logic import Formula, evaluate, format_formula, parse_formula, stratify
from src.models import (
    ConstructibleResponse,
    EqResponse,
    EvalResponse,
    SetView,
    SolveResponse,
    StratifyResponse,
    TermVerdict,
    TotalityResponse,
    UniverseMember,
    UniverseResponse,
    WitnessStep,
)
from src.setlang import parse_program, parse_set, render_set, render_system, to_dot, to_system
from src.solver import solve, system_of
from src.totality import (
    Strategy,
    TotalityReport,
    Universe,
    complete_totality,
    constructible_depth,
    enumerate_universe,
    format_term,
    n_constructible,
    parse_term,
    predicate_text,
)

logger = logging.getLogger(__name__)

BODY_VAR = "_"


def parse_canon(text: str) -> CanonSet:
    """Set literal or let-program to its canonical set."""
    return canonicalize(parse_set(text))


def parse_predicate(text: str) -> Formula:
    """Formula text or a preset name."""
    return parse_formula(predicate_text(text))


def set_view(s: CanonSet) -> SetView:
    return SetView(text=render_set(s), nodes=s.size, well_founded=s.well_founded)


class WorkbenchService:
    """
    Main service class. One instance per process, shared by every request.

    Universes are memoised per k in the TTL cache; everything else is a
    pure function of the request.
    """

    def __init__(self, config: AppConfig, cache: Optional[TTLCache] = None) -> None:
        self._config = config
        self._cache = cache or TTLCache(ttl=config.universe_cache_ttl)

    @property
    def config(self) -> AppConfig:
        return self._config

    # -- sets ---------------------------------------------------------------

    def canon(self, text: str) -> SetView:
        return set_view(parse_canon(text))

    def canon_system(self, text: str) -> str:
        """The canonical equation system: one equation per canonical node, root s0."""
        system, _ = system_of(parse_canon(text))
        return render_system(system)

    def eq(self, a: str, b: str) -> EqResponse:
        return EqResponse(bisimilar=bisimilar(parse_canon(a), parse_canon(b)))

    def solve(self, program_text: str) -> SolveResponse:
        """Solve a let-program; let names keep their names, the body is `_`."""
        program = parse_program(program_text)
        system, root = to_system(program)
        solution = solve(system)
        views = {b.name: set_view(solution[b.name]) for b in program.bindings}
        views[BODY_VAR] = set_view(solution[root])
        return SolveResponse(solution=views)

    def replace(self, s: str, x: str, y: str) -> SetView:
        return set_view(replace(parse_canon(s), parse_canon(x), parse_canon(y)))

    def dot(self, text: str) -> str:
        return to_dot(parse_canon(text))

    # -- logic --------------------------------------------------------------

    def stratify(self, formula: str) -> StratifyResponse:
        f = parse_predicate(formula)
        result = stratify(f)
        return StratifyResponse(
            formula=format_formula(f),
            stratified=result.stratified,
            levels=result.levels,
            witness=[
                WitnessStep(
                    atom=format_formula(step.atom),
                    source=step.source,
                    target=step.target,
                    weight=step.weight,
                )
                for step in result.witness
            ],
            witness_weight=None if result.stratified else result.witness_weight,
        )

    def evaluate(self, formula: str, env: Mapping[str, str], k: int) -> EvalResponse:
        f = parse_predicate(formula)
        values = {name: parse_canon(text) for name, text in env.items()}
        universe = self.universe(k)
        return EvalResponse(value=evaluate(f, values, universe.all_members))

    # -- totalities ---------------------------------------------------------

    def universe(self, k: int) -> Universe:
        limit = self._config.max_universe_k
        if k > limit:
            return enumerate_universe(k, limit)  # raises ResourceLimitError
        return self._cache.get_or_compute(f"universe:{k}", lambda: enumerate_universe(k, limit))

    def universe_view(self, k: int) -> UniverseResponse:
        universe = self.universe(k)
        return UniverseResponse(
            k=k,
            count=len(universe.members),
            members=[
                UniverseMember(
                    index=i, text=render_set(m), nodes=m.size, well_founded=m.well_founded
                )
                for i, m in enumerate(universe.members)
            ],
        )

    def totality(
        self,
        formula: str,
        k: int,
        strategies: Optional[Sequence[str]] = None,
        budget: Optional[int] = None,
        terms: Sequence[str] = (),
        constants: Optional[Mapping[str, str]] = None,
    ) -> TotalityReport:
        predicate = parse_predicate(formula)
        names = self._config.default_strategies if strategies is None else strategies
        plan: list[Strategy] = list(names)
        plan.extend(parse_term(t) for t in terms)
        values = {name: parse_canon(text) for name, text in (constants or {}).items()}
        return complete_totality(
            predicate,
            self.universe(k),
            plan,
            budget if budget is not None else self._config.default_budget,
            values,
        )

    def totality_view(self, *args, **kwargs) -> TotalityResponse:
        return totality_response(self.totality(*args, **kwargs))

    def constructible(self, x: str, y: str, n: int, width: int) -> ConstructibleResponse:
        xs, ys = parse_canon(x), parse_canon(y)
        limit = self._config.max_pool_size
        reached = n_constructible(xs, ys, n, width, limit)
        least = constructible_depth(xs, ys, n, width, limit) if reached else None
        return ConstructibleResponse(constructible=reached, n=n, width=width, least_n=least)


def totality_response(report: TotalityReport) -> TotalityResponse:
    return TotalityResponse(
        predicate=report.predicate,
        variable=report.variable,
        k=report.k,
        ideal=[render_set(e) for e in report.ideal_elements],
        ideal_aggregate=render_set(report.ideal_aggregate),
        ideal_satisfies=report.ideal_satisfies,
        accepted_terms=[
            TermVerdict(
                term=format_term(t.term),
                accepted=t.accepted,
                value=render_set(t.value) if t.value is not None else None,
                identified_with=t.identified_with,
            )
            for t in report.trials
        ],
        equation=render_system(report.equation),
        complete=render_set(report.complete),
        intruders=[render_set(i) for i in report.intruders],
        warnings=list(report.warnings),
    )
