"""
Pydantic request/response models for the workbench HTTP API and the
structured (JSON) output of the CLI.

Set values are carried as rendered let-systems (see setlang.render_set),
never as raw graphs: cyclic sets have no finite braces-only notation.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class ErrorCode(str, Enum):
    invalid_input = "invalid_input"
    invalid_graph = "invalid_graph"
    syntax_error = "syntax_error"
    unbound_name = "unbound_name"
    invalid_system = "invalid_system"
    unbound_variable = "unbound_variable"
    predicate_rejected = "predicate_rejected"
    unknown_strategy = "unknown_strategy"
    resource_limit = "resource_limit"


class ErrorDetail(BaseModel):
    """Error information attached to 4xx responses and CLI diagnostics."""

    code: ErrorCode
    message: str
    line: Optional[int] = None
    column: Optional[int] = None
    token: Optional[str] = None


# ---------------------------------------------------------------------------
# Requests
# ---------------------------------------------------------------------------


class SetRequest(BaseModel):
    text: str = Field(description="Set literal or let-program, e.g. 'let a = {a}; a'")


class PairRequest(BaseModel):
    a: str
    b: str


class ReplaceRequest(BaseModel):
    s: str
    x: str
    y: str


class FormulaRequest(BaseModel):
    formula: str = Field(description="Formula text or a predicate preset name")


class EvalRequest(BaseModel):
    formula: str
    env: dict[str, str] = Field(default_factory=dict, description="name -> set literal")
    k: int = Field(default=2, ge=1)


class TotalityRequest(BaseModel):
    formula: str
    k: int = Field(default=2, ge=1)
    strategies: Optional[list[str]] = None
    budget: Optional[int] = Field(default=None, ge=1)
    terms: list[str] = Field(default_factory=list, description="Literals containing @I")
    constants: dict[str, str] = Field(default_factory=dict)


class ConstructibleRequest(BaseModel):
    x: str
    y: str
    n: int = Field(ge=0)
    width: int = Field(default=2, ge=1)


# ---------------------------------------------------------------------------
# Responses
# ---------------------------------------------------------------------------


class SetView(BaseModel):
    """A canonical set as text plus a few structural facts."""

    text: str
    nodes: int = Field(ge=1, description="Canonical node count")
    well_founded: bool


class EqResponse(BaseModel):
    bisimilar: bool


class SolveResponse(BaseModel):
    solution: dict[str, SetView]


class WitnessStep(BaseModel):
    atom: str
    source: str
    target: str
    weight: int


class StratifyResponse(BaseModel):
    formula: str
    stratified: bool
    levels: Optional[dict[str, int]] = None
    witness: list[WitnessStep] = Field(default_factory=list)
    witness_weight: Optional[int] = None


class EvalResponse(BaseModel):
    value: bool


class UniverseMember(BaseModel):
    index: int
    text: str
    nodes: int
    well_founded: bool


class UniverseResponse(BaseModel):
    k: int
    count: int
    members: list[UniverseMember]


class TermVerdict(BaseModel):
    """One placeholder term tested against the predicate."""

    term: str
    accepted: bool
    value: Optional[str] = Field(
        default=None, description="Solved set the accepted term became"
    )
    identified_with: Optional[str] = Field(
        default=None, description="'complete', 'ideal:<i>' or null"
    )


class TotalityResponse(BaseModel):
    """Machine-readable complete-totality report."""

    predicate: str
    variable: str
    k: int
    ideal: list[str]
    ideal_aggregate: str
    ideal_satisfies: bool
    accepted_terms: list[TermVerdict]
    equation: str
    complete: str
    intruders: list[str]
    warnings: list[str]


class ConstructibleResponse(BaseModel):
    constructible: bool
    n: int
    width: int
    least_n: Optional[int] = None
