"""
FastAPI application for the hyperset workbench.

Lifespan manages config, the universe cache and the workbench service.
Routes: /v1/canon, /v1/eq, /v1/solve, /v1/replace, /v1/dot, /v1/stratify,
/v1/eval, /v1/universe, /v1/totality, /v1/constructible, /health.
Optional API key authentication on /v1/* endpoints.
"""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Security
from fastapi.responses import PlainTextResponse
from fastapi.security import APIKeyHeader

from src.cache import TTLCache
from src.config import AppConfig, load_config
from src.errors import ResourceLimitError, WorkbenchError
from src.models import (
    ConstructibleRequest,
    ConstructibleResponse,
    EqResponse,
    EvalRequest,
    EvalResponse,
    FormulaRequest,
    PairRequest,
    ReplaceRequest,
    SetRequest,
    SetView,
    SolveResponse,
    StratifyResponse,
    TotalityRequest,
    TotalityResponse,
    UniverseResponse,
)
from src.service import WorkbenchService

logger = logging.getLogger(__name__)

# Global references set during lifespan
_service: Optional[WorkbenchService] = None
_config: Optional[AppConfig] = None


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup: load config, create cache and workbench service."""
    global _service, _config

    _config = load_config()
    logging.basicConfig(
        level=getattr(logging, _config.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.info(
        "Loaded config: max_universe_k=%d, max_pool_size=%d, universe_cache_ttl=%d",
        _config.max_universe_k,
        _config.max_pool_size,
        _config.universe_cache_ttl,
    )

    cache = TTLCache(ttl=_config.universe_cache_ttl)
    _service = WorkbenchService(config=_config, cache=cache)
    logger.info("Workbench ready")
    yield

    _service = None
    _config = None


app = FastAPI(
    title="Hyperset Workbench API",
    version="1.0.0",
    description="""
Non-well-founded sets as graphs, compared by bisimulation.

## Features

- **Canonical forms**: every set literal or let-program reduces to its unique minimal picture
- **Equation solving**: flat systems such as `let a = {a}; a` have exactly one solution
- **Stratification**: level assignments or a cycle witness for any formula
- **Totalities**: ideal and complete totalities of one-variable predicates over finite universes

Sets travel as text in the set-literal language; cyclic parts print as `let` bindings.

## Authentication

Optional API key via `X-API-Key` header. The `/health` endpoint is always unauthenticated.
    """.strip(),
    lifespan=lifespan,
    openapi_tags=[
        {"name": "sets", "description": "Canonical forms, equality, equations, replacement"},
        {"name": "logic", "description": "Stratification and finite-model evaluation"},
        {"name": "totality", "description": "Universes, totalities, constructibility"},
        {"name": "health", "description": "Service health check"},
    ],
    docs_url="/docs",
    redoc_url="/redoc",
)


# ---------------------------------------------------------------------------
# Authentication dependency
# ---------------------------------------------------------------------------

api_key_header = APIKeyHeader(name="X-API-Key", auto_error=False)


async def verify_api_key(
    api_key: Optional[str] = Security(api_key_header),
) -> None:
    """Check API key if one is configured."""
    if _config is None or _config.api_key is None:
        return  # No auth configured
    if api_key != _config.api_key:
        raise HTTPException(status_code=401, detail="Invalid or missing API key")


def get_service() -> WorkbenchService:
    if _service is None:
        raise HTTPException(status_code=503, detail="Service not ready")
    return _service


def _call(fn, *args, **kwargs):
    """Run a service call, mapping workbench errors to 400/422."""
    try:
        return fn(*args, **kwargs)
    except ResourceLimitError as exc:
        logger.warning("Resource limit: %s", exc)
        raise HTTPException(status_code=422, detail=exc.detail().model_dump()) from exc
    except WorkbenchError as exc:
        raise HTTPException(status_code=400, detail=exc.detail().model_dump()) from exc


_ERRORS = {
    400: {"description": "Malformed input (syntax error, unbound name, bad predicate)"},
    422: {"description": "Request validation failed or a resource limit was exceeded"},
}

authed = [Depends(verify_api_key)]


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------


@app.get(
    "/health",
    tags=["health"],
    summary="Health check",
    response_description="Service is healthy",
)
def health():
    """
    Health check endpoint for monitoring.

    Always returns HTTP 200 with a simple JSON response.
    No authentication required.
    """
    return {"status": "healthy"}


@app.post("/v1/canon", response_model=SetView, dependencies=authed, tags=["sets"],
          summary="Canonical form", responses=_ERRORS)
def canon(req: SetRequest, service: WorkbenchService = Depends(get_service)):
    """Canonical let-system of a set literal, with node count and well-foundedness."""
    return _call(service.canon, req.text)


@app.post("/v1/eq", response_model=EqResponse, dependencies=authed, tags=["sets"],
          summary="Bisimilarity", responses=_ERRORS)
def eq(req: PairRequest, service: WorkbenchService = Depends(get_service)):
    return _call(service.eq, req.a, req.b)


@app.post("/v1/solve", response_model=SolveResponse, dependencies=authed, tags=["sets"],
          summary="Solve a let-program", responses=_ERRORS)
def solve(req: SetRequest, service: WorkbenchService = Depends(get_service)):
    """
    Solve every binding of a let-program. Let names keep their names; the
    program body is reported under `_`.
    """
    return _call(service.solve, req.text)


@app.post("/v1/replace", response_model=SetView, dependencies=authed, tags=["sets"],
          summary="Replace x by y inside s", responses=_ERRORS)
def replace(req: ReplaceRequest, service: WorkbenchService = Depends(get_service)):
    return _call(service.replace, req.s, req.x, req.y)


@app.post("/v1/dot", response_class=PlainTextResponse, dependencies=authed, tags=["sets"],
          summary="Graphviz export", responses=_ERRORS)
def dot(req: SetRequest, service: WorkbenchService = Depends(get_service)):
    return PlainTextResponse(_call(service.dot, req.text), media_type="text/vnd.graphviz")


@app.post("/v1/stratify", response_model=StratifyResponse, dependencies=authed, tags=["logic"],
          summary="Stratify a formula", responses=_ERRORS)
def stratify(req: FormulaRequest, service: WorkbenchService = Depends(get_service)):
    """Levels for every variable, or a cycle of constraints with nonzero weight."""
    return _call(service.stratify, req.formula)


@app.post("/v1/eval", response_model=EvalResponse, dependencies=authed, tags=["logic"],
          summary="Evaluate over a finite universe", responses=_ERRORS)
def evaluate(req: EvalRequest, service: WorkbenchService = Depends(get_service)):
    return _call(service.evaluate, req.formula, req.env, req.k)


@app.get("/v1/universe", response_model=UniverseResponse, dependencies=authed, tags=["totality"],
         summary="Enumerate a universe", responses=_ERRORS)
def universe(k: int = Query(ge=1), service: WorkbenchService = Depends(get_service)):
    """Every hyperset with at most k canonical nodes."""
    return _call(service.universe_view, k)


@app.post("/v1/totality", response_model=TotalityResponse, dependencies=authed,
          tags=["totality"], summary="Complete totality of a predicate", responses=_ERRORS)
def totality(req: TotalityRequest, service: WorkbenchService = Depends(get_service)):
    """
    Ideal totality, placeholder-term verdicts, the solved equation and its
    intruders. `formula` may also be a preset name such as `russell`.
    """
    return _call(
        service.totality_view,
        req.formula,
        req.k,
        strategies=req.strategies,
        budget=req.budget,
        terms=req.terms,
        constants=req.constants,
    )


@app.post("/v1/constructible", response_model=ConstructibleResponse, dependencies=authed,
          tags=["totality"], summary="n-constructibility", responses=_ERRORS)
def constructible(req: ConstructibleRequest, service: WorkbenchService = Depends(get_service)):
    return _call(service.constructible, req.x, req.y, req.n, req.width)
