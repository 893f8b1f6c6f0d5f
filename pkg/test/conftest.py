"""
Shared test fixtures for the hyperset workbench.

Provides:
- Random and exhaustive pointed-graph generators
- Well-known sets (empty, Omega, small ordinals)
- Temporary config files
- A workbench server for E2E tests
"""

import itertools
import os
import random
import socket
import time
from threading import Thread

import httpx
import pytest
import uvicorn

from src.hyperset import Apg, empty, omega, ordinal


# ---------------------------------------------------------------------------
# Graph generators
# ---------------------------------------------------------------------------

def all_graphs(max_nodes: int):
    """Every digraph on 1..max_nodes nodes as adjacency lists (root 0)."""
    for n in range(1, max_nodes + 1):
        pairs = [(p, c) for p in range(n) for c in range(n)]
        for bits in itertools.product((False, True), repeat=len(pairs)):
            succ = [[] for _ in range(n)]
            for keep, (p, c) in zip(bits, pairs):
                if keep:
                    succ[p].append(c)
            yield succ


def random_graph(rng: random.Random, max_nodes: int, density: float = 0.3):
    n = rng.randint(1, max_nodes)
    return [[c for c in range(n) if rng.random() < density] for _ in range(n)]


def random_apg(rng: random.Random, max_nodes: int, density: float = 0.3) -> Apg:
    """An accessible graph: a random spanning arborescence plus random extra edges."""
    n = rng.randint(1, max_nodes)
    succ = [set() for _ in range(n)]
    for v in range(1, n):
        succ[rng.randrange(v)].add(v)
    for p in range(n):
        for c in range(n):
            if rng.random() < density:
                succ[p].add(c)
    return Apg.from_succ([sorted(children) for children in succ], 0)


@pytest.fixture()
def rng():
    return random.Random(20240617)


@pytest.fixture()
def well_known():
    return {
        "empty": empty(),
        "omega": omega(),
        "one": ordinal(1),
        "two": ordinal(2),
        "three": ordinal(3),
    }


# ---------------------------------------------------------------------------
# Config fixtures
# ---------------------------------------------------------------------------

@pytest.fixture()
def config_file(tmp_path):
    """
    Write a temporary workbench.yaml with small limits.
    Returns the path to the config file.
    """
    config_content = """\
max_universe_k: 3
max_pool_size: 50000
default_budget: 8
default_strategies: ["bare", "singleton"]
universe_cache_ttl: 60
"""
    config_path = tmp_path / "workbench.yaml"
    config_path.write_text(config_content)
    return str(config_path)


# ---------------------------------------------------------------------------
# E2E fixtures
# ---------------------------------------------------------------------------

def _find_free_port():
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def workbench_url(tmp_path_factory):
    """
    Start the actual workbench FastAPI app on a free port.
    Yields the base URL (e.g. http://127.0.0.1:9123).
    Shuts down after the module.
    """
    tmp_path = tmp_path_factory.mktemp("e2e")
    config_path = tmp_path / "workbench.yaml"
    config_path.write_text("max_universe_k: 3\n")
    os.environ["CONFIG_PATH"] = str(config_path)
    os.environ.pop("API_KEY", None)

    from src.app import app

    port = _find_free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = Thread(target=server.run, daemon=True)
    thread.start()

    base_url = f"http://127.0.0.1:{port}"
    for _ in range(50):
        try:
            httpx.get(f"{base_url}/health", timeout=0.5)
            break
        except httpx.ConnectError:
            time.sleep(0.1)
    else:
        pytest.fail("workbench server did not start in time")

    yield base_url

    server.should_exit = True
    thread.join(timeout=5)
    os.environ.pop("CONFIG_PATH", None)
