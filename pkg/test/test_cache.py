"""Tests for the memoising TTL cache."""

import threading
import time

from src.cache import TTLCache


class FakeClock:
    """Controllable clock for deterministic cache tests."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


def make_cache(ttl=20.0):
    clock = FakeClock()
    cache = TTLCache(ttl=ttl)
    cache._clock = clock
    return cache, clock


class TestExpiry:
    def test_fresh_entry_is_returned(self):
        cache, _ = make_cache()
        cache.set("universe:1", ("empty", "omega"))
        assert cache.get("universe:1").value == ("empty", "omega")

    def test_expires_after_ttl(self):
        cache, clock = make_cache(ttl=20)
        cache.set("universe:1", "u")
        clock.advance(21)
        assert cache.get("universe:1") is None

    def test_alive_at_exact_ttl(self):
        cache, clock = make_cache(ttl=20)
        cache.set("universe:1", "u")
        clock.advance(20)
        assert cache.get("universe:1") is not None

    def test_unknown_key(self):
        cache, _ = make_cache()
        assert cache.get("universe:9") is None

    def test_clear(self):
        cache, _ = make_cache()
        cache.set("universe:1", "a")
        cache.set("universe:2", "b")
        cache.clear()
        assert cache.get("universe:1") is None
        assert cache.get("universe:2") is None


class TestGetOrCompute:
    def test_computes_once_within_ttl(self):
        cache, clock = make_cache(ttl=20)
        calls = []

        def compute():
            calls.append(1)
            return len(calls)

        assert cache.get_or_compute("universe:2", compute) == 1
        assert cache.get_or_compute("universe:2", compute) == 1
        assert (cache.hits, cache.misses) == (1, 1)
        clock.advance(21)
        assert cache.get_or_compute("universe:2", compute) == 2
        assert cache.misses == 2

    def test_keys_are_independent(self):
        cache, _ = make_cache()
        assert cache.get_or_compute("universe:1", lambda: "one") == "one"
        assert cache.get_or_compute("universe:2", lambda: "two") == "two"
        assert cache.misses == 2

    def test_concurrent_callers_share_one_computation(self):
        cache = TTLCache(ttl=60)
        calls = []
        gate = threading.Event()

        def slow():
            calls.append(1)
            gate.wait(timeout=5)
            return "universe"

        results = []
        threads = [
            threading.Thread(target=lambda: results.append(cache.get_or_compute("universe:3", slow)))
            for _ in range(4)
        ]
        for t in threads:
            t.start()
        time.sleep(0.1)
        gate.set()
        for t in threads:
            t.join(timeout=5)

        assert results == ["universe"] * 4
        assert len(calls) == 1
        assert cache.misses == 1
