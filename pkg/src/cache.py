"""
In-memory TTL cache for expensive, deterministic computations.

The service keeps enumerated universes here under `universe:{k}`. Routes
run in FastAPI's threadpool, so two requests for the same cold key may
arrive together; get_or_compute() serialises them per key and the second
caller gets the first caller's value.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional

logger = logging.getLogger(__name__)


@dataclass
class CacheEntry:
    """A cached value with its storage timestamp."""

    value: Any
    stored_at: float  # time.monotonic() when stored

    def age(self, now: Optional[float] = None) -> float:
        """Seconds since this entry was stored."""
        if now is None:
            now = time.monotonic()
        return now - self.stored_at


class TTLCache:
    """
    Memoising cache with a fixed TTL and per-key compute locks.

    - get(): the entry if within TTL.
    - get_or_compute(): the cached value, or compute once and store it.
    - hits / misses: counters for get_or_compute.
    """

    def __init__(self, ttl: float) -> None:
        self._ttl = ttl
        self._store: dict[str, CacheEntry] = {}
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}
        self._clock = time.monotonic  # overridable for testing
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Optional[CacheEntry]:
        with self._lock:
            entry = self._store.get(key)
        if entry is None or entry.age(self._clock()) > self._ttl:
            return None
        return entry

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            self._store[key] = CacheEntry(value=value, stored_at=self._clock())

    def _key_lock(self, key: str) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        entry = self.get(key)
        if entry is not None:
            self.hits += 1
            return entry.value
        with self._key_lock(key):
            # another thread may have filled it while we waited
            entry = self.get(key)
            if entry is not None:
                self.hits += 1
                return entry.value
            self.misses += 1
            started = time.monotonic()
            value = compute()
            logger.debug("cache miss %s computed in %.3fs", key, time.monotonic() - started)
            self.set(key, value)
            return value

    def clear(self) -> None:
        """Remove all entries."""
        with self._lock:
            self._store.clear()
