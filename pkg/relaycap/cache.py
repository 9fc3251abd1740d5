# cache.py
import functools
import logging
import threading
from typing import Any, Callable, Dict, Hashable, Optional, Tuple

from config import settings

logger = logging.getLogger(__name__)

class EvaluationCache:
    """Process-wide memo of special-function and theorem building-block values."""
    _instance: Optional['EvaluationCache'] = None
    _guard = threading.Lock()

    def __new__(cls):
        with cls._guard:
            if cls._instance is None:
                cls._instance = super().__new__(cls)
                cls._instance._initialize()
        return cls._instance

    def _initialize(self):
        self._store: Dict[Tuple[str, Hashable], Any] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        logger.info("Evaluation cache created")

    def get_or_compute(self, namespace: str, key: Hashable, compute: Callable[[], Any]) -> Any:
        """Return the cached value for (namespace, key), computing it outside the lock on a miss"""
        full_key = (namespace, key)
        with self._lock:
            if full_key in self._store:
                self.hits += 1
                return self._store[full_key]
            self.misses += 1

        logger.debug(f"Cache miss in {namespace}: {key}")
        value = compute()

        with self._lock:
            if len(self._store) >= settings.CACHE_MAX_ENTRIES:
                logger.warning(f"Cache reached {settings.CACHE_MAX_ENTRIES} entries, clearing")
                self._store.clear()
            self._store.setdefault(full_key, value)
            return self._store[full_key]

    def clear(self):
        with self._lock:
            self._store.clear()
            self.hits = 0
            self.misses = 0

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"entries": len(self._store), "hits": self.hits, "misses": self.misses}

# Global cache instance
cache = EvaluationCache()

def memoized(namespace: str):
    """Memoize a function of hashable positional and keyword arguments"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            key = (args, tuple(sorted(kwargs.items())))
            return cache.get_or_compute(namespace, key, lambda: func(*args, **kwargs))
        wrapper.uncached = func
        return wrapper
    return decorator
