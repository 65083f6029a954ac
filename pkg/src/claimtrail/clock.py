"""Millisecond UTC clocks.

All timestamps in the system are integer milliseconds since the Unix epoch.
Components never read the wall clock directly; they take a Clock so that
tests and simulations stay deterministic.
"""
from __future__ import annotations

import time
from datetime import datetime, timezone


def utc_ms_now() -> int:
    return time.time_ns() // 1_000_000


def format_ms(ts_ms: int) -> str:
    """ISO-8601 rendering with millisecond precision, UTC."""
    dt = datetime.fromtimestamp(ts_ms / 1000, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts_ms % 1000:03d}Z"


def parse_ms(text: str) -> int:
    """Parse ISO-8601 (with or without fractional seconds) to epoch ms."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


class SystemClock:
    def now_ms(self) -> int:
        return utc_ms_now()


class LogicalClock:
    """Deterministic clock that advances a fixed step on every read."""

    def __init__(self, start_ms: int = 1_700_000_000_000, step_ms: int = 1000):
        self._next = start_ms
        self._step = step_ms

    def now_ms(self) -> int:
        value = self._next
        self._next += self._step
        return value
