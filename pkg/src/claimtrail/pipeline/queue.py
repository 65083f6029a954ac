"""Durable FIFO queue of capture events.

Stands in for the streaming stage between capture and the ledgers. Delivery
is at-least-once: consumers may see an event again after a requeue, so
everything downstream must be idempotent on event_id. An optional journal
file makes the queue survive a process restart.
"""
from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from claimtrail.errors import MediaReadError, QueueEmptyError
from claimtrail.evidence.manifest import CaptureMeta, MediaKind


@dataclass(frozen=True)
class CaptureEvent:
    event_id: str
    media_path: str
    meta: CaptureMeta
    enqueued_at_ms: int
    delivery_attempts: int = 0

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "media_path": self.media_path,
            "device_id": self.meta.device_id,
            "captured_at_ms": self.meta.captured_at_ms,
            "media_kind": self.meta.media_kind.value,
            "location": None if self.meta.location is None else list(self.meta.location),
            "witness": self.meta.witness,
            "enqueued_at_ms": self.enqueued_at_ms,
            "delivery_attempts": self.delivery_attempts,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "CaptureEvent":
        location = data.get("location")
        return cls(
            event_id=data["event_id"],
            media_path=data["media_path"],
            meta=CaptureMeta(
                device_id=data["device_id"],
                captured_at_ms=int(data["captured_at_ms"]),
                media_kind=MediaKind(data["media_kind"]),
                location=None if location is None else (float(location[0]), float(location[1])),
                witness=bool(data.get("witness", False)),
            ),
            enqueued_at_ms=int(data["enqueued_at_ms"]),
            delivery_attempts=int(data.get("delivery_attempts", 0)),
        )


class CaptureQueue:
    """Linearizable in-process queue with an optional restart journal."""

    def __init__(self, journal_path: Path | None = None):
        self._lock = threading.Lock()
        self._events: deque[CaptureEvent] = deque()
        self._journal_path = Path(journal_path) if journal_path is not None else None
        if self._journal_path is not None and self._journal_path.exists():
            self._replay_journal()

    def _journal(self, kind: str, payload: dict[str, Any]) -> None:
        if self._journal_path is None:
            return
        self._journal_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._journal_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps({"kind": kind, **payload}, sort_keys=True) + "\n")

    def _replay_journal(self) -> None:
        pending: dict[str, CaptureEvent] = {}
        order: list[str] = []
        for line in self._journal_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            kind = entry.pop("kind")
            if kind == "enqueue":
                event = CaptureEvent.from_json_dict(entry)
                if event.event_id not in pending:
                    order.append(event.event_id)
                pending[event.event_id] = event
            elif kind in ("done", "dead"):
                pending.pop(entry["event_id"], None)
        for event_id in order:
            if event_id in pending:
                self._events.append(pending[event_id])

    def enqueue(self, event: CaptureEvent) -> str:
        """Queue an event after checking its media is readable.

        Returns the event id as acknowledgment. Global FIFO order implies
        FIFO order per device.
        """
        path = Path(event.media_path)
        if not path.is_file():
            raise MediaReadError(f"media not readable at {event.media_path!r}")
        with self._lock:
            self._events.append(event)
            self._journal("enqueue", event.to_json_dict())
        return event.event_id

    def dequeue(self) -> CaptureEvent:
        with self._lock:
            if not self._events:
                raise QueueEmptyError("capture queue is empty")
            event = self._events.popleft()
        return replace(event, delivery_attempts=event.delivery_attempts + 1)

    def requeue(self, event: CaptureEvent) -> None:
        """Put a failed event at the back of the queue for another attempt."""
        with self._lock:
            self._events.append(event)
            self._journal("enqueue", event.to_json_dict())

    def mark_done(self, event_id: str) -> None:
        self._journal("done", {"event_id": event_id})

    def mark_dead(self, event_id: str) -> None:
        self._journal("dead", {"event_id": event_id})

    @property
    def depth(self) -> int:
        with self._lock:
            return len(self._events)
