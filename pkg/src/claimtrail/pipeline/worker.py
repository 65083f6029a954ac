"""Capture processing: hash, manifest, store, dual ledger write.

One event is one idempotent unit keyed by event_id. Every stage either has
no effect on redelivery (content-addressed store, manifest put, anchor
append) or is pure, so at-least-once delivery collapses to exactly-once
effects. The private ledger is written before the public anchor; a crash
between the two heals on redelivery because the private put is idempotent.

Timestamps carried into the ledgers come from the capture metadata, not
from the wall clock, so the final ledger state is independent of delivery
schedule, retries, and duplicates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

from claimtrail.errors import ClaimtrailError, QueueEmptyError, TransientFailure
from claimtrail.evidence.keys import DeviceKeyStore
from claimtrail.evidence.manifest import build_manifest, manifest_hash
from claimtrail.evidence.store import EvidenceStore
from claimtrail.ledger.chain import AnchorChain, AnchorRecord
from claimtrail.ledger.private import PrivateLedger
from claimtrail.pipeline.queue import CaptureEvent, CaptureQueue

STAGES = ("read", "store", "private", "anchor")


def ingest_media(
    keystore: DeviceKeyStore,
    evidence_store: EvidenceStore,
    chain: AnchorChain,
    private_ledger: PrivateLedger,
    evidence_id: str,
    media: bytes,
    meta,
    key_rng: random.Random | None = None,
    stage_hook: Callable[[str], None] | None = None,
) -> "AnchorRecord":
    """Land one piece of media in the store and both ledgers.

    Idempotent end to end: re-running with the same evidence id and bytes
    changes nothing. Returns the anchor record that was (or already had
    been) appended.
    """

    def stage(name: str) -> None:
        if stage_hook is not None:
            stage_hook(name)

    key = keystore.load_or_create(meta.device_id, key_rng)
    manifest = build_manifest(media, evidence_id, meta, key)

    stage("store")
    evidence_store.store(media, manifest)

    stage("private")
    record = private_ledger.put(evidence_id, manifest, written_at_ms=meta.captured_at_ms)
    if meta.witness and not any(a.key == "witness" for a in record.annotations):
        private_ledger.annotate(evidence_id, "witness", "true", meta.captured_at_ms)

    stage("anchor")
    anchor = AnchorRecord(
        evidence_id=evidence_id,
        content_hash=manifest.content_hash,
        manifest_hash=manifest_hash(manifest),
        submitted_at_ms=meta.captured_at_ms,
    )
    chain.append_anchor(anchor)
    return anchor


class Outcome(str, Enum):
    NEWLY_PROCESSED = "NewlyProcessed"
    DUPLICATE = "Duplicate"
    FAILED = "Failed"


@dataclass(frozen=True)
class ProcessingResult:
    outcome: Outcome
    event_id: str
    evidence_id: str | None = None
    attempts: int = 0
    dead_lettered: bool = False
    error: str | None = None


@dataclass
class QueueStats:
    depth: int = 0
    processed_count: int = 0
    duplicate_count: int = 0
    failed_count: int = 0

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "processed_count": self.processed_count,
            "duplicate_count": self.duplicate_count,
            "failed_count": self.failed_count,
        }


class FaultInjector:
    """Deterministic fault injection: fail the n-th call of a stage.

    ``plan`` maps a stage name to the 1-based call numbers that should
    raise, e.g. ``{"anchor": [2, 5]}`` fails the 2nd and 5th anchor write.
    An optional ``hook`` gets (stage, event) on every stage entry and may
    raise TransientFailure itself.
    """

    def __init__(
        self,
        plan: dict[str, list[int]] | None = None,
        hook: Callable[[str, CaptureEvent], None] | None = None,
    ):
        self._plan = {stage: set(calls) for stage, calls in (plan or {}).items()}
        self._hook = hook
        self._counts: dict[str, int] = {}

    def check(self, stage: str, event: CaptureEvent) -> None:
        count = self._counts.get(stage, 0) + 1
        self._counts[stage] = count
        if count in self._plan.get(stage, ()):
            raise TransientFailure(f"injected fault: stage {stage!r} call {count}")
        if self._hook is not None:
            self._hook(stage, event)

    @classmethod
    def from_config(cls, config: dict | None) -> "FaultInjector | None":
        if not config:
            return None
        return cls(plan={stage: list(calls) for stage, calls in config.items()})


class PipelineWorker:
    """Pulls capture events off the queue and lands them in both ledgers."""

    def __init__(
        self,
        queue: CaptureQueue,
        keystore: DeviceKeyStore,
        evidence_store: EvidenceStore,
        chain: AnchorChain,
        private_ledger: PrivateLedger,
        max_retries: int = 3,
        fault_injector: FaultInjector | None = None,
        key_rng: random.Random | None = None,
        evidence_id_fn: Callable[[CaptureEvent], str] | None = None,
    ):
        self.queue = queue
        self.keystore = keystore
        self.evidence_store = evidence_store
        self.chain = chain
        self.private_ledger = private_ledger
        self.max_retries = max_retries
        self.fault_injector = fault_injector
        self.key_rng = key_rng
        self.evidence_id_fn = evidence_id_fn or (lambda event: f"ev-{event.event_id}")
        self.processed: dict[str, str] = {}  # event_id -> evidence_id
        self.dead_letter: dict[str, CaptureEvent] = {}
        self.stats = QueueStats()

    def _stage(self, name: str, event: CaptureEvent) -> None:
        if self.fault_injector is not None:
            self.fault_injector.check(name, event)

    def _ingest(self, event: CaptureEvent) -> str:
        evidence_id = self.evidence_id_fn(event)

        self._stage("read", event)
        media_path = Path(event.media_path)
        if not media_path.is_file():
            raise TransientFailure(f"media vanished at {event.media_path!r}")
        media = media_path.read_bytes()

        ingest_media(
            self.keystore,
            self.evidence_store,
            self.chain,
            self.private_ledger,
            evidence_id,
            media,
            event.meta,
            key_rng=self.key_rng,
            stage_hook=lambda name: self._stage(name, event),
        )
        return evidence_id

    def process_next(self) -> ProcessingResult:
        """Process one delivery; returns what actually happened.

        Redelivery of an already-processed event is a no-op reported as
        Duplicate. A failing event goes back to the queue until it has been
        delivered max_retries + 1 times, then parks in the dead-letter set.
        """
        event = self.queue.dequeue()
        if event.event_id in self.processed:
            self.stats.duplicate_count += 1
            self.queue.mark_done(event.event_id)
            return ProcessingResult(
                outcome=Outcome.DUPLICATE,
                event_id=event.event_id,
                evidence_id=self.processed[event.event_id],
                attempts=event.delivery_attempts,
            )
        try:
            evidence_id = self._ingest(event)
        except ClaimtrailError as exc:
            if event.delivery_attempts > self.max_retries:
                self.dead_letter[event.event_id] = event
                self.stats.failed_count += 1
                self.queue.mark_dead(event.event_id)
                return ProcessingResult(
                    outcome=Outcome.FAILED,
                    event_id=event.event_id,
                    attempts=event.delivery_attempts,
                    dead_lettered=True,
                    error=str(exc),
                )
            self.queue.requeue(event)
            return ProcessingResult(
                outcome=Outcome.FAILED,
                event_id=event.event_id,
                attempts=event.delivery_attempts,
                error=str(exc),
            )
        self.processed[event.event_id] = evidence_id
        self.stats.processed_count += 1
        self.queue.mark_done(event.event_id)
        return ProcessingResult(
            outcome=Outcome.NEWLY_PROCESSED,
            event_id=event.event_id,
            evidence_id=evidence_id,
            attempts=event.delivery_attempts,
        )

    def drain(self) -> QueueStats:
        """Process until the queue is empty; returns final stats."""
        while True:
            try:
                self.process_next()
            except QueueEmptyError:
                break
        self.stats.depth = self.queue.depth
        return self.stats
