from __future__ import annotations

import random
from pathlib import Path

import pytest

from claimtrail.errors import MediaReadError, QueueEmptyError
from claimtrail.evidence.keys import DeviceKeyStore
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.evidence.store import EvidenceStore
from claimtrail.ledger.chain import AnchorChain
from claimtrail.ledger.private import PrivateLedger
from claimtrail.ledger.verify import Verdict, cross_verify
from claimtrail.pipeline.queue import CaptureEvent, CaptureQueue
from claimtrail.pipeline.worker import FaultInjector, Outcome, PipelineWorker


def _write_media(tmp_path: Path, name: str, payload: bytes) -> Path:
    path = tmp_path / name
    path.write_bytes(payload)
    return path


def _event(tmp_path: Path, index: int, device: str = "av-1", witness: bool = False) -> CaptureEvent:
    rng = random.Random(1000 + index)
    media = _write_media(tmp_path, f"media-{index}.bin", rng.randbytes(rng.randint(16, 512)))
    return CaptureEvent(
        event_id=f"evt-{index:04d}",
        media_path=str(media),
        meta=CaptureMeta(
            device_id=device,
            captured_at_ms=1_700_000_000_000 + index * 1000,
            media_kind=MediaKind.VIDEO,
            witness=witness,
        ),
        enqueued_at_ms=1_700_000_000_000 + index * 1000,
    )


def _worker(tmp_path: Path, queue: CaptureQueue | None = None, **kwargs) -> PipelineWorker:
    return PipelineWorker(
        queue=queue if queue is not None else CaptureQueue(),
        keystore=DeviceKeyStore(tmp_path / "keys"),
        evidence_store=EvidenceStore(tmp_path / "evidence"),
        chain=AnchorChain(),
        private_ledger=PrivateLedger(),
        key_rng=random.Random(5),
        **kwargs,
    )


def test_enqueue_rejects_unreadable_media(tmp_path):
    queue = CaptureQueue()
    event = _event(tmp_path, 0)
    Path(event.media_path).unlink()
    with pytest.raises(MediaReadError):
        queue.enqueue(event)


def test_process_next_on_empty_queue_errors(tmp_path):
    worker = _worker(tmp_path)
    with pytest.raises(QueueEmptyError):
        worker.process_next()


def test_single_event_processed_once(tmp_path):
    worker = _worker(tmp_path)
    event = _event(tmp_path, 0)
    worker.queue.enqueue(event)
    result = worker.process_next()
    assert result.outcome is Outcome.NEWLY_PROCESSED
    assert worker.chain.pending_count == 1
    media = Path(event.media_path).read_bytes()
    report = cross_verify(result.evidence_id, media, worker.chain, worker.private_ledger)
    assert report.verdict is Verdict.VERIFIED


def test_duplicate_delivery_is_a_no_op(tmp_path):
    worker = _worker(tmp_path)
    event = _event(tmp_path, 0)
    worker.queue.enqueue(event)
    worker.queue.enqueue(event)  # redelivery
    first = worker.process_next()
    second = worker.process_next()
    assert first.outcome is Outcome.NEWLY_PROCESSED
    assert second.outcome is Outcome.DUPLICATE
    assert worker.chain.pending_count == 1
    assert worker.stats.processed_count == 1
    assert worker.stats.duplicate_count == 1


def test_transient_failure_requeues_then_succeeds(tmp_path):
    worker = _worker(tmp_path, fault_injector=FaultInjector(plan={"anchor": [1]}))
    event = _event(tmp_path, 0)
    worker.queue.enqueue(event)
    failed = worker.process_next()
    assert failed.outcome is Outcome.FAILED and not failed.dead_lettered
    assert worker.queue.depth == 1
    recovered = worker.process_next()
    assert recovered.outcome is Outcome.NEWLY_PROCESSED
    assert recovered.attempts == 2
    # crash between private write and anchor heals on redelivery
    media = Path(event.media_path).read_bytes()
    assert cross_verify(
        recovered.evidence_id, media, worker.chain, worker.private_ledger
    ).verdict is Verdict.VERIFIED


def test_vanished_media_dead_letters_after_max_retries(tmp_path):
    worker = _worker(tmp_path, max_retries=3)
    event = _event(tmp_path, 0)
    worker.queue.enqueue(event)
    Path(event.media_path).unlink()  # deleted mid-flight
    stats = worker.drain()
    assert stats.failed_count == 1
    assert list(worker.dead_letter) == [event.event_id]
    assert stats.failed_count == len(worker.dead_letter)
    assert worker.chain.pending_count == 0


def test_witness_flag_lands_as_private_annotation_once(tmp_path):
    worker = _worker(tmp_path)
    event = _event(tmp_path, 0, witness=True)
    worker.queue.enqueue(event)
    worker.queue.enqueue(event)
    worker.drain()
    record = worker.private_ledger.get("ev-" + event.event_id)
    assert [a.key for a in record.annotations] == ["witness"]


def test_per_device_capture_order_preserved_in_sealed_chain(tmp_path):
    worker = _worker(tmp_path)
    events = [_event(tmp_path, i, device=f"av-{i % 2}") for i in range(8)]
    for event in events:
        worker.queue.enqueue(event)
    worker.drain()
    worker.chain.seal_block(sealed_at_ms=1)
    anchors = worker.chain.anchors_at(0)
    for device in ("av-0", "av-1"):
        expected = [f"ev-{e.event_id}" for e in events if e.meta.device_id == device]
        sealed = [a.evidence_id for a in anchors if a.evidence_id in expected]
        assert sealed == expected


def test_queue_journal_survives_restart(tmp_path):
    journal = tmp_path / "queue.jsonl"
    queue = CaptureQueue(journal)
    events = [_event(tmp_path, i) for i in range(3)]
    for event in events:
        queue.enqueue(event)
    queue.mark_done(queue.dequeue().event_id)  # first event completed
    restarted = CaptureQueue(journal)
    assert restarted.depth == 2
    remaining = [restarted.dequeue().event_id for _ in range(2)]
    assert remaining == [events[1].event_id, events[2].event_id]


def _final_state(tmp_path: Path, tag: str, schedule_seed: int | None, fail_rate: float):
    """Run 60 events under a delivery schedule; return ledger file bytes."""
    base = tmp_path / tag
    base.mkdir()
    queue = CaptureQueue()
    worker = PipelineWorker(
        queue=queue,
        keystore=DeviceKeyStore(base / "keys"),
        evidence_store=EvidenceStore(base / "evidence"),
        chain=AnchorChain(base / "ledger"),
        private_ledger=PrivateLedger(base / "private.json"),
        key_rng=random.Random(5),
    )
    events = [
        CaptureEvent(
            event_id=f"evt-{i:04d}",
            media_path=str(tmp_path / f"media-{i}.bin"),
            meta=CaptureMeta(
                device_id="av-1",
                captured_at_ms=1_700_000_000_000 + i * 1000,
                media_kind=MediaKind.VIDEO,
            ),
            enqueued_at_ms=1_700_000_000_000 + i * 1000,
        )
        for i in range(60)
    ]
    if schedule_seed is None:
        for event in events:
            queue.enqueue(event)
    else:
        rng = random.Random(schedule_seed)
        failures: dict[str, int] = {}
        hook_rng = random.Random(schedule_seed + 1)

        def hook(stage: str, event: CaptureEvent) -> None:
            from claimtrail.errors import TransientFailure

            if stage != "anchor":
                return
            if failures.get(event.event_id, 0) >= 2:
                return
            if hook_rng.random() < fail_rate:
                failures[event.event_id] = failures.get(event.event_id, 0) + 1
                raise TransientFailure("injected")

        worker.fault_injector = FaultInjector(hook=hook)
        for event in events:
            queue.enqueue(event)
            if rng.random() < 0.3:
                queue.enqueue(event)  # duplicate delivery
    worker.drain()
    worker.chain.seal_block(sealed_at_ms=9_999)
    return (
        (base / "ledger" / AnchorChain.BLOCKS_FILENAME).read_bytes(),
        (base / "private.json").read_bytes(),
    )


def test_noisy_delivery_schedule_matches_single_delivery(tmp_path):
    for i in range(60):
        rng = random.Random(1000 + i)
        _write_media(tmp_path, f"media-{i}.bin", rng.randbytes(rng.randint(16, 512)))
    clean = _final_state(tmp_path, "clean", schedule_seed=None, fail_rate=0.0)
    noisy = _final_state(tmp_path, "noisy", schedule_seed=99, fail_rate=0.25)
    assert noisy[0] == clean[0], "chain files differ"
    assert noisy[1] == clean[1], "private ledger files differ"
