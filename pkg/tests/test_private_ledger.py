from __future__ import annotations

import random

import pytest

from claimtrail.errors import ImmutabilityError, NotFoundError
from claimtrail.evidence.keys import generate_signing_key
from claimtrail.evidence.manifest import CaptureMeta, MediaKind, build_manifest
from claimtrail.ledger.private import PrivateLedger


def _manifest(evidence_id: str, media: bytes = b"footage", seed: int = 1):
    key = generate_signing_key(random.Random(seed))
    meta = CaptureMeta(device_id="av-1", captured_at_ms=1_700_000_000_000, media_kind=MediaKind.VIDEO)
    return build_manifest(media, evidence_id, meta, key)


def test_put_get_round_trip():
    ledger = PrivateLedger()
    manifest = _manifest("ev-1")
    ledger.put("ev-1", manifest, written_at_ms=1)
    assert ledger.get("ev-1").manifest == manifest


def test_put_is_idempotent_for_identical_manifest():
    ledger = PrivateLedger()
    manifest = _manifest("ev-1")
    ledger.put("ev-1", manifest, written_at_ms=1)
    ledger.put("ev-1", manifest, written_at_ms=2)
    assert len(ledger.evidence_ids()) == 1


def test_manifest_rewrite_refused():
    ledger = PrivateLedger()
    ledger.put("ev-1", _manifest("ev-1", media=b"original"), written_at_ms=1)
    with pytest.raises(ImmutabilityError):
        ledger.put("ev-1", _manifest("ev-1", media=b"doctored"), written_at_ms=2)


def test_annotations_append_only():
    ledger = PrivateLedger()
    ledger.put("ev-1", _manifest("ev-1"), written_at_ms=1)
    ledger.annotate("ev-1", "inspector", "noted hail damage", written_at_ms=2)
    ledger.annotate("ev-1", "inspector", "revised estimate", written_at_ms=3)
    record = ledger.get("ev-1")
    assert [a.value for a in record.annotations] == ["noted hail damage", "revised estimate"]
    assert record.manifest == _manifest("ev-1")  # annotations never touch the manifest


def test_missing_record_raises():
    ledger = PrivateLedger()
    with pytest.raises(NotFoundError):
        ledger.get("ev-x")
    with pytest.raises(NotFoundError):
        ledger.annotate("ev-x", "k", "v", written_at_ms=1)


def test_settlement_documents_are_write_once():
    ledger = PrivateLedger()
    ledger.put_settlement("clm-1", {"amount": 100})
    ledger.put_settlement("clm-1", {"amount": 100})  # same doc is fine
    with pytest.raises(ImmutabilityError):
        ledger.put_settlement("clm-1", {"amount": 999})
    assert ledger.settlement("clm-1") == {"amount": 100}


def test_snapshot_bytes_independent_of_write_order(tmp_path):
    manifests = {f"ev-{i}": _manifest(f"ev-{i}", seed=i) for i in range(4)}

    path_a = tmp_path / "a.json"
    ledger_a = PrivateLedger(path_a)
    for eid in ["ev-0", "ev-1", "ev-2", "ev-3"]:
        ledger_a.put(eid, manifests[eid], written_at_ms=10)

    path_b = tmp_path / "b.json"
    ledger_b = PrivateLedger(path_b)
    for eid in ["ev-3", "ev-1", "ev-0", "ev-2"]:
        ledger_b.put(eid, manifests[eid], written_at_ms=10)

    assert path_a.read_bytes() == path_b.read_bytes()


def test_persistence_round_trip(tmp_path):
    path = tmp_path / "ledger.json"
    ledger = PrivateLedger(path)
    ledger.put("ev-1", _manifest("ev-1"), written_at_ms=1)
    ledger.annotate("ev-1", "witness", "true", written_at_ms=2)
    ledger.put_settlement("clm-1", {"amount": 42})
    reloaded = PrivateLedger(path)
    assert reloaded.get("ev-1").manifest == _manifest("ev-1")
    assert reloaded.get("ev-1").annotations[0].key == "witness"
    assert reloaded.settlement("clm-1") == {"amount": 42}
