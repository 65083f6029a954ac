from __future__ import annotations

import random

import pytest

from claimtrail.errors import IntegrityError, NotFoundError, TamperError
from claimtrail.evidence.keys import generate_signing_key
from claimtrail.evidence.manifest import CaptureMeta, MediaKind, build_manifest
from claimtrail.evidence.store import EvidenceStore

MEDIA = b"\x00\x01collision footage" * 33


def _manifest(media: bytes, evidence_id: str = "ev-1"):
    key = generate_signing_key(random.Random(21))
    meta = CaptureMeta(device_id="av-1", captured_at_ms=1_700_000_000_000, media_kind=MediaKind.PHOTO)
    return build_manifest(media, evidence_id, meta, key)


def test_store_and_retrieve_round_trip(tmp_path):
    store = EvidenceStore(tmp_path)
    manifest = _manifest(MEDIA)
    record = store.store(MEDIA, manifest)
    assert record.size_bytes == len(MEDIA)
    media, loaded = store.retrieve("ev-1")
    assert media == MEDIA
    assert loaded == manifest


def test_store_refuses_mismatched_media(tmp_path):
    store = EvidenceStore(tmp_path)
    manifest = _manifest(MEDIA)
    with pytest.raises(IntegrityError):
        store.store(MEDIA + b"x", manifest)


def test_store_is_idempotent_and_content_addressed(tmp_path):
    store = EvidenceStore(tmp_path)
    manifest = _manifest(MEDIA)
    first = store.store(MEDIA, manifest)
    second = store.store(MEDIA, manifest)
    assert first.storage_path == second.storage_path
    objects = list((tmp_path / "objects").rglob("*"))
    assert len([p for p in objects if p.is_file()]) == 1


def test_duplicate_media_under_two_ids_shares_one_object(tmp_path):
    store = EvidenceStore(tmp_path)
    store.store(MEDIA, _manifest(MEDIA, "ev-1"))
    store.store(MEDIA, _manifest(MEDIA, "ev-2"))
    files = [p for p in (tmp_path / "objects").rglob("*") if p.is_file()]
    assert len(files) == 1
    assert len(store.evidence_ids()) == 2


def test_corrupted_object_detected_on_retrieve(tmp_path):
    store = EvidenceStore(tmp_path)
    manifest = _manifest(MEDIA)
    record = store.store(MEDIA, manifest)
    obj_path = tmp_path / record.storage_path
    corrupted = bytearray(obj_path.read_bytes())
    corrupted[3] ^= 0x40
    obj_path.write_bytes(bytes(corrupted))
    with pytest.raises(TamperError):
        store.retrieve("ev-1")


def test_unknown_evidence_id_raises(tmp_path):
    store = EvidenceStore(tmp_path)
    with pytest.raises(NotFoundError):
        store.retrieve("ev-missing")
