"""Content-addressed evidence store.

Media lands under ``objects/<aa>/<digest-hex>`` where ``aa`` is the first
digest byte, so identical captures dedupe by construction. Manifests are
kept beside the objects, keyed by evidence id. Writes go through a
temp-file-and-rename so concurrent duplicate stores are safe; reads take no
lock at all.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from claimtrail.errors import IntegrityError, NotFoundError, TamperError
from claimtrail.evidence.hashing import hash_content
from claimtrail.evidence.manifest import Manifest


@dataclass(frozen=True)
class EvidenceRecord:
    manifest: Manifest
    storage_path: str  # relative to the store root
    size_bytes: int

    def __post_init__(self) -> None:
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")


class EvidenceStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self._objects = self.root / "objects"
        self._manifests = self.root / "manifests"
        self._objects.mkdir(parents=True, exist_ok=True)
        self._manifests.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    # --- paths ---

    def _object_rel(self, digest_hex: str) -> str:
        return f"objects/{digest_hex[:2]}/{digest_hex}"

    def _manifest_path(self, evidence_id: str) -> Path:
        safe = evidence_id.replace("/", "_")
        return self._manifests / f"{safe}.json"

    # --- operations ---

    def store(self, media: bytes, manifest: Manifest) -> EvidenceRecord:
        """Persist media plus manifest; refuses media that does not match."""
        actual = hash_content(media)
        if actual != manifest.content_hash:
            raise IntegrityError(
                f"media hashes to {actual.hex} but manifest claims {manifest.content_hash.hex}"
            )
        digest_hex = manifest.content_hash.hex
        rel = self._object_rel(digest_hex)
        target = self.root / rel
        with self._write_lock:
            if not target.exists():
                target.parent.mkdir(parents=True, exist_ok=True)
                tmp = target.with_name(target.name + ".tmp")
                tmp.write_bytes(media)
                os.replace(tmp, target)
            mpath = self._manifest_path(manifest.evidence_id)
            if not mpath.exists():
                tmp = mpath.with_name(mpath.name + ".tmp")
                tmp.write_text(manifest.to_json(), "utf-8")
                os.replace(tmp, mpath)
        return EvidenceRecord(manifest=manifest, storage_path=rel, size_bytes=len(media))

    def has(self, evidence_id: str) -> bool:
        return self._manifest_path(evidence_id).exists()

    def manifest(self, evidence_id: str) -> Manifest:
        path = self._manifest_path(evidence_id)
        if not path.exists():
            raise NotFoundError(f"unknown evidence id {evidence_id!r}")
        return Manifest.from_json(path.read_text("utf-8"))

    def retrieve(self, evidence_id: str) -> tuple[bytes, Manifest]:
        """Return (media, manifest); rehashes the media to catch corruption."""
        manifest = self.manifest(evidence_id)
        obj_path = self.root / self._object_rel(manifest.content_hash.hex)
        if not obj_path.exists():
            raise NotFoundError(f"object missing for evidence {evidence_id!r}")
        media = obj_path.read_bytes()
        if hash_content(media) != manifest.content_hash:
            raise TamperError(
                f"stored bytes for {evidence_id!r} no longer match digest "
                f"{manifest.content_hash.hex} (storage corruption)"
            )
        return media, manifest

    def record(self, evidence_id: str) -> EvidenceRecord:
        manifest = self.manifest(evidence_id)
        rel = self._object_rel(manifest.content_hash.hex)
        obj_path = self.root / rel
        if not obj_path.exists():
            raise NotFoundError(f"object missing for evidence {evidence_id!r}")
        return EvidenceRecord(manifest=manifest, storage_path=rel, size_bytes=obj_path.stat().st_size)

    def evidence_ids(self) -> list[str]:
        return sorted(p.stem for p in self._manifests.glob("*.json"))
