"""The private metadata ledger.

Rich records the public chain only sees as digests: full manifests, keyed
adjuster annotations, and the settlement documents produced when claims pay
out. Manifests are immutable once written; annotation history is
append-only. The on-disk form is a sorted-key JSON snapshot whose bytes
depend only on the final state, not on write order.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from claimtrail.errors import ImmutabilityError, NotFoundError
from claimtrail.evidence.manifest import Manifest


@dataclass(frozen=True)
class Annotation:
    key: str
    value: str
    written_at_ms: int

    def to_json_dict(self) -> dict[str, Any]:
        return {"key": self.key, "value": self.value, "written_at_ms": self.written_at_ms}


@dataclass
class PrivateRecord:
    evidence_id: str
    manifest: Manifest
    written_at_ms: int
    annotations: list[Annotation] = field(default_factory=list)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "evidence_id": self.evidence_id,
            "manifest": self.manifest.to_json_dict(),
            "written_at_ms": self.written_at_ms,
            "annotations": [a.to_json_dict() for a in self.annotations],
        }


class PrivateLedger:
    def __init__(self, path: Path | None = None, autosave: bool = True):
        self._path = Path(path) if path is not None else None
        self._autosave = autosave
        self._dirty = False
        self._records: dict[str, PrivateRecord] = {}
        self._settlements: dict[str, dict[str, Any]] = {}
        if self._path is not None and self._path.exists():
            self._load()

    # --- evidence records ---

    def put(self, evidence_id: str, manifest: Manifest, written_at_ms: int) -> PrivateRecord:
        """Write a manifest record; idempotent for identical manifests.

        A put that would change an existing manifest is refused, only
        annotations may be added after the fact.
        """
        existing = self._records.get(evidence_id)
        if existing is not None:
            if existing.manifest.canonical_bytes() != manifest.canonical_bytes():
                raise ImmutabilityError(
                    f"manifest for {evidence_id!r} is already recorded and cannot be rewritten"
                )
            return existing
        record = PrivateRecord(evidence_id=evidence_id, manifest=manifest, written_at_ms=written_at_ms)
        self._records[evidence_id] = record
        self._save()
        return record

    def get(self, evidence_id: str) -> PrivateRecord:
        record = self._records.get(evidence_id)
        if record is None:
            raise NotFoundError(f"no private record for evidence {evidence_id!r}")
        return record

    def has(self, evidence_id: str) -> bool:
        return evidence_id in self._records

    def annotate(self, evidence_id: str, key: str, value: str, written_at_ms: int) -> PrivateRecord:
        record = self.get(evidence_id)
        record.annotations.append(Annotation(key=key, value=value, written_at_ms=written_at_ms))
        self._save()
        return record

    def evidence_ids(self) -> list[str]:
        return sorted(self._records)

    # --- settlement documents ---

    def put_settlement(self, claim_id: str, document: dict[str, Any]) -> None:
        if claim_id in self._settlements:
            if self._settlements[claim_id] != document:
                raise ImmutabilityError(f"settlement for claim {claim_id!r} already recorded")
            return
        self._settlements[claim_id] = document
        self._save()

    def settlement(self, claim_id: str) -> dict[str, Any]:
        if claim_id not in self._settlements:
            raise NotFoundError(f"no settlement recorded for claim {claim_id!r}")
        return self._settlements[claim_id]

    # --- test hook ---

    def tamper_with_manifest(self, evidence_id: str, manifest: Manifest) -> None:
        """Overwrite a stored manifest, bypassing immutability.

        Exists so tests can corrupt the private side and watch cross
        verification flag the mismatch. Not part of the public API.
        """
        record = self.get(evidence_id)
        record.manifest = manifest
        self._save()

    # --- persistence ---

    def _snapshot(self) -> dict[str, Any]:
        return {
            "records": {eid: rec.to_json_dict() for eid, rec in sorted(self._records.items())},
            "settlements": dict(sorted(self._settlements.items())),
        }

    def _save(self) -> None:
        if self._path is None:
            return
        if not self._autosave:
            self._dirty = True
            return
        self._write()

    def flush(self) -> None:
        if self._dirty:
            self._write()
            self._dirty = False

    def _write(self) -> None:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self._path.with_name(self._path.name + ".tmp")
        tmp.write_text(json.dumps(self._snapshot(), sort_keys=True, separators=(",", ":")), "utf-8")
        os.replace(tmp, self._path)

    def _load(self) -> None:
        data = json.loads(self._path.read_text("utf-8"))
        for eid, raw in data.get("records", {}).items():
            self._records[eid] = PrivateRecord(
                evidence_id=raw["evidence_id"],
                manifest=Manifest.from_json_dict(raw["manifest"]),
                written_at_ms=int(raw["written_at_ms"]),
                annotations=[
                    Annotation(a["key"], a["value"], int(a["written_at_ms"]))
                    for a in raw.get("annotations", [])
                ],
            )
        self._settlements = dict(data.get("settlements", {}))
