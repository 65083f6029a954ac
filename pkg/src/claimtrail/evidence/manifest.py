"""Signed capture manifests.

A manifest binds a media fingerprint to when, where, and by which device it
was captured. The detached signature covers the canonical serialization of
every field that precedes it, so any post-capture edit to the metadata or
the digest invalidates the signature.

Canonical layouts:

  signing bytes   = evidence_id . algorithm . digest . captured_at_ms
                    . location? . device_id . media_kind
  canonical bytes = signing bytes . signature . signer_public_key

where strings/bytes are 4-byte length prefixed, integers big-endian, and an
absent location is a zero-length marker (two big-endian f64 when present).
"""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, BinaryIO

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from claimtrail import canonical
from claimtrail.errors import SigningError
from claimtrail.evidence import keys as key_ops
from claimtrail.evidence.hashing import ContentHash, HashAlgorithm, hash_content


class MediaKind(str, Enum):
    VIDEO = "video"
    PHOTO = "photo"
    AUDIO = "audio"


@dataclass(frozen=True)
class CaptureMeta:
    """Capture-time metadata supplied by the device."""

    device_id: str
    captured_at_ms: int
    media_kind: MediaKind
    location: tuple[float, float] | None = None  # (lat, lon) degrees
    witness: bool = False  # neighbouring-vehicle footage rides the same path

    def __post_init__(self) -> None:
        if self.captured_at_ms < 0:
            raise ValueError("captured_at_ms must be non-negative")
        if self.location is not None:
            lat, lon = self.location
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValueError(f"location out of range: {self.location}")


@dataclass(frozen=True)
class Manifest:
    evidence_id: str
    content_hash: ContentHash
    captured_at_ms: int
    location: tuple[float, float] | None
    device_id: str
    media_kind: MediaKind
    signature: bytes
    signer_public_key: bytes

    def signing_bytes(self) -> bytes:
        return _signing_bytes(
            self.evidence_id,
            self.content_hash,
            self.captured_at_ms,
            self.location,
            self.device_id,
            self.media_kind,
        )

    def canonical_bytes(self) -> bytes:
        return (
            self.signing_bytes()
            + canonical.encode_bytes(self.signature)
            + canonical.encode_bytes(self.signer_public_key)
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "evidence_id": self.evidence_id,
            "algorithm": self.content_hash.algorithm.value,
            "digest_b64": base64.b64encode(self.content_hash.digest).decode("ascii"),
            "captured_at_ms": self.captured_at_ms,
            "location": (
                None
                if self.location is None
                else {"lat": self.location[0], "lon": self.location[1]}
            ),
            "device_id": self.device_id,
            "media_kind": self.media_kind.value,
            "signature_b64": base64.b64encode(self.signature).decode("ascii"),
            "signer_public_key_b64": base64.b64encode(self.signer_public_key).decode("ascii"),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Manifest":
        location = data.get("location")
        return cls(
            evidence_id=data["evidence_id"],
            content_hash=ContentHash(
                HashAlgorithm(data["algorithm"]),
                base64.b64decode(data["digest_b64"]),
            ),
            captured_at_ms=int(data["captured_at_ms"]),
            location=None if location is None else (float(location["lat"]), float(location["lon"])),
            device_id=data["device_id"],
            media_kind=MediaKind(data["media_kind"]),
            signature=base64.b64decode(data["signature_b64"]),
            signer_public_key=base64.b64decode(data["signer_public_key_b64"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Manifest":
        return cls.from_json_dict(json.loads(text))

    @classmethod
    def from_canonical_bytes(cls, data: bytes) -> "Manifest":
        reader = canonical.Reader(data)
        evidence_id = reader.str_field()
        algorithm = HashAlgorithm(reader.str_field())
        digest = reader.bytes_field()
        captured_at_ms = reader.u64()
        loc_raw = reader.optional()
        location = None
        if loc_raw is not None:
            loc_reader = canonical.Reader(loc_raw)
            location = (loc_reader.f64(), loc_reader.f64())
        device_id = reader.str_field()
        media_kind = MediaKind(reader.str_field())
        signature = reader.bytes_field()
        signer_public_key = reader.bytes_field()
        reader.expect_end()
        return cls(
            evidence_id=evidence_id,
            content_hash=ContentHash(algorithm, digest),
            captured_at_ms=captured_at_ms,
            location=location,
            device_id=device_id,
            media_kind=media_kind,
            signature=signature,
            signer_public_key=signer_public_key,
        )


def _signing_bytes(
    evidence_id: str,
    content_hash: ContentHash,
    captured_at_ms: int,
    location: tuple[float, float] | None,
    device_id: str,
    media_kind: MediaKind,
) -> bytes:
    loc_payload = None
    if location is not None:
        loc_payload = canonical.encode_f64(location[0]) + canonical.encode_f64(location[1])
    return b"".join(
        (
            canonical.encode_str(evidence_id),
            canonical.encode_str(content_hash.algorithm.value),
            canonical.encode_bytes(content_hash.digest),
            canonical.encode_u64(captured_at_ms),
            canonical.encode_optional(loc_payload),
            canonical.encode_str(device_id),
            canonical.encode_str(media_kind.value),
        )
    )


def build_manifest(
    media: bytes | BinaryIO,
    evidence_id: str,
    meta: CaptureMeta,
    signing_key: Ed25519PrivateKey,
) -> Manifest:
    """Hash the media, then sign the metadata with the device key."""
    if not isinstance(signing_key, Ed25519PrivateKey):
        raise SigningError(f"expected an Ed25519 private key, got {type(signing_key).__name__}")
    content_hash = hash_content(media)
    message = _signing_bytes(
        evidence_id, content_hash, meta.captured_at_ms, meta.location, meta.device_id, meta.media_kind
    )
    signature = key_ops.sign(signing_key, message)
    return Manifest(
        evidence_id=evidence_id,
        content_hash=content_hash,
        captured_at_ms=meta.captured_at_ms,
        location=meta.location,
        device_id=meta.device_id,
        media_kind=meta.media_kind,
        signature=signature,
        signer_public_key=key_ops.public_bytes(signing_key),
    )


def verify_manifest(manifest: Manifest) -> bool:
    """True iff the signature verifies over the canonical signed fields."""
    return key_ops.verify(manifest.signer_public_key, manifest.signature, manifest.signing_bytes())


def manifest_hash(manifest: Manifest) -> ContentHash:
    """Digest of the full canonical manifest (signature and key included)."""
    return ContentHash.of(manifest.canonical_bytes())
