from claimtrail.evidence.hashing import ContentHash, HashAlgorithm, hash_content
from claimtrail.evidence.keys import DeviceKeyStore, generate_signing_key
from claimtrail.evidence.manifest import (
    CaptureMeta,
    Manifest,
    MediaKind,
    build_manifest,
    manifest_hash,
    verify_manifest,
)
from claimtrail.evidence.store import EvidenceRecord, EvidenceStore

__all__ = [
    "CaptureMeta",
    "ContentHash",
    "DeviceKeyStore",
    "EvidenceRecord",
    "EvidenceStore",
    "HashAlgorithm",
    "Manifest",
    "MediaKind",
    "build_manifest",
    "generate_signing_key",
    "hash_content",
    "manifest_hash",
    "verify_manifest",
]
