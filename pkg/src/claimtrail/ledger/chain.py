"""The public anchor chain.

A single-writer, hash-linked block chain holding evidence digests. Each
sealed block commits its anchors under a merkle root and carries the hash
of the previous block header, so rewriting any historical anchor breaks
either the root or the link and is detectable by recomputation.

Persistence is an append-only file of length-prefixed sealed blocks.
Anchors waiting for the next seal live in a sidecar journal that is
truncated at seal time; the block file itself only ever grows.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from claimtrail import canonical
from claimtrail.errors import (
    AnchorConflictError,
    ChainCorruptionError,
    NotFoundError,
    NothingToSealError,
)
from claimtrail.evidence.hashing import ZERO_HASH, ContentHash, HashAlgorithm
from claimtrail.ledger import merkle
from claimtrail.ledger.merkle import MerkleProof


@dataclass(frozen=True)
class AnchorRecord:
    """Public commitment for one piece of evidence: just the two digests."""

    evidence_id: str
    content_hash: ContentHash
    manifest_hash: ContentHash
    submitted_at_ms: int

    def canonical_bytes(self) -> bytes:
        return b"".join(
            (
                canonical.encode_str(self.evidence_id),
                canonical.encode_str(self.content_hash.algorithm.value),
                canonical.encode_bytes(self.content_hash.digest),
                canonical.encode_str(self.manifest_hash.algorithm.value),
                canonical.encode_bytes(self.manifest_hash.digest),
                canonical.encode_u64(self.submitted_at_ms),
            )
        )

    @classmethod
    def from_canonical_bytes(cls, data: bytes) -> "AnchorRecord":
        reader = canonical.Reader(data)
        record = cls(
            evidence_id=reader.str_field(),
            content_hash=ContentHash(HashAlgorithm(reader.str_field()), reader.bytes_field()),
            manifest_hash=ContentHash(HashAlgorithm(reader.str_field()), reader.bytes_field()),
            submitted_at_ms=reader.u64(),
        )
        reader.expect_end()
        return record

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "evidence_id": self.evidence_id,
            "content_hash": self.content_hash.hex,
            "manifest_hash": self.manifest_hash.hex,
            "submitted_at_ms": self.submitted_at_ms,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "AnchorRecord":
        return cls(
            evidence_id=data["evidence_id"],
            content_hash=ContentHash.from_hex(data["content_hash"]),
            manifest_hash=ContentHash.from_hex(data["manifest_hash"]),
            submitted_at_ms=int(data["submitted_at_ms"]),
        )


@dataclass(frozen=True)
class Block:
    height: int
    prev_block_hash: ContentHash
    merkle_root: ContentHash
    sealed_at_ms: int
    anchor_count: int

    def header_bytes(self) -> bytes:
        return b"".join(
            (
                canonical.encode_u64(self.height),
                self.prev_block_hash.digest,
                self.merkle_root.digest,
                canonical.encode_u64(self.sealed_at_ms),
                canonical.encode_u32(self.anchor_count),
            )
        )

    def block_hash(self) -> ContentHash:
        return ContentHash.of(self.header_bytes())

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "height": self.height,
            "prev_block_hash": self.prev_block_hash.hex,
            "merkle_root": self.merkle_root.hex,
            "sealed_at_ms": self.sealed_at_ms,
            "anchor_count": self.anchor_count,
            "block_hash": self.block_hash().hex,
        }


@dataclass(frozen=True)
class AnchorReceipt:
    record: AnchorRecord
    status: str  # "pending" | "sealed"
    block_height: int | None = None
    leaf_index: int | None = None

    def to_json_dict(self) -> dict[str, Any]:
        data = self.record.to_json_dict()
        data.update(status=self.status, block_height=self.block_height, leaf_index=self.leaf_index)
        return data


def verify_inclusion(record: AnchorRecord, proof: MerkleProof, header: Block) -> bool:
    """Pure proof check against a block header.

    True iff the proof targets this header's height and folding the anchor's
    leaf digest through the proof reproduces the header's merkle root.
    """
    if proof.block_height != header.height:
        return False
    return merkle.verify_inclusion(record.canonical_bytes(), proof, header.merkle_root)


class AnchorChain:
    """Anchor queue plus sealed chain, optionally persisted on disk.

    Pass ``directory=None`` for a purely in-memory chain (tests, simulation
    dry runs). Appends are serialized by the single-writer contract; callers
    that share a chain across threads must wrap mutations in their own lock.
    """

    BLOCKS_FILENAME = "chain.bin"
    PENDING_FILENAME = "pending.jsonl"

    def __init__(self, directory: Path | None = None):
        self._dir = Path(directory) if directory is not None else None
        self._blocks: list[Block] = []
        self._block_anchors: list[list[AnchorRecord]] = []
        self._pending: list[AnchorRecord] = []
        self._receipts: dict[str, AnchorReceipt] = {}
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # --- paths ---

    @property
    def _blocks_path(self) -> Path:
        assert self._dir is not None
        return self._dir / self.BLOCKS_FILENAME

    @property
    def _pending_path(self) -> Path:
        assert self._dir is not None
        return self._dir / self.PENDING_FILENAME

    # --- queries ---

    @property
    def height(self) -> int:
        return len(self._blocks)

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    def headers(self) -> list[Block]:
        return list(self._blocks)

    def block_at(self, height: int) -> Block:
        if not 0 <= height < len(self._blocks):
            raise NotFoundError(f"no block at height {height}")
        return self._blocks[height]

    def anchors_at(self, height: int) -> list[AnchorRecord]:
        self.block_at(height)
        return list(self._block_anchors[height])

    def find_receipt(self, evidence_id: str) -> AnchorReceipt | None:
        return self._receipts.get(evidence_id)

    # --- mutations ---

    def append_anchor(self, record: AnchorRecord) -> AnchorReceipt:
        """Queue an anchor for the next block.

        Idempotent on (evidence_id, content_hash): re-submitting returns the
        original receipt. The same evidence id with a different content hash
        is a conflict; a re-capture must mint a new evidence id.
        """
        existing = self._receipts.get(record.evidence_id)
        if existing is not None:
            if existing.record.content_hash != record.content_hash:
                raise AnchorConflictError(
                    f"evidence {record.evidence_id!r} already anchored with content hash "
                    f"{existing.record.content_hash.hex}, refusing {record.content_hash.hex}"
                )
            return existing
        receipt = AnchorReceipt(record=record, status="pending")
        self._pending.append(record)
        self._receipts[record.evidence_id] = receipt
        if self._dir is not None:
            with open(self._pending_path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
        return receipt

    def seal_block(self, sealed_at_ms: int) -> Block:
        """Seal all pending anchors into one deterministic block.

        Anchors are ordered by (submitted_at, evidence_id) so the block and
        its root depend only on the anchor set, not on submission order.
        """
        if not self._pending:
            raise NothingToSealError("no pending anchors to seal")
        anchors = sorted(self._pending, key=lambda a: (a.submitted_at_ms, a.evidence_id))
        leaves = [merkle.leaf_hash(a.canonical_bytes()) for a in anchors]
        prev = self._blocks[-1].block_hash() if self._blocks else ZERO_HASH
        block = Block(
            height=len(self._blocks),
            prev_block_hash=prev,
            merkle_root=merkle.merkle_root(leaves),
            sealed_at_ms=sealed_at_ms,
            anchor_count=len(anchors),
        )
        self._install_block(block, anchors)
        self._pending = []
        if self._dir is not None:
            self._append_block_file(block, anchors)
            self._pending_path.write_text("", "utf-8")
        return block

    def _install_block(self, block: Block, anchors: list[AnchorRecord]) -> None:
        self._blocks.append(block)
        self._block_anchors.append(anchors)
        for index, anchor in enumerate(anchors):
            self._receipts[anchor.evidence_id] = AnchorReceipt(
                record=anchor, status="sealed", block_height=block.height, leaf_index=index
            )

    # --- proofs ---

    def prove_inclusion(self, evidence_id: str) -> MerkleProof:
        receipt = self._receipts.get(evidence_id)
        if receipt is None or receipt.status != "sealed":
            raise NotFoundError(f"evidence {evidence_id!r} is not anchored in a sealed block")
        assert receipt.block_height is not None and receipt.leaf_index is not None
        anchors = self._block_anchors[receipt.block_height]
        leaves = [merkle.leaf_hash(a.canonical_bytes()) for a in anchors]
        return merkle.build_proof(leaves, receipt.leaf_index, receipt.block_height)

    def verify_inclusion(self, record: AnchorRecord, proof: MerkleProof, header: Block) -> bool:
        """Proof check that also requires the header to sit on this chain."""
        if not 0 <= header.height < len(self._blocks):
            return False
        if self._blocks[header.height] != header:
            return False
        return verify_inclusion(record, proof, header)

    # --- integrity ---

    def check_integrity(self) -> None:
        """Recompute links and roots for the whole chain; raise on mismatch."""
        prev = ZERO_HASH
        for height, (block, anchors) in enumerate(zip(self._blocks, self._block_anchors)):
            if block.height != height:
                raise ChainCorruptionError(f"block at position {height} claims height {block.height}")
            if block.prev_block_hash != prev:
                raise ChainCorruptionError(f"broken hash link at height {height}")
            leaves = [merkle.leaf_hash(a.canonical_bytes()) for a in anchors]
            if block.anchor_count != len(anchors) or merkle.merkle_root(leaves) != block.merkle_root:
                raise ChainCorruptionError(f"merkle root mismatch at height {height}")
            prev = block.block_hash()

    # --- persistence ---

    def _append_block_file(self, block: Block, anchors: list[AnchorRecord]) -> None:
        payload = block.header_bytes() + b"".join(
            canonical.encode_bytes(a.canonical_bytes()) for a in anchors
        )
        with open(self._blocks_path, "ab") as handle:
            handle.write(canonical.encode_u32(len(payload)) + payload)

    def _load(self) -> None:
        if self._blocks_path.exists():
            data = self._blocks_path.read_bytes()
            offset = 0
            while offset < len(data):
                if offset + 4 > len(data):
                    raise ChainCorruptionError("truncated length prefix in chain file")
                length = int.from_bytes(data[offset : offset + 4], "big")
                offset += 4
                if offset + length > len(data):
                    raise ChainCorruptionError("truncated block record in chain file")
                self._parse_block(data[offset : offset + length])
                offset += length
        if self._pending_path.exists():
            for line in self._pending_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                record = AnchorRecord.from_json_dict(json.loads(line))
                if record.evidence_id not in self._receipts:
                    self._pending.append(record)
                    self._receipts[record.evidence_id] = AnchorReceipt(record=record, status="pending")
        self.check_integrity()

    def _parse_block(self, payload: bytes) -> None:
        reader = canonical.Reader(payload)
        height = reader.u64()
        prev = ContentHash(HashAlgorithm.SHA_256, reader.raw(32))
        root = ContentHash(HashAlgorithm.SHA_256, reader.raw(32))
        sealed_at = reader.u64()
        count = reader.u32()
        anchors = [AnchorRecord.from_canonical_bytes(reader.bytes_field()) for _ in range(count)]
        reader.expect_end()
        block = Block(
            height=height,
            prev_block_hash=prev,
            merkle_root=root,
            sealed_at_ms=sealed_at,
            anchor_count=count,
        )
        self._install_block(block, anchors)
