"""Merkle commitments over block anchors.

Construction:
  leaf     = SHA-256(0x00 || canonical leaf bytes)
  internal = SHA-256(0x01 || left || right)

The 0x00/0x01 prefixes domain-separate leaves from internal nodes so a
crafted leaf cannot impersonate an interior node (second-preimage
ambiguity). When a level has an odd node count the last node is promoted
unchanged to the next level; no duplication, one deterministic tree per
leaf sequence.

An inclusion proof is the ordered list of sibling digests with an explicit
left/right side per step. Folding the leaf through the steps must reproduce
the committed root.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

from claimtrail.evidence.hashing import ContentHash, HashAlgorithm

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ProofStep:
    digest: bytes
    side: Side  # which side the sibling sits on when rehashing


@dataclass(frozen=True)
class MerkleProof:
    leaf_index: int
    block_height: int
    steps: tuple[ProofStep, ...]

    def to_json_dict(self) -> dict:
        return {
            "leaf_index": self.leaf_index,
            "block_height": self.block_height,
            "siblings": [{"digest": s.digest.hex(), "side": s.side.value} for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict) -> "MerkleProof":
        return cls(
            leaf_index=int(data["leaf_index"]),
            block_height=int(data["block_height"]),
            steps=tuple(
                ProofStep(bytes.fromhex(s["digest"]), Side(s["side"])) for s in data["siblings"]
            ),
        )


def leaf_hash(leaf_bytes: bytes) -> bytes:
    return hashlib.sha256(LEAF_PREFIX + leaf_bytes).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(NODE_PREFIX + left + right).digest()


def _levels(leaf_digests: list[bytes]) -> list[list[bytes]]:
    if not leaf_digests:
        raise ValueError("merkle tree needs at least one leaf")
    levels = [list(leaf_digests)]
    while len(levels[-1]) > 1:
        current = levels[-1]
        above: list[bytes] = []
        for i in range(0, len(current) - 1, 2):
            above.append(node_hash(current[i], current[i + 1]))
        if len(current) % 2 == 1:
            above.append(current[-1])  # odd node promoted unchanged
        levels.append(above)
    return levels


def merkle_root(leaf_digests: list[bytes]) -> ContentHash:
    return ContentHash(HashAlgorithm.SHA_256, _levels(leaf_digests)[-1][0])


def build_proof(leaf_digests: list[bytes], index: int, block_height: int) -> MerkleProof:
    if not 0 <= index < len(leaf_digests):
        raise ValueError(f"leaf index {index} out of range for {len(leaf_digests)} leaves")
    steps: list[ProofStep] = []
    position = index
    for level in _levels(leaf_digests)[:-1]:
        if position % 2 == 0:
            if position + 1 < len(level):
                steps.append(ProofStep(level[position + 1], Side.RIGHT))
            # else: odd node promoted, no sibling at this level
        else:
            steps.append(ProofStep(level[position - 1], Side.LEFT))
        position //= 2
    return MerkleProof(leaf_index=index, block_height=block_height, steps=tuple(steps))


def fold(leaf_digest: bytes, proof: MerkleProof) -> bytes:
    current = leaf_digest
    for step in proof.steps:
        if step.side is Side.RIGHT:
            current = node_hash(current, step.digest)
        else:
            current = node_hash(step.digest, current)
    return current


def verify_inclusion(leaf_bytes: bytes, proof: MerkleProof, expected_root: ContentHash) -> bool:
    """Pure check: does folding the leaf through the proof hit the root?"""
    return fold(leaf_hash(leaf_bytes), proof) == expected_root.digest
