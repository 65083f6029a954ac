"""Content hashing: the digital fingerprint everything else anchors.

SHA-256 only for now; the algorithm tag keeps stored digests self-describing
so the format survives a future algorithm change.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import BinaryIO

from claimtrail.errors import MediaReadError

_CHUNK_SIZE = 1024 * 1024

DIGEST_SIZE = 32


class HashAlgorithm(str, Enum):
    SHA_256 = "sha-256"


@dataclass(frozen=True)
class ContentHash:
    """A fixed-length digest plus the algorithm that produced it."""

    algorithm: HashAlgorithm
    digest: bytes

    def __post_init__(self) -> None:
        if self.algorithm is not HashAlgorithm.SHA_256:
            raise ValueError(f"unsupported hash algorithm: {self.algorithm}")
        if len(self.digest) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {len(self.digest)}")

    @property
    def hex(self) -> str:
        return self.digest.hex()

    @classmethod
    def from_hex(cls, hex_digest: str, algorithm: HashAlgorithm = HashAlgorithm.SHA_256) -> "ContentHash":
        return cls(algorithm, bytes.fromhex(hex_digest))

    @classmethod
    def of(cls, data: bytes) -> "ContentHash":
        return cls(HashAlgorithm.SHA_256, hashlib.sha256(data).digest())

    def __str__(self) -> str:
        return f"{self.algorithm.value}:{self.hex}"


ZERO_HASH = ContentHash(HashAlgorithm.SHA_256, b"\x00" * DIGEST_SIZE)


def hash_content(source: bytes | BinaryIO) -> ContentHash:
    """Hash a byte string or a readable binary stream.

    Streams are consumed in 1 MiB chunks so inputs need not fit in memory.
    Raises MediaReadError if the stream cannot be read.
    """
    hasher = hashlib.sha256()
    if isinstance(source, (bytes, bytearray, memoryview)):
        hasher.update(source)
    else:
        try:
            while True:
                chunk = source.read(_CHUNK_SIZE)
                if not chunk:
                    break
                hasher.update(chunk)
        except OSError as exc:
            raise MediaReadError(f"failed to read media stream: {exc}") from exc
    return ContentHash(HashAlgorithm.SHA_256, hasher.digest())


def hash_file(path) -> ContentHash:
    try:
        with open(path, "rb") as handle:
            return hash_content(handle)
    except OSError as exc:
        raise MediaReadError(f"failed to read {path}: {exc}") from exc
