"""Per-device Ed25519 signing keys.

One keypair per capture device, stored as 32-byte seeds under the key store
directory. Key generation accepts an RNG so simulations can mint identical
device keys run after run.
"""
from __future__ import annotations

import os
import random
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from claimtrail.errors import NotFoundError, SigningError

SEED_SIZE = 32


def generate_signing_key(rng: random.Random | None = None) -> Ed25519PrivateKey:
    seed = rng.randbytes(SEED_SIZE) if rng is not None else os.urandom(SEED_SIZE)
    return Ed25519PrivateKey.from_private_bytes(seed)


def sign(key: Ed25519PrivateKey, message: bytes) -> bytes:
    try:
        return key.sign(message)
    except Exception as exc:  # cryptography raises bare ValueError subtypes
        raise SigningError(f"signing failed: {exc}") from exc


def verify(public_key_bytes: bytes, signature: bytes, message: bytes) -> bool:
    try:
        public = Ed25519PublicKey.from_public_bytes(public_key_bytes)
        public.verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


def public_bytes(key: Ed25519PrivateKey) -> bytes:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


class DeviceKeyStore:
    """Keeps one Ed25519 seed per device id under ``root/``."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, device_id: str) -> Path:
        safe = device_id.replace("/", "_")
        return self.root / f"{safe}.key"

    def has(self, device_id: str) -> bool:
        return self._path(device_id).exists()

    def create(self, device_id: str, rng: random.Random | None = None) -> Ed25519PrivateKey:
        key = generate_signing_key(rng)
        seed = key.private_bytes_raw()
        path = self._path(device_id)
        tmp = path.with_suffix(".key.tmp")
        tmp.write_bytes(seed.hex().encode("ascii"))
        os.replace(tmp, path)
        return key

    def load(self, device_id: str) -> Ed25519PrivateKey:
        path = self._path(device_id)
        if not path.exists():
            raise NotFoundError(f"no signing key for device {device_id!r}")
        seed = bytes.fromhex(path.read_text("ascii").strip())
        if len(seed) != SEED_SIZE:
            raise SigningError(f"malformed key file for device {device_id!r}")
        return Ed25519PrivateKey.from_private_bytes(seed)

    def load_or_create(self, device_id: str, rng: random.Random | None = None) -> Ed25519PrivateKey:
        if self.has(device_id):
            return self.load(device_id)
        return self.create(device_id, rng)
