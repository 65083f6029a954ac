"""Canonical binary encoding used for everything that gets signed or hashed.

Rules: fixed field order decided by each record type, big-endian integers,
UTF-8 strings and byte fields carry a 4-byte length prefix, absent optional
fields encode as a zero-length marker. Two encoders on two machines must
produce identical bytes for equal values, otherwise signatures and anchored
digests would not be reproducible.
"""
from __future__ import annotations

import struct


def encode_u32(value: int) -> bytes:
    if value < 0 or value > 0xFFFFFFFF:
        raise ValueError(f"u32 out of range: {value}")
    return value.to_bytes(4, "big")


def encode_u64(value: int) -> bytes:
    if value < 0 or value > 0xFFFFFFFFFFFFFFFF:
        raise ValueError(f"u64 out of range: {value}")
    return value.to_bytes(8, "big")


def encode_i64(value: int) -> bytes:
    return struct.pack(">q", value)


def encode_bool(value: bool) -> bytes:
    return b"\x01" if value else b"\x00"


def encode_f64(value: float) -> bytes:
    return struct.pack(">d", value)


def encode_bytes(value: bytes) -> bytes:
    return encode_u32(len(value)) + value


def encode_str(value: str) -> bytes:
    return encode_bytes(value.encode("utf-8"))


def encode_optional(payload: bytes | None) -> bytes:
    """Zero-length marker when absent, length-prefixed payload when present."""
    if payload is None:
        return encode_u32(0)
    if not payload:
        raise ValueError("present optional payload must be non-empty")
    return encode_bytes(payload)


class Reader:
    """Sequential decoder for the canonical encoding."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError("canonical record truncated")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u32(self) -> int:
        return int.from_bytes(self._take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self._take(8), "big")

    def i64(self) -> int:
        return struct.unpack(">q", self._take(8))[0]

    def boolean(self) -> bool:
        byte = self._take(1)
        if byte not in (b"\x00", b"\x01"):
            raise ValueError(f"invalid boolean byte: {byte!r}")
        return byte == b"\x01"

    def f64(self) -> float:
        return struct.unpack(">d", self._take(8))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def bytes_field(self) -> bytes:
        return self._take(self.u32())

    def str_field(self) -> str:
        return self.bytes_field().decode("utf-8")

    def optional(self) -> bytes | None:
        length = self.u32()
        if length == 0:
            return None
        return self._take(length)

    @property
    def exhausted(self) -> bool:
        return self._pos == len(self._data)

    def expect_end(self) -> None:
        if not self.exhausted:
            raise ValueError(f"{len(self._data) - self._pos} trailing bytes")
