"""Independent brute-force oracles the implementation is checked against.

Deliberately naive and written from the construction rules alone: leaves
are 0x00-prefixed hashes, internal nodes 0x01-prefixed, an odd node is
promoted unchanged. No code is shared with the ledger module.
"""
from __future__ import annotations

import hashlib


def oracle_leaf(data: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + data).digest()


def oracle_node(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(b"\x01" + left + right).digest()


def oracle_levels(leaf_payloads: list[bytes]) -> list[list[bytes]]:
    """All tree levels, bottom up, built by explicit pairwise passes."""
    level = [oracle_leaf(p) for p in leaf_payloads]
    levels = [level]
    while len(level) > 1:
        nxt = []
        i = 0
        while i + 1 < len(level):
            nxt.append(oracle_node(level[i], level[i + 1]))
            i += 2
        if i < len(level):
            nxt.append(level[i])
        levels.append(nxt)
        level = nxt
    return levels


def oracle_root(leaf_payloads: list[bytes]) -> bytes:
    return oracle_levels(leaf_payloads)[-1][0]


def oracle_proof(leaf_payloads: list[bytes], index: int) -> list[tuple[bytes, str]]:
    """Sibling path for one leaf as (digest, side) pairs, bottom up."""
    levels = oracle_levels(leaf_payloads)
    path: list[tuple[bytes, str]] = []
    pos = index
    for level in levels[:-1]:
        if pos % 2 == 0 and pos + 1 < len(level):
            path.append((level[pos + 1], "right"))
        elif pos % 2 == 1:
            path.append((level[pos - 1], "left"))
        pos //= 2
    return path


def oracle_fold(leaf_payload: bytes, path: list[tuple[bytes, str]]) -> bytes:
    current = oracle_leaf(leaf_payload)
    for digest, side in path:
        if side == "right":
            current = oracle_node(current, digest)
        else:
            current = oracle_node(digest, current)
    return current
