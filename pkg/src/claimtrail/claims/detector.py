"""Pluggable in-line media analysis hook.

Runs on every evidence item during claim verification as a second factor
next to the hash checks. The default lets everything through; a real
synthetic-media detector plugs in behind the same interface.
"""
from __future__ import annotations

from enum import Enum
from typing import Protocol

from claimtrail.evidence.manifest import Manifest


class DetectorVerdict(str, Enum):
    PASS = "pass"
    FLAG = "flag"


class MediaDetector(Protocol):
    def inspect(self, media: bytes, manifest: Manifest) -> DetectorVerdict: ...


class AlwaysPassDetector:
    def inspect(self, media: bytes, manifest: Manifest) -> DetectorVerdict:
        return DetectorVerdict.PASS


class FlagListDetector:
    """Flags a fixed set of evidence ids; handy for tests and demos."""

    def __init__(self, flagged_ids: set[str]):
        self.flagged_ids = set(flagged_ids)

    def inspect(self, media: bytes, manifest: Manifest) -> DetectorVerdict:
        if manifest.evidence_id in self.flagged_ids:
            return DetectorVerdict.FLAG
        return DetectorVerdict.PASS
