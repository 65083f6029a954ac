from __future__ import annotations

import random
from pathlib import Path

import pytest

from claimtrail.clock import LogicalClock
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.workspace import Workspace, WorkspaceConfig


@pytest.fixture
def workspace(tmp_path: Path) -> Workspace:
    """Deterministic workspace rooted in a fresh temp directory."""
    return Workspace(
        tmp_path / "ws",
        config=WorkspaceConfig(),
        clock=LogicalClock(),
        key_rng=random.Random(0xC1A1),
    )


@pytest.fixture
def make_meta():
    def _make(
        device_id: str = "av-001",
        captured_at_ms: int = 1_700_000_000_000,
        media_kind: MediaKind = MediaKind.VIDEO,
        location: tuple[float, float] | None = (40.7, -74.0),
        witness: bool = False,
    ) -> CaptureMeta:
        return CaptureMeta(
            device_id=device_id,
            captured_at_ms=captured_at_ms,
            media_kind=media_kind,
            location=location,
            witness=witness,
        )

    return _make
