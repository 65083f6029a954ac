"""Stake-weighted panel selection.

Jurors are drawn without replacement with probability proportional to free
stake: more capital at risk, more often called, which is what makes buying
influence expensive. The draw is a pure function of (seed, claim id, round
index, pool snapshot) so two runs over the same state pick the same panel.
"""
from __future__ import annotations

import hashlib
import random

from claimtrail.errors import PanelError
from claimtrail.adjudication.models import Adjuster


def panel_seed(rng_seed: bytes, claim_id: str, round_index: int = 0) -> bytes:
    return hashlib.sha256(
        rng_seed + claim_id.encode("utf-8") + b":" + str(round_index).encode("ascii")
    ).digest()


def draw_panel(pool: list[Adjuster], panel_size: int, seed: bytes) -> list[str]:
    """Draw panel_size distinct adjuster ids, stake-weighted, deterministic.

    Does not mutate the pool; callers lock stakes afterwards.
    """
    if panel_size <= 0:
        raise PanelError("panel size must be positive")
    if len(pool) < panel_size:
        raise PanelError(f"need {panel_size} eligible adjusters, pool has {len(pool)}")
    rng = random.Random(int.from_bytes(seed, "big"))
    remaining = [(a.adjuster_id, a.free_stake) for a in pool]
    panel: list[str] = []
    for _ in range(panel_size):
        total = sum(weight for _, weight in remaining)
        if total <= 0:
            raise PanelError("eligible pool has no stake to weight by")
        point = rng.random() * total
        cumulative = 0
        chosen = len(remaining) - 1
        for index, (_, weight) in enumerate(remaining):
            cumulative += weight
            if point < cumulative:
                chosen = index
                break
        panel.append(remaining.pop(chosen)[0])
    return panel
