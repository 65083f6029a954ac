"""Pool of registered adjusters and their stake bookkeeping."""
from __future__ import annotations

import json
import os
from pathlib import Path

from claimtrail.errors import NotFoundError, StakeError
from claimtrail.adjudication.models import Adjuster


class AdjusterRegistry:
    def __init__(self, path: Path | None = None, autosave: bool = True):
        self._path = Path(path) if path is not None else None
        self._autosave = autosave
        self._dirty = False
        self._adjusters: dict[str, Adjuster] = {}
        self._counter = 0
        if self._path is not None and self._path.exists():
            self._load()

    def register(self, certificate_id: str, initial_stake: int, minimum_stake: int) -> Adjuster:
        """Admit a certified adjuster into the pool.

        Registration is the genesis event for the adjuster's tokens; the
        stake must cover at least one panel lock or the adjuster could
        never serve.
        """
        if not certificate_id:
            raise StakeError("certificate id must be non-empty")
        if initial_stake < minimum_stake:
            raise StakeError(
                f"initial stake {initial_stake} below the {minimum_stake} token minimum"
            )
        self._counter += 1
        adjuster = Adjuster(
            adjuster_id=f"adj-{self._counter:04d}",
            certificate_id=certificate_id,
            free_stake=initial_stake,
        )
        self._adjusters[adjuster.adjuster_id] = adjuster
        self._save()
        return adjuster

    def get(self, adjuster_id: str) -> Adjuster:
        adjuster = self._adjusters.get(adjuster_id)
        if adjuster is None:
            raise NotFoundError(f"unknown adjuster {adjuster_id!r}")
        return adjuster

    def all(self) -> list[Adjuster]:
        return [self._adjusters[key] for key in sorted(self._adjusters)]

    def eligible(self, stake_lock: int) -> list[Adjuster]:
        return [a for a in self.all() if a.free_stake >= stake_lock]

    def lock_stake(self, adjuster_id: str, amount: int) -> None:
        adjuster = self.get(adjuster_id)
        if adjuster.free_stake < amount:
            raise StakeError(
                f"adjuster {adjuster_id!r} has {adjuster.free_stake} free, cannot lock {amount}"
            )
        adjuster.free_stake -= amount
        adjuster.locked_stake += amount
        self._save()

    def settle_lock(self, adjuster_id: str, locked: int, delta: int) -> None:
        """Release a lock, applying the round's net stake movement."""
        adjuster = self.get(adjuster_id)
        if adjuster.locked_stake < locked:
            raise StakeError(f"adjuster {adjuster_id!r} has no {locked} token lock to release")
        returned = locked + delta
        if returned < 0:
            raise StakeError("slash exceeds the locked stake")
        adjuster.locked_stake -= locked
        adjuster.free_stake += returned
        self._save()

    def total_stake(self) -> int:
        return sum(a.total_stake for a in self._adjusters.values())

    def save(self) -> None:
        self._save()

    def _save(self) -> None:
        if self._path is None:
            return
        if not self._autosave:
            self._dirty = True
            return
        self._write()

    def flush(self) -> None:
        if self._dirty:
            self._write()
            self._dirty = False

    def _write(self) -> None:
        payload = {
            "counter": self._counter,
            "adjusters": [a.to_json_dict() for a in self.all()],
        }
        self._path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self._path.with_name(self._path.name + ".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), "utf-8")
        os.replace(tmp, self._path)

    def _load(self) -> None:
        data = json.loads(self._path.read_text("utf-8"))
        self._counter = int(data.get("counter", 0))
        for raw in data.get("adjusters", []):
            adjuster = Adjuster.from_json_dict(raw)
            self._adjusters[adjuster.adjuster_id] = adjuster
