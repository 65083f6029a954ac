"""Integer token accounts.

All token amounts in the system are integers in the smallest unit; every
movement is a balanced transfer, so total supply only changes when an
account is explicitly funded at genesis.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from claimtrail.errors import FundingError, NotFoundError


class TokenAccounts:
    def __init__(self, path: Path | None = None, autosave: bool = True):
        self._path = Path(path) if path is not None else None
        self._autosave = autosave
        self._dirty = False
        self._balances: dict[str, int] = {}
        if self._path is not None and self._path.exists():
            self._balances = {k: int(v) for k, v in json.loads(self._path.read_text("utf-8")).items()}

    def fund(self, account: str, amount: int) -> None:
        """Genesis mint; the only operation that changes total supply."""
        if amount < 0:
            raise ValueError("cannot fund a negative amount")
        self._balances[account] = self._balances.get(account, 0) + amount
        self._save()

    def balance(self, account: str) -> int:
        if account not in self._balances:
            raise NotFoundError(f"unknown account {account!r}")
        return self._balances[account]

    def ensure(self, account: str) -> None:
        self._balances.setdefault(account, 0)
        self._save()

    def transfer(self, from_account: str, to_account: str, amount: int) -> None:
        if amount <= 0:
            raise ValueError("transfer amount must be positive")
        if self._balances.get(from_account, 0) < amount:
            raise FundingError(
                f"account {from_account!r} holds {self._balances.get(from_account, 0)}, "
                f"cannot transfer {amount}"
            )
        self._balances[from_account] -= amount
        self._balances[to_account] = self._balances.get(to_account, 0) + amount
        self._save()

    def debit(self, account: str, amount: int) -> None:
        """Move tokens out of the account system.

        Only for movements whose other side lives in the adjuster stake
        registry (arbitration fees flowing to jurors); the caller must
        apply the matching stake credit or global supply breaks.
        """
        if amount <= 0:
            raise ValueError("debit amount must be positive")
        if self._balances.get(account, 0) < amount:
            raise FundingError(f"account {account!r} cannot cover a {amount} token debit")
        self._balances[account] -= amount
        self._save()

    def credit(self, account: str, amount: int) -> None:
        """Move tokens into the account system; mirror of debit."""
        if amount <= 0:
            raise ValueError("credit amount must be positive")
        self._balances[account] = self._balances.get(account, 0) + amount
        self._save()

    def total(self) -> int:
        return sum(self._balances.values())

    def snapshot(self) -> dict[str, int]:
        return dict(sorted(self._balances.items()))

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
        self._path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self._path.with_name(self._path.name + ".tmp")
        tmp.write_text(json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":")), "utf-8")
        os.replace(tmp, self._path)
