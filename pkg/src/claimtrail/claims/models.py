"""Claim records and the settlement state machine.

State graph:

    Submitted ──> EvidenceVerified ──> UnderAdjudication ──> Approved ──> Settled
        │                                      │
        └──> EvidenceRejected                  └──> Denied

EvidenceRejected, Denied and Settled are terminal. Every state change is an
append-only history entry, and replaying the history must land on the
claim's current state and payout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from claimtrail import canonical
from claimtrail.errors import InvalidTransitionError
from claimtrail.evidence.hashing import ContentHash


class ClaimState(str, Enum):
    SUBMITTED = "Submitted"
    EVIDENCE_VERIFIED = "EvidenceVerified"
    EVIDENCE_REJECTED = "EvidenceRejected"
    UNDER_ADJUDICATION = "UnderAdjudication"
    APPROVED = "Approved"
    DENIED = "Denied"
    SETTLED = "Settled"


ALLOWED_TRANSITIONS: dict[ClaimState, frozenset[ClaimState]] = {
    ClaimState.SUBMITTED: frozenset({ClaimState.EVIDENCE_VERIFIED, ClaimState.EVIDENCE_REJECTED}),
    ClaimState.EVIDENCE_VERIFIED: frozenset({ClaimState.UNDER_ADJUDICATION}),
    ClaimState.EVIDENCE_REJECTED: frozenset(),
    ClaimState.UNDER_ADJUDICATION: frozenset({ClaimState.APPROVED, ClaimState.DENIED}),
    ClaimState.APPROVED: frozenset({ClaimState.SETTLED}),
    ClaimState.DENIED: frozenset(),
    ClaimState.SETTLED: frozenset(),
}


@dataclass(frozen=True)
class Policy:
    policy_id: str
    holder_account: str
    coverage_limit: int
    deductible: int
    active: bool = True

    def __post_init__(self) -> None:
        if not 0 <= self.deductible <= self.coverage_limit:
            raise ValueError("need 0 <= deductible <= coverage_limit")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "policy_id": self.policy_id,
            "holder_account": self.holder_account,
            "coverage_limit": self.coverage_limit,
            "deductible": self.deductible,
            "active": self.active,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Policy":
        return cls(
            policy_id=data["policy_id"],
            holder_account=data["holder_account"],
            coverage_limit=int(data["coverage_limit"]),
            deductible=int(data["deductible"]),
            active=bool(data["active"]),
        )


def compute_payout(assessed_amount: int, policy: Policy) -> int:
    """Cap the assessed loss at the coverage limit, then take the deductible."""
    if assessed_amount < 0:
        raise ValueError("assessed amount must be non-negative")
    return max(0, min(assessed_amount, policy.coverage_limit) - policy.deductible)


@dataclass(frozen=True)
class Transfer:
    from_account: str
    to_account: str
    amount: int
    claim_id: str
    executed_at_ms: int

    def __post_init__(self) -> None:
        if self.amount <= 0:
            raise ValueError("transfer amount must be positive")

    def canonical_bytes(self) -> bytes:
        return b"".join(
            (
                canonical.encode_str(self.from_account),
                canonical.encode_str(self.to_account),
                canonical.encode_u64(self.amount),
                canonical.encode_str(self.claim_id),
                canonical.encode_u64(self.executed_at_ms),
            )
        )

    def digest(self) -> ContentHash:
        return ContentHash.of(self.canonical_bytes())

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "from_account": self.from_account,
            "to_account": self.to_account,
            "amount": self.amount,
            "claim_id": self.claim_id,
            "executed_at_ms": self.executed_at_ms,
            "digest": self.digest().hex,
        }


@dataclass(frozen=True)
class HistoryEntry:
    state: ClaimState
    timestamp_ms: int
    cause: str
    payout: int | None = None

    def to_json_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "state": self.state.value,
            "timestamp_ms": self.timestamp_ms,
            "cause": self.cause,
        }
        if self.payout is not None:
            data["payout"] = self.payout
        return data

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "HistoryEntry":
        payout = data.get("payout")
        return cls(
            state=ClaimState(data["state"]),
            timestamp_ms=int(data["timestamp_ms"]),
            cause=data["cause"],
            payout=None if payout is None else int(payout),
        )


def replay_history(history: list[HistoryEntry]) -> tuple[ClaimState, int | None]:
    """Walk the history, checking every edge; return (final state, payout).

    Entries that repeat the current state are informational notes (juror
    notifications, funding failures) and legal anywhere; anything else must
    follow the transition graph.
    """
    if not history:
        raise InvalidTransitionError("claim history is empty")
    if history[0].state is not ClaimState.SUBMITTED:
        raise InvalidTransitionError(f"history must start at Submitted, got {history[0].state.value}")
    state = history[0].state
    payout: int | None = None
    for entry in history[1:]:
        if entry.state is state:
            pass  # note entry
        elif entry.state in ALLOWED_TRANSITIONS[state]:
            state = entry.state
        else:
            raise InvalidTransitionError(f"illegal transition {state.value} -> {entry.state.value}")
        if entry.payout is not None:
            payout = entry.payout
    return state, payout


@dataclass
class Claim:
    claim_id: str
    policy_id: str
    evidence_ids: tuple[str, ...]
    state: ClaimState = ClaimState.SUBMITTED
    assessed_amount: int | None = None
    payout: int | None = None
    active_round_id: str | None = None
    history: list[HistoryEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.evidence_ids:
            raise ValueError("a claim needs at least one piece of evidence")

    def transition(self, new_state: ClaimState, timestamp_ms: int, cause: str, payout: int | None = None) -> None:
        if new_state not in ALLOWED_TRANSITIONS[self.state]:
            raise InvalidTransitionError(
                f"claim {self.claim_id}: illegal transition {self.state.value} -> {new_state.value}"
            )
        self.state = new_state
        self.history.append(HistoryEntry(new_state, timestamp_ms, cause, payout))

    def note(self, timestamp_ms: int, cause: str) -> None:
        """Record an event that does not move the state machine."""
        self.history.append(HistoryEntry(self.state, timestamp_ms, cause))

    def replay(self) -> tuple[ClaimState, int | None]:
        return replay_history(self.history)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "policy_id": self.policy_id,
            "evidence_ids": list(self.evidence_ids),
            "state": self.state.value,
            "assessed_amount": self.assessed_amount,
            "payout": self.payout,
            "active_round_id": self.active_round_id,
            "history": [entry.to_json_dict() for entry in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Claim":
        claim = cls(
            claim_id=data["claim_id"],
            policy_id=data["policy_id"],
            evidence_ids=tuple(data["evidence_ids"]),
            state=ClaimState(data["state"]),
            assessed_amount=data.get("assessed_amount"),
            payout=data.get("payout"),
            active_round_id=data.get("active_round_id"),
            history=[HistoryEntry.from_json_dict(e) for e in data.get("history", [])],
        )
        return claim
