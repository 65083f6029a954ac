"""Domain types for staked panel adjudication."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from claimtrail import canonical
from claimtrail.evidence.hashing import ContentHash

SALT_SIZE = 32


@dataclass
class Adjuster:
    """A certified loss adjuster with stake at risk."""

    adjuster_id: str
    certificate_id: str
    free_stake: int
    locked_stake: int = 0
    coherent_count: int = 0
    incoherent_count: int = 0

    def __post_init__(self) -> None:
        if self.free_stake < 0 or self.locked_stake < 0:
            raise ValueError("stake balances must be non-negative")

    @property
    def total_stake(self) -> int:
        return self.free_stake + self.locked_stake

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "adjuster_id": self.adjuster_id,
            "certificate_id": self.certificate_id,
            "free_stake": self.free_stake,
            "locked_stake": self.locked_stake,
            "coherent_count": self.coherent_count,
            "incoherent_count": self.incoherent_count,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Adjuster":
        return cls(
            adjuster_id=data["adjuster_id"],
            certificate_id=data["certificate_id"],
            free_stake=int(data["free_stake"]),
            locked_stake=int(data["locked_stake"]),
            coherent_count=int(data["coherent_count"]),
            incoherent_count=int(data["incoherent_count"]),
        )


@dataclass(frozen=True)
class AdjudicationParams:
    """Game parameters.

    panel_size       k, odd so strict majorities exist when everyone reveals
    stake_lock       S tokens frozen per juror for the duration of a round
    slash_fraction   fraction of S forfeited by incoherent / silent jurors
    fee_pool         arbitration fee F paid by the insurer per decided round
    amount_tolerance delta: a coherent amount lies within delta*median
    max_escalations  extra rounds allowed after the first before forcing
                     a (false, 0) decision
    rng_seed         32 bytes; panel draws derive from seed and claim id
    """

    panel_size: int = 3
    stake_lock: int = 100
    slash_fraction: float = 0.5
    fee_pool: int = 50
    amount_tolerance: float = 0.10
    max_escalations: int = 2
    rng_seed: bytes = b"\x00" * 32

    def __post_init__(self) -> None:
        if self.panel_size <= 0 or self.panel_size % 2 == 0:
            raise ValueError("panel_size must be a positive odd integer")
        if self.stake_lock <= 0:
            raise ValueError("stake_lock must be positive")
        if not 0.0 < self.slash_fraction <= 1.0:
            raise ValueError("slash_fraction must be in (0, 1]")
        if self.fee_pool < 0:
            raise ValueError("fee_pool must be non-negative")
        if not 0.0 <= self.amount_tolerance < 1.0:
            raise ValueError("amount_tolerance must be in [0, 1)")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be non-negative")
        if len(self.rng_seed) != 32:
            raise ValueError("rng_seed must be exactly 32 bytes")

    @property
    def slash_amount(self) -> int:
        return int(Fraction(str(self.slash_fraction)) * self.stake_lock)

    @property
    def tolerance_fraction(self) -> Fraction:
        # exact decimal reading of the configured tolerance, so band edges
        # are sharp instead of drifting with binary float error
        return Fraction(str(self.amount_tolerance))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "panel_size": self.panel_size,
            "stake_lock": self.stake_lock,
            "slash_fraction": self.slash_fraction,
            "fee_pool": self.fee_pool,
            "amount_tolerance": self.amount_tolerance,
            "max_escalations": self.max_escalations,
            "rng_seed_hex": self.rng_seed.hex(),
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "AdjudicationParams":
        defaults = cls()
        return cls(
            panel_size=int(data.get("panel_size", defaults.panel_size)),
            stake_lock=int(data.get("stake_lock", defaults.stake_lock)),
            slash_fraction=float(data.get("slash_fraction", defaults.slash_fraction)),
            fee_pool=int(data.get("fee_pool", defaults.fee_pool)),
            amount_tolerance=float(data.get("amount_tolerance", defaults.amount_tolerance)),
            max_escalations=int(data.get("max_escalations", defaults.max_escalations)),
            rng_seed=bytes.fromhex(data["rng_seed_hex"]) if "rng_seed_hex" in data else defaults.rng_seed,
        )


@dataclass(frozen=True)
class Vote:
    """A juror's position: claim validity and, if valid, a damage amount."""

    validity: bool
    amount: int
    salt: bytes

    def __post_init__(self) -> None:
        if self.amount < 0:
            raise ValueError("vote amount must be non-negative")
        if len(self.salt) != SALT_SIZE:
            raise ValueError(f"salt must be {SALT_SIZE} bytes")

    def canonical_bytes(self) -> bytes:
        return (
            canonical.encode_bool(self.validity)
            + canonical.encode_u64(self.amount)
            + self.salt
        )

    def commitment(self) -> ContentHash:
        return ContentHash.of(self.canonical_bytes())


@dataclass(frozen=True)
class Decision:
    validity: bool
    amount: int

    def to_json_dict(self) -> dict[str, Any]:
        return {"validity": self.validity, "amount": self.amount}


class DeltaReason(str, Enum):
    SLASH = "Slash"
    REDISTRIBUTION_SHARE = "RedistributionShare"
    FEE_SHARE = "FeeShare"
    NO_REVEAL = "NoReveal"


@dataclass(frozen=True)
class StakeDelta:
    adjuster_id: str
    delta: int
    reason: DeltaReason

    def to_json_dict(self) -> dict[str, Any]:
        return {"adjuster_id": self.adjuster_id, "delta": self.delta, "reason": self.reason.value}


class RoundPhase(str, Enum):
    COMMIT = "Commit"
    REVEAL = "Reveal"
    FINALIZED = "Finalized"
