"""Juror strategy profiles for the incentive simulations.

The population mix probes whether honest assessment actually pays:
truthful jurors read the ground truth with some accuracy, random jurors
guess, adversaries coordinate on a wrong answer (the worst case for a
consensus game), and lazy jurors commit but sometimes never reveal.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from random import Random


class StrategyKind(str, Enum):
    TRUTHFUL = "truthful"
    UNIFORM_RANDOM = "uniform_random"
    ADVERSARIAL = "adversarial"
    LAZY = "lazy"


@dataclass(frozen=True)
class StrategyProfile:
    kind: StrategyKind
    count: int
    accuracy: float = 1.0  # truthful/lazy: chance of reading validity correctly
    amount_noise: float = 0.0  # truthful: relative noise applied to the fair amount
    no_reveal_prob: float = 0.0  # lazy: chance of going silent after committing
    target_validity: bool | None = None  # adversarial: fixed vote, None = invert truth
    target_amount: int = 0  # adversarial: the coordinated amount

    def __post_init__(self) -> None:
        if self.count <= 0:
            raise ValueError("profile count must be positive")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must be in [0, 1]")
        if not 0.0 <= self.no_reveal_prob <= 1.0:
            raise ValueError("no_reveal_prob must be in [0, 1]")
        if self.amount_noise < 0.0:
            raise ValueError("amount_noise must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "count": self.count,
            "accuracy": self.accuracy,
            "amount_noise": self.amount_noise,
            "no_reveal_prob": self.no_reveal_prob,
            "target_validity": self.target_validity,
            "target_amount": self.target_amount,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StrategyProfile":
        return cls(
            kind=StrategyKind(data["kind"]),
            count=int(data["count"]),
            accuracy=float(data.get("accuracy", 1.0)),
            amount_noise=float(data.get("amount_noise", 0.0)),
            no_reveal_prob=float(data.get("no_reveal_prob", 0.0)),
            target_validity=data.get("target_validity"),
            target_amount=int(data.get("target_amount", 0)),
        )


def amount_grid_for(amount_hi: int, points: int = 11) -> list[int]:
    """The finite amount menu random jurors draw from.

    Finite so the brute-force expectation oracle can enumerate it exactly.
    """
    if amount_hi <= 0 or points < 2:
        raise ValueError("need a positive amount ceiling and at least two grid points")
    return [i * amount_hi // (points - 1) for i in range(points)]


def decide_vote(
    profile: StrategyProfile,
    truth_valid: bool,
    fair_amount: int,
    rng: Random,
    amount_grid: list[int],
) -> tuple[bool, int, bool]:
    """One juror's move: (voted validity, voted amount, will reveal).

    Everyone commits; only the reveal flag distinguishes a lazy sleeper.
    A vote for validity=false carries amount 0 by convention.
    """
    if profile.kind is StrategyKind.TRUTHFUL:
        correct = rng.random() < profile.accuracy
        validity = truth_valid if correct else not truth_valid
        amount = 0
        if validity:
            amount = fair_amount
            if profile.amount_noise > 0.0:
                amount = max(0, round(fair_amount * (1.0 + rng.gauss(0.0, profile.amount_noise))))
        return validity, amount, True

    if profile.kind is StrategyKind.UNIFORM_RANDOM:
        validity = rng.random() < 0.5
        amount = rng.choice(amount_grid) if validity else 0
        return validity, amount, True

    if profile.kind is StrategyKind.ADVERSARIAL:
        validity = (not truth_valid) if profile.target_validity is None else profile.target_validity
        amount = profile.target_amount if validity else 0
        return validity, amount, True

    if profile.kind is StrategyKind.LAZY:
        reveal = rng.random() >= profile.no_reveal_prob
        correct = rng.random() < profile.accuracy
        validity = truth_valid if correct else not truth_valid
        amount = fair_amount if validity else 0
        return validity, amount, reveal

    raise ValueError(f"unknown strategy kind {profile.kind}")
