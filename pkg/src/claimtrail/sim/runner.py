"""Full-system simulation: many claims end to end through the real stack.

Each simulated claim captures synthetic media into the evidence store and
both ledgers, submits and verifies a claim, runs panel adjudication with
strategy-driven jurors, and settles or denies. Nothing is mocked; the
metrics reflect the same code paths an operator drives through the CLI or
the service.

Determinism: one master seed fans out to per-claim RNG streams, device
keys come from a seeded generator, and the clock is logical, so two runs
of the same config produce byte-identical metrics and ledger files.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from claimtrail.adjudication.models import AdjudicationParams, Vote
from claimtrail.clock import LogicalClock
from claimtrail.errors import ConfigError
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.claims.models import ClaimState
from claimtrail.sim.strategies import (
    StrategyKind,
    StrategyProfile,
    amount_grid_for,
    decide_vote,
)
from claimtrail.workspace import Workspace, WorkspaceConfig


@dataclass(frozen=True)
class SimConfig:
    claim_count: int = 100
    validity_prior: float = 0.5
    amount_lo: int = 1000
    amount_hi: int = 10000
    params: AdjudicationParams = field(default_factory=AdjudicationParams)
    profiles: tuple[StrategyProfile, ...] = (
        StrategyProfile(kind=StrategyKind.TRUTHFUL, count=10, accuracy=0.9),
    )
    master_seed: int = 0
    adjuster_initial_stake: int = 300
    insurer_pool: int = 10_000_000
    coverage_limit: int = 10000
    deductible: int = 0
    media_size: int = 128

    def __post_init__(self) -> None:
        if self.claim_count <= 0:
            raise ConfigError("claim_count must be positive")
        if not 0.0 <= self.validity_prior <= 1.0:
            raise ConfigError("validity_prior must be in [0, 1]")
        if not 0 < self.amount_lo <= self.amount_hi:
            raise ConfigError("need 0 < amount_lo <= amount_hi")
        if not self.profiles:
            raise ConfigError("at least one strategy profile required")

    def panel_seed(self) -> bytes:
        if self.params.rng_seed != b"\x00" * 32:
            return self.params.rng_seed
        return hashlib.sha256(f"panel:{self.master_seed}".encode("ascii")).digest()

    def effective_params(self) -> AdjudicationParams:
        return AdjudicationParams(
            panel_size=self.params.panel_size,
            stake_lock=self.params.stake_lock,
            slash_fraction=self.params.slash_fraction,
            fee_pool=self.params.fee_pool,
            amount_tolerance=self.params.amount_tolerance,
            max_escalations=self.params.max_escalations,
            rng_seed=self.panel_seed(),
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_count": self.claim_count,
            "validity_prior": self.validity_prior,
            "amount_lo": self.amount_lo,
            "amount_hi": self.amount_hi,
            "params": self.params.to_json_dict(),
            "profiles": [p.to_json_dict() for p in self.profiles],
            "master_seed": self.master_seed,
            "adjuster_initial_stake": self.adjuster_initial_stake,
            "insurer_pool": self.insurer_pool,
            "coverage_limit": self.coverage_limit,
            "deductible": self.deductible,
            "media_size": self.media_size,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "SimConfig":
        defaults = cls()
        return cls(
            claim_count=int(data.get("claim_count", defaults.claim_count)),
            validity_prior=float(data.get("validity_prior", defaults.validity_prior)),
            amount_lo=int(data.get("amount_lo", defaults.amount_lo)),
            amount_hi=int(data.get("amount_hi", defaults.amount_hi)),
            params=AdjudicationParams.from_json_dict(data.get("params", {})),
            profiles=tuple(StrategyProfile.from_json_dict(p) for p in data["profiles"])
            if "profiles" in data
            else defaults.profiles,
            master_seed=int(data.get("master_seed", defaults.master_seed)),
            adjuster_initial_stake=int(
                data.get("adjuster_initial_stake", defaults.adjuster_initial_stake)
            ),
            insurer_pool=int(data.get("insurer_pool", defaults.insurer_pool)),
            coverage_limit=int(data.get("coverage_limit", defaults.coverage_limit)),
            deductible=int(data.get("deductible", defaults.deductible)),
            media_size=int(data.get("media_size", defaults.media_size)),
        )

    @classmethod
    def load(cls, path: Path) -> "SimConfig":
        return cls.from_json_dict(json.loads(Path(path).read_text("utf-8")))


@dataclass(frozen=True)
class SimMetrics:
    claim_count: int
    decision_accuracy: float
    amount_mae: float
    mean_stake_delta: dict[str, float]
    seats_served: dict[str, int]
    escalation_rate: float
    token_supply_drift: int
    master_seed: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_count": self.claim_count,
            "decision_accuracy": self.decision_accuracy,
            "amount_mae": self.amount_mae,
            "mean_stake_delta": dict(sorted(self.mean_stake_delta.items())),
            "seats_served": dict(sorted(self.seats_served.items())),
            "escalation_rate": self.escalation_rate,
            "token_supply_drift": self.token_supply_drift,
            "master_seed": self.master_seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def summary(self) -> str:
        lines = [
            f"claims            {self.claim_count}",
            f"decision accuracy {self.decision_accuracy:.4f}",
            f"amount MAE        {self.amount_mae:.2f}",
            f"escalation rate   {self.escalation_rate:.4f}",
            f"supply drift      {self.token_supply_drift}",
        ]
        for kind in sorted(self.mean_stake_delta):
            lines.append(
                f"mean delta {kind:<16} {self.mean_stake_delta[kind]:+10.3f}"
                f"  ({self.seats_served[kind]} seats)"
            )
        return "\n".join(lines)


def run_simulation(config: SimConfig, data_dir: Path) -> SimMetrics:
    """Run the configured population over the full stack; see module docs."""
    params = config.effective_params()
    clock = LogicalClock()
    key_rng = random.Random(f"keys:{config.master_seed}")
    workspace = Workspace(
        Path(data_dir),
        config=WorkspaceConfig(params=params, insurer_pool=config.insurer_pool),
        clock=clock,
        key_rng=key_rng,
    )

    kind_of: dict[str, StrategyKind] = {}
    profile_of: dict[StrategyKind, StrategyProfile] = {p.kind: p for p in config.profiles}
    for profile in config.profiles:
        for index in range(profile.count):
            adjuster = workspace.register_adjuster(
                f"cert-{profile.kind.value}-{index:03d}", config.adjuster_initial_stake
            )
            kind_of[adjuster.adjuster_id] = profile.kind
    if len(workspace.registry.eligible(params.stake_lock)) < params.panel_size:
        raise ConfigError(
            f"panel of {params.panel_size} infeasible with {len(kind_of)} adjusters"
        )

    policy = workspace.claims.create_policy(
        "holder-0001", config.coverage_limit, config.deductible
    )
    amount_grid = amount_grid_for(config.amount_hi)
    initial_supply = workspace.total_supply()

    matches = 0
    mae_sum = 0
    mae_count = 0
    escalated_rounds = 0
    delta_sum: dict[StrategyKind, int] = {p.kind: 0 for p in config.profiles}
    seats: dict[StrategyKind, int] = {p.kind: 0 for p in config.profiles}

    for index in range(config.claim_count):
        rng = random.Random(f"{config.master_seed}:claim:{index}")
        truth_valid = rng.random() < config.validity_prior
        fair_amount = rng.randint(config.amount_lo, config.amount_hi)
        media = rng.randbytes(config.media_size)

        meta = CaptureMeta(
            device_id=f"av-{index % 20:03d}",
            captured_at_ms=clock.now_ms(),
            media_kind=MediaKind.VIDEO,
        )
        manifest = workspace.capture(media, meta, evidence_id=f"ev-sim-{index:06d}")
        workspace.seal()

        claim = workspace.claims.submit_claim(policy.policy_id, [manifest.evidence_id])
        workspace.claims.verify_evidence(claim.claim_id)
        round_ = workspace.claims.open_adjudication(claim.claim_id, params)

        while True:
            votes: dict[str, tuple[Vote, bool]] = {}
            for adjuster_id in round_.panel:
                seats[kind_of[adjuster_id]] += 1
                validity, amount, will_reveal = decide_vote(
                    profile_of[kind_of[adjuster_id]], truth_valid, fair_amount, rng, amount_grid
                )
                vote = Vote(validity, amount, rng.randbytes(32))
                votes[adjuster_id] = (vote, will_reveal)
                workspace.rounds.commit(round_.round_id, adjuster_id, vote.commitment())
            revealed = 0
            for adjuster_id in round_.panel:
                vote, will_reveal = votes[adjuster_id]
                if will_reveal:
                    workspace.rounds.reveal(round_.round_id, adjuster_id, vote)
                    revealed += 1
            if revealed < len(round_.panel):
                workspace.rounds.fire_reveal_deadline(round_.round_id)
            result = workspace.finalize_round(round_.round_id, params)
            for delta in result.deltas:
                delta_sum[kind_of[delta.adjuster_id]] += delta.delta
            if result.status == "escalated":
                escalated_rounds += 1
                round_ = workspace.rounds.get(result.next_round_id)
                continue
            break

        decision = result.decision
        assert decision is not None
        if decision.validity == truth_valid:
            matches += 1
        if decision.validity and truth_valid:
            mae_sum += abs(decision.amount - fair_amount)
            mae_count += 1
        if workspace.claims.claim(claim.claim_id).state is ClaimState.APPROVED:
            workspace.claims.settle(claim.claim_id)

    drift = workspace.total_supply() - initial_supply
    return SimMetrics(
        claim_count=config.claim_count,
        decision_accuracy=matches / config.claim_count,
        amount_mae=(mae_sum / mae_count) if mae_count else 0.0,
        mean_stake_delta={
            kind.value: (delta_sum[kind] / seats[kind]) if seats[kind] else 0.0
            for kind in delta_sum
        },
        seats_served={kind.value: seats[kind] for kind in seats},
        escalation_rate=escalated_rounds / config.claim_count,
        token_supply_drift=drift,
        master_seed=config.master_seed,
    )


def write_metrics(metrics: SimMetrics, path: Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(metrics.to_json(), "utf-8")
