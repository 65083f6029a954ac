"""Round-level Monte Carlo through the real adjudication engine.

Validates the engine's incentive arithmetic against the enumeration
oracle: same seat model (i.i.d. strategies, equal stakes, explicit panel),
same truth model, thousands of rounds, then compare per-strategy mean
deltas. The full-system simulation is only trusted once this agrees.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from claimtrail.accounts import TokenAccounts
from claimtrail.adjudication.models import AdjudicationParams, Vote
from claimtrail.adjudication.registry import AdjusterRegistry
from claimtrail.adjudication.rounds import RoundEngine
from claimtrail.sim.strategies import StrategyKind, StrategyProfile, decide_vote


@dataclass
class RoundSample:
    """Net per-seat deltas collected per strategy."""

    deltas: dict[StrategyKind, list[int]] = field(default_factory=dict)

    def add(self, kind: StrategyKind, delta: int) -> None:
        self.deltas.setdefault(kind, []).append(delta)

    def mean(self, kind: StrategyKind) -> float:
        values = self.deltas[kind]
        return sum(values) / len(values)

    def std_error(self, kind: StrategyKind) -> float:
        values = self.deltas[kind]
        n = len(values)
        mean = sum(values) / n
        variance = sum((v - mean) ** 2 for v in values) / (n - 1)
        return (variance / n) ** 0.5


def simulate_rounds(
    params: AdjudicationParams,
    profiles: list[StrategyProfile],
    panel_size: int,
    n_rounds: int,
    validity_prior: float,
    fair_amount: int,
    amount_grid: list[int],
    seed: int,
) -> RoundSample:
    """Run isolated rounds with i.i.d. seat strategies; collect net deltas.

    Every seat gets a fresh adjuster holding exactly one stake lock, so
    selection pressure and stake drift cannot leak into the expectation
    being measured. Escalation is disabled to match the oracle's
    single-round model.
    """
    params = AdjudicationParams(
        panel_size=params.panel_size,
        stake_lock=params.stake_lock,
        slash_fraction=params.slash_fraction,
        fee_pool=params.fee_pool,
        amount_tolerance=params.amount_tolerance,
        max_escalations=0,
        rng_seed=params.rng_seed,
    )
    rng = random.Random(f"harness:{seed}")
    by_kind = {p.kind: p for p in profiles}
    kinds = [p.kind for p in profiles]
    weights = [p.count for p in profiles]

    registry = AdjusterRegistry()
    accounts = TokenAccounts()
    accounts.fund("insurer-pool", params.fee_pool * n_rounds + params.stake_lock)
    engine = RoundEngine(registry, accounts, "insurer-pool")

    sample = RoundSample()
    for index in range(n_rounds):
        truth_valid = rng.random() < validity_prior
        seat_kinds = rng.choices(kinds, weights=weights, k=panel_size)
        panel: list[str] = []
        seat_of: dict[str, StrategyKind] = {}
        for kind in seat_kinds:
            adjuster = registry.register(f"cert-{kind.value}", params.stake_lock, params.stake_lock)
            panel.append(adjuster.adjuster_id)
            seat_of[adjuster.adjuster_id] = kind

        round_ = engine.open_round_with_panel(f"mc-{index}", panel, params)
        votes: dict[str, tuple[Vote, bool]] = {}
        for adjuster_id in panel:
            validity, amount, will_reveal = decide_vote(
                by_kind[seat_of[adjuster_id]], truth_valid, fair_amount, rng, amount_grid
            )
            vote = Vote(validity, amount, rng.randbytes(32))
            votes[adjuster_id] = (vote, will_reveal)
            engine.commit(round_.round_id, adjuster_id, vote.commitment())
        revealed = 0
        for adjuster_id in panel:
            vote, will_reveal = votes[adjuster_id]
            if will_reveal:
                engine.reveal(round_.round_id, adjuster_id, vote)
                revealed += 1
        if revealed < len(panel):
            engine.fire_reveal_deadline(round_.round_id)
        result = engine.finalize(round_.round_id, params)

        net: dict[str, int] = {adjuster_id: 0 for adjuster_id in panel}
        for delta in result.deltas:
            net[delta.adjuster_id] += delta.delta
        for adjuster_id in panel:
            sample.add(seat_of[adjuster_id], net[adjuster_id])
    return sample
