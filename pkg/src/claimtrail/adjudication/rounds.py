"""Commit-reveal adjudication rounds and token redistribution.

The incentive mechanism: jurors stake tokens to serve, vote on (validity,
amount) behind hash commitments, and after reveal the ones coherent with
the outcome split the tokens slashed from the ones who were not, plus the
arbitration fee. Voting with the expected consensus is the only strategy
that profits in expectation, which is the whole point of the game.

Commit-reveal exists because simultaneous independent voting cannot be
assumed in software: without it, a late juror could copy earlier votes and
the game would collapse into follow-the-leader.

A round that cannot decide (zero reveals, or a validity tie once silent
jurors are removed) escalates to a fresh panel of 2k+1, a bounded number of
times; when escalations run out the claim is denied outright.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from claimtrail.accounts import TokenAccounts
from claimtrail.errors import CommitMismatchError, NotFoundError, PhaseError
from claimtrail.evidence.hashing import ContentHash
from claimtrail.adjudication.models import (
    AdjudicationParams,
    Decision,
    DeltaReason,
    RoundPhase,
    StakeDelta,
    Vote,
)
from claimtrail.adjudication.registry import AdjusterRegistry
from claimtrail.adjudication.selection import draw_panel, panel_seed


def lower_median(values: list[int]) -> int:
    """Median that never invents a fractional token: lower of the middle two."""
    if not values:
        raise ValueError("median of empty list")
    return sorted(values)[(len(values) - 1) // 2]


def tally(reveals: dict[str, Vote]) -> Decision | None:
    """Decide (validity, amount) from revealed votes, or None to escalate.

    Validity needs a strict majority of the votes actually revealed. The
    amount is the lower median of the amounts voted by the validity-true
    revealers. Zero reveals, or a tie once non-revealers drop out, cannot
    decide and signal escalation.
    """
    true_votes = [v for v in reveals.values() if v.validity]
    false_count = len(reveals) - len(true_votes)
    if len(true_votes) == false_count:
        return None
    if len(true_votes) > false_count:
        return Decision(validity=True, amount=lower_median([v.amount for v in true_votes]))
    return Decision(validity=False, amount=0)


def coherent(vote: Vote, decision: Decision, params: AdjudicationParams) -> bool:
    """Was this vote coherent with the final decision?

    Validity must match; for a validity-true decision the voted amount must
    also sit within the tolerance band around the decided amount. The band
    check is exact rational arithmetic so the stated edges are inclusive.
    """
    if vote.validity != decision.validity:
        return False
    if not decision.validity:
        return True
    return abs(vote.amount - decision.amount) <= params.tolerance_fraction * decision.amount


def _split_in_order(pool: int, recipients: list[str]) -> dict[str, int]:
    """Equal integer shares, remainder one token at a time in list order."""
    share, remainder = divmod(pool, len(recipients))
    return {
        rid: share + (1 if index < remainder else 0) for index, rid in enumerate(recipients)
    }


def redistribute(
    panel: tuple[str, ...],
    reveals: dict[str, Vote],
    decision: Decision | None,
    params: AdjudicationParams,
) -> tuple[list[StakeDelta], int]:
    """Compute the round's stake movements.

    Jurors who never revealed a valid vote are slashed; with a decision on
    record, revealed-but-incoherent jurors are slashed too. The slashed
    pool and the arbitration fee are split among coherent jurors in equal
    integer shares, remainder assigned one token at a time in panel order.

    Returns (deltas, forfeited): when no juror is coherent, or the round
    escalated without a decision, the slashed pool has nowhere to go and is
    forfeited to the insurer pool.
    """
    slash = params.slash_amount
    deltas: list[StakeDelta] = []
    coherent_ids: list[str] = []
    for adjuster_id in panel:
        vote = reveals.get(adjuster_id)
        if vote is None:
            deltas.append(StakeDelta(adjuster_id, -slash, DeltaReason.NO_REVEAL))
        elif decision is None:
            continue  # revealed into an escalated round: stake simply unlocks
        elif coherent(vote, decision, params):
            coherent_ids.append(adjuster_id)
        else:
            deltas.append(StakeDelta(adjuster_id, -slash, DeltaReason.SLASH))
    pool = slash * len(deltas)
    if decision is None or not coherent_ids:
        return deltas, pool
    for rid, share in _split_in_order(pool, coherent_ids).items():
        if share:
            deltas.append(StakeDelta(rid, share, DeltaReason.REDISTRIBUTION_SHARE))
    for rid, share in _split_in_order(params.fee_pool, coherent_ids).items():
        if share:
            deltas.append(StakeDelta(rid, share, DeltaReason.FEE_SHARE))
    return deltas, 0


@dataclass
class AdjudicationRound:
    round_id: str
    claim_id: str
    round_index: int
    panel: tuple[str, ...]
    phase: RoundPhase = RoundPhase.COMMIT
    commitments: dict[str, ContentHash] = field(default_factory=dict)
    reveals: dict[str, Vote] = field(default_factory=dict)
    commit_deadline_fired: bool = False
    reveal_deadline_fired: bool = False
    decision: Decision | None = None
    deltas: list[StakeDelta] | None = None
    forfeited: int = 0
    escalated_to: str | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "round_id": self.round_id,
            "claim_id": self.claim_id,
            "round_index": self.round_index,
            "panel": list(self.panel),
            "phase": self.phase.value,
            "commitments": {aid: c.hex for aid, c in sorted(self.commitments.items())},
            "reveals": {
                aid: {"validity": v.validity, "amount": v.amount, "salt_hex": v.salt.hex()}
                for aid, v in sorted(self.reveals.items())
            },
            "commit_deadline_fired": self.commit_deadline_fired,
            "reveal_deadline_fired": self.reveal_deadline_fired,
            "decision": None if self.decision is None else self.decision.to_json_dict(),
            "deltas": None if self.deltas is None else [d.to_json_dict() for d in self.deltas],
            "forfeited": self.forfeited,
            "escalated_to": self.escalated_to,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "AdjudicationRound":
        decision = data.get("decision")
        deltas = data.get("deltas")
        return cls(
            round_id=data["round_id"],
            claim_id=data["claim_id"],
            round_index=int(data["round_index"]),
            panel=tuple(data["panel"]),
            phase=RoundPhase(data["phase"]),
            commitments={aid: ContentHash.from_hex(h) for aid, h in data["commitments"].items()},
            reveals={
                aid: Vote(bool(v["validity"]), int(v["amount"]), bytes.fromhex(v["salt_hex"]))
                for aid, v in data["reveals"].items()
            },
            commit_deadline_fired=bool(data["commit_deadline_fired"]),
            reveal_deadline_fired=bool(data["reveal_deadline_fired"]),
            decision=None if decision is None else Decision(bool(decision["validity"]), int(decision["amount"])),
            deltas=None
            if deltas is None
            else [StakeDelta(d["adjuster_id"], int(d["delta"]), DeltaReason(d["reason"])) for d in deltas],
            forfeited=int(data.get("forfeited", 0)),
            escalated_to=data.get("escalated_to"),
        )


@dataclass(frozen=True)
class FinalizeResult:
    status: str  # "decided" | "escalated"
    decision: Decision | None
    deltas: list[StakeDelta]
    forfeited: int
    next_round_id: str | None = None


class RoundEngine:
    """Owns round state machines and applies their token consequences."""

    def __init__(
        self,
        registry: AdjusterRegistry,
        accounts: TokenAccounts,
        insurer_account: str = "insurer-pool",
        rounds_dir: Path | None = None,
        autosave: bool = True,
    ):
        self.registry = registry
        self.accounts = accounts
        self.insurer_account = insurer_account
        self._rounds: dict[str, AdjudicationRound] = {}
        self._counter = 0
        self._autosave = autosave
        self._dirty: set[str] = set()
        self._dir = Path(rounds_dir) if rounds_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # --- round lifecycle ---

    def open_round(
        self,
        claim_id: str,
        params: AdjudicationParams,
        round_index: int = 0,
        panel_size: int | None = None,
    ) -> AdjudicationRound:
        """Select a stake-weighted panel and lock each juror's stake."""
        size = panel_size if panel_size is not None else params.panel_size
        pool = self.registry.eligible(params.stake_lock)
        panel = draw_panel(pool, size, panel_seed(params.rng_seed, claim_id, round_index))
        return self.open_round_with_panel(claim_id, panel, params, round_index)

    def open_round_with_panel(
        self,
        claim_id: str,
        panel: list[str],
        params: AdjudicationParams,
        round_index: int = 0,
    ) -> AdjudicationRound:
        for adjuster_id in panel:
            self.registry.lock_stake(adjuster_id, params.stake_lock)
        self._counter += 1
        round_ = AdjudicationRound(
            round_id=f"rnd-{self._counter:06d}",
            claim_id=claim_id,
            round_index=round_index,
            panel=tuple(panel),
        )
        self._rounds[round_.round_id] = round_
        self._save(round_)
        return round_

    def get(self, round_id: str) -> AdjudicationRound:
        round_ = self._rounds.get(round_id)
        if round_ is None:
            raise NotFoundError(f"unknown adjudication round {round_id!r}")
        return round_

    def rounds_for_claim(self, claim_id: str) -> list[AdjudicationRound]:
        return [r for r in self._rounds.values() if r.claim_id == claim_id]

    def commit(self, round_id: str, adjuster_id: str, commitment: ContentHash) -> AdjudicationRound:
        round_ = self.get(round_id)
        if round_.phase is not RoundPhase.COMMIT:
            raise PhaseError(f"round {round_id} is in {round_.phase.value}, not accepting commitments")
        if adjuster_id not in round_.panel:
            raise PhaseError(f"adjuster {adjuster_id!r} is not on the panel of {round_id}")
        if adjuster_id in round_.commitments:
            raise PhaseError(f"adjuster {adjuster_id!r} already committed in {round_id}")
        round_.commitments[adjuster_id] = commitment
        if len(round_.commitments) == len(round_.panel):
            round_.phase = RoundPhase.REVEAL
        self._save(round_)
        return round_

    def fire_commit_deadline(self, round_id: str) -> AdjudicationRound:
        round_ = self.get(round_id)
        if round_.phase is not RoundPhase.COMMIT:
            raise PhaseError(f"round {round_id} is in {round_.phase.value}, commit deadline is moot")
        round_.commit_deadline_fired = True
        round_.phase = RoundPhase.REVEAL
        self._save(round_)
        return round_

    def reveal(self, round_id: str, adjuster_id: str, vote: Vote) -> AdjudicationRound:
        round_ = self.get(round_id)
        if round_.phase is not RoundPhase.REVEAL:
            raise PhaseError(f"round {round_id} is in {round_.phase.value}, not accepting reveals")
        if adjuster_id not in round_.panel:
            raise PhaseError(f"adjuster {adjuster_id!r} is not on the panel of {round_id}")
        if adjuster_id in round_.reveals:
            raise PhaseError(f"adjuster {adjuster_id!r} already revealed in {round_id}")
        committed = round_.commitments.get(adjuster_id)
        if committed is None:
            raise CommitMismatchError(f"adjuster {adjuster_id!r} never committed in {round_id}")
        if vote.commitment() != committed:
            raise CommitMismatchError(
                f"reveal by {adjuster_id!r} does not hash to its commitment; rejected"
            )
        round_.reveals[adjuster_id] = vote
        self._save(round_)
        return round_

    def fire_reveal_deadline(self, round_id: str) -> AdjudicationRound:
        round_ = self.get(round_id)
        if round_.phase is not RoundPhase.REVEAL:
            raise PhaseError(f"round {round_id} is in {round_.phase.value}, reveal deadline is moot")
        round_.reveal_deadline_fired = True
        self._save(round_)
        return round_

    def _reveal_complete(self, round_: AdjudicationRound) -> bool:
        return len(round_.reveals) == len(round_.panel) or round_.reveal_deadline_fired

    # --- finalization ---

    def finalize(self, round_id: str, params: AdjudicationParams) -> FinalizeResult:
        """Tally, redistribute stakes, and either decide or escalate.

        An escalation settles the current round (silent jurors slashed to
        the insurer pool, the rest unlocked) and opens a fresh panel of
        2k+1. Once escalations are exhausted the decision defaults to
        (false, 0) and jurors are scored against that.
        """
        round_ = self.get(round_id)
        if round_.phase is not RoundPhase.REVEAL:
            raise PhaseError(f"round {round_id} is in {round_.phase.value}, cannot finalize")
        if not self._reveal_complete(round_):
            raise PhaseError(f"round {round_id} still has reveals outstanding and no deadline fired")

        decision = tally(round_.reveals)
        escalate = decision is None and round_.round_index < params.max_escalations
        if decision is None and not escalate:
            decision = Decision(validity=False, amount=0)  # escalations exhausted

        deltas, forfeited = redistribute(round_.panel, round_.reveals, decision, params)
        self._apply(round_, deltas, forfeited, decision, params)

        round_.phase = RoundPhase.FINALIZED
        round_.decision = decision
        round_.deltas = deltas
        round_.forfeited = forfeited

        next_round_id = None
        if escalate:
            self._save(round_)
            next_round = self.open_round(
                round_.claim_id, params, round_.round_index + 1, panel_size=2 * len(round_.panel) + 1
            )
            next_round_id = next_round.round_id
            round_.escalated_to = next_round_id
        self._save(round_)
        return FinalizeResult(
            status="escalated" if escalate else "decided",
            decision=decision,
            deltas=deltas,
            forfeited=forfeited,
            next_round_id=next_round_id,
        )

    def _apply(
        self,
        round_: AdjudicationRound,
        deltas: list[StakeDelta],
        forfeited: int,
        decision: Decision | None,
        params: AdjudicationParams,
    ) -> None:
        per_juror: dict[str, int] = {aid: 0 for aid in round_.panel}
        fees_paid = 0
        slashed_ids: set[str] = set()
        for delta in deltas:
            per_juror[delta.adjuster_id] += delta.delta
            if delta.reason is DeltaReason.FEE_SHARE:
                fees_paid += delta.delta
            if delta.reason in (DeltaReason.SLASH, DeltaReason.NO_REVEAL):
                slashed_ids.add(delta.adjuster_id)
        if fees_paid:
            self.accounts.debit(self.insurer_account, fees_paid)
        if forfeited:
            self.accounts.credit(self.insurer_account, forfeited)
        for adjuster_id in round_.panel:
            self.registry.settle_lock(adjuster_id, params.stake_lock, per_juror[adjuster_id])
            adjuster = self.registry.get(adjuster_id)
            if adjuster_id in slashed_ids:
                adjuster.incoherent_count += 1
            elif decision is not None and adjuster_id in round_.reveals:
                adjuster.coherent_count += 1
        self.registry.save()

    # --- persistence ---

    def _save(self, round_: AdjudicationRound) -> None:
        if self._dir is None:
            return
        path = self._dir / f"{round_.round_id}.json"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(round_.to_json_dict(), sort_keys=True, separators=(",", ":")), "utf-8")
        os.replace(tmp, path)

    def _load(self) -> None:
        for path in sorted(self._dir.glob("rnd-*.json")):
            round_ = AdjudicationRound.from_json_dict(json.loads(path.read_text("utf-8")))
            self._rounds[round_.round_id] = round_
        self._counter = max(
            (int(rid.split("-")[1]) for rid in self._rounds), default=0
        )
