"""Claim settlement engine: the smart-contract analog.

Deterministic rules drive a claim from submission through evidence
verification and panel adjudication to an automatic payout transfer. Every
step appends to the claim history and to an audit log; the settlement
itself is written to the private ledger and its digest anchored on the
public chain like any other evidence of record.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

from claimtrail.accounts import TokenAccounts
from claimtrail.clock import SystemClock
from claimtrail.errors import (
    ClaimtrailError,
    FundingError,
    InvalidTransitionError,
    NotFoundError,
    PolicyError,
)
from claimtrail.evidence.store import EvidenceStore
from claimtrail.ledger.chain import AnchorChain, AnchorRecord
from claimtrail.ledger.private import PrivateLedger
from claimtrail.ledger.verify import Verdict, cross_verify
from claimtrail.adjudication.models import AdjudicationParams, Decision, RoundPhase
from claimtrail.adjudication.rounds import AdjudicationRound, RoundEngine
from claimtrail.claims.detector import AlwaysPassDetector, DetectorVerdict, MediaDetector
from claimtrail.claims.models import (
    Claim,
    ClaimState,
    HistoryEntry,
    Policy,
    Transfer,
    compute_payout,
)


class ClaimsEngine:
    def __init__(
        self,
        evidence_store: EvidenceStore,
        chain: AnchorChain,
        private_ledger: PrivateLedger,
        accounts: TokenAccounts,
        round_engine: RoundEngine,
        insurer_account: str = "insurer-pool",
        detector: MediaDetector | None = None,
        clock=None,
        state_dir: Path | None = None,
        audit_log: Path | None = None,
    ):
        self.evidence_store = evidence_store
        self.chain = chain
        self.private_ledger = private_ledger
        self.accounts = accounts
        self.round_engine = round_engine
        self.insurer_account = insurer_account
        self.detector = detector if detector is not None else AlwaysPassDetector()
        self.clock = clock if clock is not None else SystemClock()
        self._policies: dict[str, Policy] = {}
        self._claims: dict[str, Claim] = {}
        self._policy_counter = 0
        self._claim_counter = 0
        self._dir = Path(state_dir) if state_dir is not None else None
        self._audit_path = Path(audit_log) if audit_log is not None else None
        if self._dir is not None:
            (self._dir / "claims").mkdir(parents=True, exist_ok=True)
            self._load()

    # --- policies ---

    def create_policy(self, holder_account: str, coverage_limit: int, deductible: int) -> Policy:
        self._policy_counter += 1
        policy = Policy(
            policy_id=f"pol-{self._policy_counter:04d}",
            holder_account=holder_account,
            coverage_limit=coverage_limit,
            deductible=deductible,
        )
        self._policies[policy.policy_id] = policy
        self.accounts.ensure(holder_account)
        self._save_policies()
        return policy

    def deactivate_policy(self, policy_id: str) -> Policy:
        policy = self.policy(policy_id)
        updated = Policy(
            policy_id=policy.policy_id,
            holder_account=policy.holder_account,
            coverage_limit=policy.coverage_limit,
            deductible=policy.deductible,
            active=False,
        )
        self._policies[policy_id] = updated
        self._save_policies()
        return updated

    def policy(self, policy_id: str) -> Policy:
        policy = self._policies.get(policy_id)
        if policy is None:
            raise NotFoundError(f"unknown policy {policy_id!r}")
        return policy

    def policies(self) -> list[Policy]:
        return [self._policies[k] for k in sorted(self._policies)]

    # --- claims ---

    def claim(self, claim_id: str) -> Claim:
        claim = self._claims.get(claim_id)
        if claim is None:
            raise NotFoundError(f"unknown claim {claim_id!r}")
        return claim

    def claims(self) -> list[Claim]:
        return [self._claims[k] for k in sorted(self._claims)]

    def submit_claim(self, policy_id: str, evidence_ids: list[str]) -> Claim:
        """Open a claim against an active policy and notify the pool."""
        policy = self.policy(policy_id)
        if not policy.active:
            raise PolicyError(f"policy {policy_id!r} is not active")
        if not evidence_ids:
            raise InvalidTransitionError("a claim needs at least one piece of evidence")
        now = self.clock.now_ms()
        self._claim_counter += 1
        claim = Claim(
            claim_id=f"clm-{self._claim_counter:06d}",
            policy_id=policy_id,
            evidence_ids=tuple(evidence_ids),
        )
        claim.history.append(
            HistoryEntry(ClaimState.SUBMITTED, now, "claim submitted with attached evidence")
        )
        self._claims[claim.claim_id] = claim
        self._audit("claim_submitted", claim.claim_id, evidence_ids=list(evidence_ids))
        self._audit("adjusters_notified", claim.claim_id)
        self._save_claim(claim)
        return claim

    def verify_evidence(self, claim_id: str) -> Claim:
        """Cross-verify every attached item and run the in-line detector.

        A single failing item rejects the whole claim; the causes land in
        the history entry.
        """
        claim = self.claim(claim_id)
        if claim.state is not ClaimState.SUBMITTED:
            raise InvalidTransitionError(
                f"claim {claim_id} is {claim.state.value}, evidence verification needs Submitted"
            )
        causes: list[str] = []
        for evidence_id in claim.evidence_ids:
            try:
                media, manifest = self.evidence_store.retrieve(evidence_id)
            except ClaimtrailError as exc:
                causes.append(f"{evidence_id}: {exc}")
                continue
            report = cross_verify(evidence_id, media, self.chain, self.private_ledger)
            if report.verdict is not Verdict.VERIFIED:
                causes.append(f"{evidence_id}: {report.verdict.value}")
                continue
            if self.detector.inspect(media, manifest) is DetectorVerdict.FLAG:
                causes.append(f"{evidence_id}: flagged by in-line detector")
        now = self.clock.now_ms()
        if causes:
            claim.transition(ClaimState.EVIDENCE_REJECTED, now, "; ".join(causes))
            self._audit("evidence_rejected", claim_id, causes=causes)
        else:
            claim.transition(ClaimState.EVIDENCE_VERIFIED, now, "all evidence verified on both ledgers")
            self._audit("evidence_verified", claim_id)
        self._save_claim(claim)
        return claim

    def open_adjudication(self, claim_id: str, params: AdjudicationParams) -> AdjudicationRound:
        claim = self.claim(claim_id)
        if claim.state is not ClaimState.EVIDENCE_VERIFIED:
            raise InvalidTransitionError(
                f"claim {claim_id} is {claim.state.value}, adjudication needs EvidenceVerified"
            )
        round_ = self.round_engine.open_round(claim_id, params)
        claim.transition(
            ClaimState.UNDER_ADJUDICATION,
            self.clock.now_ms(),
            f"panel of {len(round_.panel)} selected in round {round_.round_id}",
        )
        claim.active_round_id = round_.round_id
        self._audit("adjudication_opened", claim_id, round_id=round_.round_id, panel=list(round_.panel))
        self._save_claim(claim)
        return round_

    def note_escalation(self, claim_id: str, next_round_id: str) -> Claim:
        """Record that adjudication escalated to a larger panel."""
        claim = self.claim(claim_id)
        claim.active_round_id = next_round_id
        claim.note(self.clock.now_ms(), f"escalated to round {next_round_id}")
        self._audit("adjudication_escalated", claim_id, round_id=next_round_id)
        self._save_claim(claim)
        return claim

    def apply_decision(self, claim_id: str, round_: AdjudicationRound) -> Claim:
        """Apply a finalized round's decision to the claim."""
        claim = self.claim(claim_id)
        if claim.state is not ClaimState.UNDER_ADJUDICATION:
            raise InvalidTransitionError(
                f"claim {claim_id} is {claim.state.value}, cannot apply a decision"
            )
        if round_.claim_id != claim_id:
            raise InvalidTransitionError(f"round {round_.round_id} belongs to {round_.claim_id}")
        if round_.phase is not RoundPhase.FINALIZED or round_.decision is None or round_.escalated_to:
            raise InvalidTransitionError(f"round {round_.round_id} has no final decision")
        decision: Decision = round_.decision
        now = self.clock.now_ms()
        if decision.validity:
            claim.assessed_amount = decision.amount
            claim.transition(
                ClaimState.APPROVED, now, f"panel found the claim valid, assessed {decision.amount}"
            )
            self._audit("claim_approved", claim_id, assessed_amount=decision.amount)
        else:
            claim.transition(ClaimState.DENIED, now, "panel found the claim invalid")
            self._audit("claim_denied", claim_id)
        self._save_claim(claim)
        return claim

    def settle(self, claim_id: str) -> Transfer | None:
        """Pay out an approved claim and anchor the settlement record.

        Blocks (claim stays Approved, failure noted) when the insurer pool
        cannot cover the payout. A payout of zero settles without a
        transfer.
        """
        claim = self.claim(claim_id)
        if claim.state is not ClaimState.APPROVED:
            raise InvalidTransitionError(f"claim {claim_id} is {claim.state.value}, settle needs Approved")
        policy = self.policy(claim.policy_id)
        assert claim.assessed_amount is not None
        payout = compute_payout(claim.assessed_amount, policy)
        now = self.clock.now_ms()
        transfer: Transfer | None = None
        if payout > 0:
            try:
                self.accounts.transfer(self.insurer_account, policy.holder_account, payout)
            except FundingError as exc:
                claim.note(now, f"settlement blocked, insurer pool cannot fund {payout}: {exc}")
                self._audit("settlement_blocked", claim_id, payout=payout)
                self._save_claim(claim)
                raise
            transfer = Transfer(
                from_account=self.insurer_account,
                to_account=policy.holder_account,
                amount=payout,
                claim_id=claim_id,
                executed_at_ms=now,
            )
            self._record_settlement(transfer)
        claim.transition(ClaimState.SETTLED, now, f"paid {payout} to {policy.holder_account}", payout=payout)
        claim.payout = payout
        self._audit("claim_settled", claim_id, payout=payout)
        self._save_claim(claim)
        return transfer

    def _record_settlement(self, transfer: Transfer) -> None:
        digest = transfer.digest()
        self.private_ledger.put_settlement(transfer.claim_id, transfer.to_json_dict())
        self.chain.append_anchor(
            AnchorRecord(
                evidence_id=f"settlement:{transfer.claim_id}",
                content_hash=digest,
                manifest_hash=digest,
                submitted_at_ms=transfer.executed_at_ms,
            )
        )

    # --- persistence ---

    def _audit(self, event: str, claim_id: str, **extra: Any) -> None:
        if self._audit_path is None:
            return
        entry = {"timestamp_ms": self.clock.now_ms(), "event": event, "claim_id": claim_id, **extra}
        self._audit_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._audit_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry, sort_keys=True) + "\n")

    def _save_policies(self) -> None:
        if self._dir is None:
            return
        payload = {
            "counter": self._policy_counter,
            "policies": [p.to_json_dict() for p in self.policies()],
        }
        path = self._dir / "policies.json"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), "utf-8")
        os.replace(tmp, path)

    def _save_claim(self, claim: Claim) -> None:
        if self._dir is None:
            return
        path = self._dir / "claims" / f"{claim.claim_id}.json"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(claim.to_json(), "utf-8")
        os.replace(tmp, path)

    def _load(self) -> None:
        policies_path = self._dir / "policies.json"
        if policies_path.exists():
            data = json.loads(policies_path.read_text("utf-8"))
            self._policy_counter = int(data.get("counter", 0))
            for raw in data.get("policies", []):
                policy = Policy.from_json_dict(raw)
                self._policies[policy.policy_id] = policy
        for path in sorted((self._dir / "claims").glob("clm-*.json")):
            claim = Claim.from_json_dict(json.loads(path.read_text("utf-8")))
            self._claims[claim.claim_id] = claim
        self._claim_counter = max(
            (int(cid.split("-")[1]) for cid in self._claims), default=0
        )
