from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimtrail.adjudication.models import Vote
from claimtrail.claims.detector import DetectorVerdict, FlagListDetector
from claimtrail.claims.models import (
    ClaimState,
    HistoryEntry,
    Policy,
    compute_payout,
    replay_history,
)
from claimtrail.clock import LogicalClock
from claimtrail.errors import FundingError, InvalidTransitionError, PolicyError
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.workspace import Workspace, WorkspaceConfig


def _policy(limit: int = 10000, deductible: int = 500) -> Policy:
    return Policy(policy_id="pol-x", holder_account="holder", coverage_limit=limit, deductible=deductible)


# --- payout formula ---

def test_payout_cap_then_deduct_examples():
    assert compute_payout(4000, _policy(10000, 500)) == 3500
    assert compute_payout(0, _policy(10000, 500)) == 0
    assert compute_payout(20000, _policy(10000, 500)) == 9500  # cap first, then deduct


def test_payout_never_negative():
    assert compute_payout(100, _policy(10000, 500)) == 0


@settings(max_examples=200, deadline=None)
@given(
    assessed=st.integers(min_value=0, max_value=10**9),
    limit=st.integers(min_value=0, max_value=10**9),
    deductible_fraction=st.floats(min_value=0, max_value=1),
)
def test_payout_bounds_property(assessed, limit, deductible_fraction):
    deductible = int(limit * deductible_fraction)
    policy = _policy(limit, deductible)
    payout = compute_payout(assessed, policy)
    assert 0 <= payout <= min(assessed, limit)


# --- history replay ---

def test_replay_reproduces_state_and_payout():
    history = [
        HistoryEntry(ClaimState.SUBMITTED, 1, "submitted"),
        HistoryEntry(ClaimState.SUBMITTED, 2, "adjusters notified"),
        HistoryEntry(ClaimState.EVIDENCE_VERIFIED, 3, "ok"),
        HistoryEntry(ClaimState.UNDER_ADJUDICATION, 4, "panel"),
        HistoryEntry(ClaimState.APPROVED, 5, "valid"),
        HistoryEntry(ClaimState.SETTLED, 6, "paid", payout=3500),
    ]
    assert replay_history(history) == (ClaimState.SETTLED, 3500)


def test_replay_rejects_illegal_edge():
    history = [
        HistoryEntry(ClaimState.SUBMITTED, 1, "submitted"),
        HistoryEntry(ClaimState.APPROVED, 2, "skipped ahead"),
    ]
    with pytest.raises(InvalidTransitionError):
        replay_history(history)


# --- engine flows over a real workspace ---

@pytest.fixture
def loaded_workspace(tmp_path):
    ws = Workspace(
        tmp_path / "ws",
        config=WorkspaceConfig(),
        clock=LogicalClock(),
        key_rng=random.Random(0xBEEF),
    )
    for i in range(5):
        ws.register_adjuster(f"cert-{i}", 400)
    policy = ws.claims.create_policy("holder-1", 10000, 500)
    rng = random.Random(77)
    evidence_ids = []
    for i in range(2):
        media = rng.randbytes(256)
        meta = CaptureMeta(
            device_id="av-1", captured_at_ms=ws.clock.now_ms(), media_kind=MediaKind.VIDEO
        )
        manifest = ws.capture(media, meta, evidence_id=f"ev-{i}")
        evidence_ids.append(manifest.evidence_id)
    ws.seal()
    return ws, policy, evidence_ids


def test_submit_requires_active_policy(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    ws.claims.deactivate_policy(policy.policy_id)
    with pytest.raises(PolicyError):
        ws.claims.submit_claim(policy.policy_id, evidence_ids)


def test_submit_notifies_adjusters(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    ws.claims.submit_claim(policy.policy_id, evidence_ids)
    audit = (ws.data_dir / "audit.jsonl").read_text()
    assert "adjusters_notified" in audit


def test_verify_evidence_all_good(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    claim = ws.claims.verify_evidence(claim.claim_id)
    assert claim.state is ClaimState.EVIDENCE_VERIFIED


def test_one_tampered_item_rejects_claim(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    manifest = ws.evidence_store.manifest(evidence_ids[1])
    obj = ws.data_dir / "evidence" / f"objects/{manifest.content_hash.hex[:2]}/{manifest.content_hash.hex}"
    corrupted = bytearray(obj.read_bytes())
    corrupted[0] ^= 0x80
    obj.write_bytes(bytes(corrupted))
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    claim = ws.claims.verify_evidence(claim.claim_id)
    assert claim.state is ClaimState.EVIDENCE_REJECTED
    assert evidence_ids[1] in claim.history[-1].cause


def test_detector_flag_rejects_even_when_hashes_verify(tmp_path):
    ws = Workspace(
        tmp_path / "ws",
        config=WorkspaceConfig(),
        clock=LogicalClock(),
        key_rng=random.Random(1),
        detector=FlagListDetector({"ev-0"}),
    )
    policy = ws.claims.create_policy("holder-1", 10000, 0)
    meta = CaptureMeta(device_id="av-1", captured_at_ms=ws.clock.now_ms(), media_kind=MediaKind.PHOTO)
    ws.capture(b"synthetic-looking media", meta, evidence_id="ev-0")
    claim = ws.claims.submit_claim(policy.policy_id, ["ev-0"])
    claim = ws.claims.verify_evidence(claim.claim_id)
    assert claim.state is ClaimState.EVIDENCE_REJECTED
    assert "detector" in claim.history[-1].cause


def _run_panel(ws, claim_id, validity: bool, amount: int):
    round_ = ws.claims.open_adjudication(claim_id, ws.config.params)
    rng = random.Random(55)
    votes = {}
    for adjuster_id in round_.panel:
        vote = Vote(validity, amount if validity else 0, rng.randbytes(32))
        votes[adjuster_id] = vote
        ws.rounds.commit(round_.round_id, adjuster_id, vote.commitment())
    for adjuster_id in round_.panel:
        ws.rounds.reveal(round_.round_id, adjuster_id, votes[adjuster_id])
    return ws.finalize_round(round_.round_id)


def test_full_lifecycle_conserves_tokens(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    supply_before = ws.total_supply()
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    ws.claims.verify_evidence(claim.claim_id)
    result = _run_panel(ws, claim.claim_id, validity=True, amount=4000)
    assert result.decision.validity
    assert ws.claims.claim(claim.claim_id).state is ClaimState.APPROVED
    holder_before = ws.accounts.balance("holder-1")
    transfer = ws.claims.settle(claim.claim_id)
    assert transfer.amount == 3500
    assert ws.accounts.balance("holder-1") == holder_before + 3500
    assert ws.total_supply() == supply_before
    final = ws.claims.claim(claim.claim_id)
    assert final.state is ClaimState.SETTLED
    assert final.payout == 3500
    assert final.replay() == (ClaimState.SETTLED, 3500)
    # settlement is mirrored to both ledgers
    assert ws.private_ledger.settlement(claim.claim_id)["amount"] == 3500
    assert ws.chain.find_receipt(f"settlement:{claim.claim_id}") is not None


def test_denied_claim_cannot_settle(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    ws.claims.verify_evidence(claim.claim_id)
    result = _run_panel(ws, claim.claim_id, validity=False, amount=0)
    assert not result.decision.validity
    assert ws.claims.claim(claim.claim_id).state is ClaimState.DENIED
    with pytest.raises(InvalidTransitionError):
        ws.claims.settle(claim.claim_id)


def test_underfunded_pool_blocks_settlement(tmp_path):
    ws = Workspace(
        tmp_path / "ws",
        config=WorkspaceConfig(insurer_pool=600),  # covers fees once, not the payout
        clock=LogicalClock(),
        key_rng=random.Random(2),
    )
    for i in range(3):
        ws.register_adjuster(f"cert-{i}", 300)
    policy = ws.claims.create_policy("holder-1", 10000, 0)
    meta = CaptureMeta(device_id="av-1", captured_at_ms=ws.clock.now_ms(), media_kind=MediaKind.VIDEO)
    ws.capture(b"media", meta, evidence_id="ev-0")
    claim = ws.claims.submit_claim(policy.policy_id, ["ev-0"])
    ws.claims.verify_evidence(claim.claim_id)
    _run_panel(ws, claim.claim_id, validity=True, amount=5000)
    with pytest.raises(FundingError):
        ws.claims.settle(claim.claim_id)
    after = ws.claims.claim(claim.claim_id)
    assert after.state is ClaimState.APPROVED
    assert "settlement blocked" in after.history[-1].cause


def test_zero_payout_settles_without_transfer(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    ws.claims.verify_evidence(claim.claim_id)
    _run_panel(ws, claim.claim_id, validity=True, amount=300)  # below the 500 deductible
    transfer = ws.claims.settle(claim.claim_id)
    assert transfer is None
    assert ws.claims.claim(claim.claim_id).payout == 0


def test_out_of_order_operations_raise(loaded_workspace):
    ws, policy, evidence_ids = loaded_workspace
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    with pytest.raises(InvalidTransitionError):
        ws.claims.open_adjudication(claim.claim_id, ws.config.params)
    with pytest.raises(InvalidTransitionError):
        ws.claims.settle(claim.claim_id)
    ws.claims.verify_evidence(claim.claim_id)
    with pytest.raises(InvalidTransitionError):
        ws.claims.verify_evidence(claim.claim_id)  # already verified


def test_claims_persist_across_reload(loaded_workspace, tmp_path):
    ws, policy, evidence_ids = loaded_workspace
    claim = ws.claims.submit_claim(policy.policy_id, evidence_ids)
    ws.claims.verify_evidence(claim.claim_id)
    reloaded = Workspace(ws.data_dir, clock=LogicalClock())
    loaded = reloaded.claims.claim(claim.claim_id)
    assert loaded.state is ClaimState.EVIDENCE_VERIFIED
    assert loaded.replay()[0] is ClaimState.EVIDENCE_VERIFIED
