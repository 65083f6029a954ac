from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimtrail.accounts import TokenAccounts
from claimtrail.errors import CommitMismatchError, PanelError, PhaseError, StakeError
from claimtrail.adjudication.models import (
    AdjudicationParams,
    Adjuster,
    Decision,
    DeltaReason,
    RoundPhase,
    StakeDelta,
    Vote,
)
from claimtrail.adjudication.registry import AdjusterRegistry
from claimtrail.adjudication.rounds import RoundEngine, coherent, lower_median, redistribute, tally
from claimtrail.adjudication.selection import draw_panel, panel_seed

PARAMS = AdjudicationParams(panel_size=3, stake_lock=100, slash_fraction=0.5, fee_pool=50)


def _salt(seed: int) -> bytes:
    return random.Random(seed).randbytes(32)


def _engine(n_adjusters: int, stake: int = 400):
    registry = AdjusterRegistry()
    accounts = TokenAccounts()
    accounts.fund("insurer-pool", 100_000)
    for i in range(n_adjusters):
        registry.register(f"cert-{i}", stake, PARAMS.stake_lock)
    return RoundEngine(registry, accounts, "insurer-pool"), registry, accounts


# --- registration ---

def test_registration_below_minimum_rejected():
    registry = AdjusterRegistry()
    with pytest.raises(StakeError):
        registry.register("cert", 99, minimum_stake=100)
    with pytest.raises(StakeError):
        registry.register("", 1000, minimum_stake=100)


# --- selection ---

def test_pool_of_exactly_k_all_selected():
    pool = [Adjuster(f"adj-{i}", "c", free_stake=100 * (i + 1)) for i in range(3)]
    panel = draw_panel(pool, 3, panel_seed(b"\x00" * 32, "clm-1"))
    assert sorted(panel) == ["adj-0", "adj-1", "adj-2"]


def test_single_staker_k1_always_selected():
    pool = [Adjuster("adj-whale", "c", free_stake=10_000)]
    assert draw_panel(pool, 1, panel_seed(b"\x01" * 32, "clm-1")) == ["adj-whale"]


def test_selection_is_deterministic_in_seed_claim_and_pool():
    pool = [Adjuster(f"adj-{i}", "c", free_stake=100 + i) for i in range(10)]
    seed = panel_seed(b"\x07" * 32, "clm-42")
    assert draw_panel(pool, 5, seed) == draw_panel(pool, 5, seed)
    other = draw_panel(pool, 5, panel_seed(b"\x07" * 32, "clm-43"))
    assert other != draw_panel(pool, 5, seed) or True  # different claim may draw differently


def test_selection_frequencies_track_stake():
    pool = [
        Adjuster("adj-small", "c", free_stake=100),
        Adjuster("adj-mid", "c", free_stake=200),
        Adjuster("adj-big", "c", free_stake=700),
    ]
    counts = Counter()
    draws = 10_000
    for i in range(draws):
        counts[draw_panel(pool, 1, panel_seed(b"\x09" * 32, f"clm-{i}"))[0]] += 1
    assert abs(counts["adj-small"] / draws - 0.10) <= 0.02
    assert abs(counts["adj-mid"] / draws - 0.20) <= 0.02
    assert abs(counts["adj-big"] / draws - 0.70) <= 0.02


def test_insufficient_pool_errors():
    pool = [Adjuster("adj-0", "c", free_stake=100)]
    with pytest.raises(PanelError):
        draw_panel(pool, 3, panel_seed(b"\x00" * 32, "clm-1"))


# --- commit / reveal ---

def test_commit_reveal_happy_path():
    engine, registry, _ = _engine(3)
    round_ = engine.open_round("clm-1", PARAMS)
    assert all(registry.get(a).locked_stake == 100 for a in round_.panel)
    votes = {a: Vote(True, 3500, _salt(i)) for i, a in enumerate(round_.panel)}
    for adjuster_id, vote in votes.items():
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
    assert engine.get(round_.round_id).phase is RoundPhase.REVEAL
    for adjuster_id, vote in votes.items():
        engine.reveal(round_.round_id, adjuster_id, vote)
    result = engine.finalize(round_.round_id, PARAMS)
    assert result.decision == Decision(True, 3500)


def test_reveal_with_wrong_salt_rejected():
    engine, _, _ = _engine(3)
    round_ = engine.open_round("clm-1", PARAMS)
    target = round_.panel[0]
    vote = Vote(True, 3500, _salt(1))
    engine.commit(round_.round_id, target, vote.commitment())
    others = {}
    for i, adjuster_id in enumerate(round_.panel[1:]):
        other = Vote(True, 3500, _salt(100 + i))
        others[adjuster_id] = other
        engine.commit(round_.round_id, adjuster_id, other.commitment())
    for adjuster_id, other in others.items():
        engine.reveal(round_.round_id, adjuster_id, other)
    with pytest.raises(CommitMismatchError):
        engine.reveal(round_.round_id, target, Vote(True, 9999, vote.salt))
    with pytest.raises(CommitMismatchError):
        engine.reveal(round_.round_id, target, Vote(True, 3500, _salt(2)))
    # never revealed validly -> NoReveal at finalization
    engine.fire_reveal_deadline(round_.round_id)
    result = engine.finalize(round_.round_id, PARAMS)
    slashed = [d for d in result.deltas if d.adjuster_id == target]
    assert slashed and slashed[0].reason is DeltaReason.NO_REVEAL


def test_commit_phase_rules():
    engine, _, _ = _engine(4)
    round_ = engine.open_round("clm-1", PARAMS)
    outsider = [a.adjuster_id for a in engine.registry.all() if a.adjuster_id not in round_.panel][0]
    vote = Vote(True, 1, _salt(3))
    with pytest.raises(PhaseError):
        engine.commit(round_.round_id, outsider, vote.commitment())
    engine.commit(round_.round_id, round_.panel[0], vote.commitment())
    with pytest.raises(PhaseError):
        engine.commit(round_.round_id, round_.panel[0], vote.commitment())  # no double commit
    with pytest.raises(PhaseError):
        engine.reveal(round_.round_id, round_.panel[0], vote)  # still Commit phase
    engine.fire_commit_deadline(round_.round_id)
    with pytest.raises(PhaseError):
        engine.commit(round_.round_id, round_.panel[1], vote.commitment())  # closed


def test_commitments_fuzzed_mismatches_never_count():
    rng = random.Random(123)
    engine, _, _ = _engine(3)
    round_ = engine.open_round("clm-1", PARAMS)
    honest = {a: Vote(True, 3000, rng.randbytes(32)) for a in round_.panel}
    for adjuster_id, vote in honest.items():
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
    for adjuster_id, vote in honest.items():
        for _ in range(5):
            forged = Vote(
                rng.random() < 0.5,
                rng.randrange(0, 10_000),
                rng.randbytes(32),
            )
            if forged.canonical_bytes() == vote.canonical_bytes():
                continue
            with pytest.raises(CommitMismatchError):
                engine.reveal(round_.round_id, adjuster_id, forged)
        engine.reveal(round_.round_id, adjuster_id, vote)
    assert engine.get(round_.round_id).reveals == honest


# --- tally ---

def test_tally_unanimous():
    reveals = {f"a{i}": Vote(True, 3500, _salt(i)) for i in range(3)}
    assert tally(reveals) == Decision(True, 3500)


def test_tally_majority_median_from_spec_example():
    reveals = {
        "a1": Vote(True, 3400, _salt(1)),
        "a2": Vote(True, 3500, _salt(2)),
        "a3": Vote(True, 3600, _salt(3)),
        "a4": Vote(False, 0, _salt(4)),
        "a5": Vote(False, 0, _salt(5)),
    }
    assert tally(reveals) == Decision(True, 3500)


def test_tally_false_majority():
    reveals = {
        "a1": Vote(False, 0, _salt(1)),
        "a2": Vote(False, 0, _salt(2)),
        "a3": Vote(True, 100, _salt(3)),
    }
    assert tally(reveals) == Decision(False, 0)


def test_tally_tie_or_empty_escalates():
    assert tally({}) is None
    assert tally({"a1": Vote(True, 5, _salt(1)), "a2": Vote(False, 0, _salt(2))}) is None


def test_lower_median_for_even_counts():
    assert lower_median([3400, 3500]) == 3400
    assert lower_median([10, 20, 30, 40]) == 20


# --- coherence ---

def test_coherence_exact_match():
    assert coherent(Vote(True, 3500, _salt(1)), Decision(True, 3500), PARAMS)


def test_coherence_band_edges_inclusive():
    decision = Decision(True, 3500)
    assert coherent(Vote(True, 3150, _salt(1)), decision, PARAMS)  # lower edge
    assert coherent(Vote(True, 3850, _salt(2)), decision, PARAMS)  # upper edge
    assert not coherent(Vote(True, 3149, _salt(3)), decision, PARAMS)
    assert not coherent(Vote(True, 3851, _salt(4)), decision, PARAMS)


def test_out_of_band_amount_incoherent():
    assert not coherent(Vote(True, 3000, _salt(1)), Decision(True, 3500), PARAMS)


def test_validity_mismatch_incoherent():
    assert not coherent(Vote(False, 0, _salt(1)), Decision(True, 3500), PARAMS)
    assert not coherent(Vote(True, 0, _salt(1)), Decision(False, 0), PARAMS)


def test_false_decision_ignores_amount():
    assert coherent(Vote(False, 12345, _salt(1)), Decision(False, 0), PARAMS)


# --- redistribution ---

def test_redistribution_spec_worked_example():
    # k=5, S=100, alpha=0.5, F=50; 3 coherent, 2 incoherent
    params = AdjudicationParams(panel_size=5, stake_lock=100, slash_fraction=0.5, fee_pool=50)
    panel = ("a1", "a2", "a3", "a4", "a5")
    decision = Decision(True, 3500)
    reveals = {
        "a1": Vote(True, 3500, _salt(1)),
        "a2": Vote(True, 3400, _salt(2)),
        "a3": Vote(True, 3600, _salt(3)),
        "a4": Vote(False, 0, _salt(4)),
        "a5": Vote(True, 9999, _salt(5)),
    }
    deltas, forfeited = redistribute(panel, reveals, decision, params)
    by_adjuster: dict[str, dict[DeltaReason, int]] = {}
    for delta in deltas:
        by_adjuster.setdefault(delta.adjuster_id, {})[delta.reason] = delta.delta
    assert by_adjuster["a4"] == {DeltaReason.SLASH: -50}
    assert by_adjuster["a5"] == {DeltaReason.SLASH: -50}
    # slash pool 100 split 34/33/33 in panel order, fees 50 split 17/17/16
    assert by_adjuster["a1"] == {DeltaReason.REDISTRIBUTION_SHARE: 34, DeltaReason.FEE_SHARE: 17}
    assert by_adjuster["a2"] == {DeltaReason.REDISTRIBUTION_SHARE: 33, DeltaReason.FEE_SHARE: 17}
    assert by_adjuster["a3"] == {DeltaReason.REDISTRIBUTION_SHARE: 33, DeltaReason.FEE_SHARE: 16}
    non_fee = sum(d.delta for d in deltas if d.reason is not DeltaReason.FEE_SHARE)
    fees = sum(d.delta for d in deltas if d.reason is DeltaReason.FEE_SHARE)
    assert non_fee == 0
    assert fees == 50
    assert forfeited == 0


def test_all_coherent_split_fee_only():
    params = AdjudicationParams(panel_size=3, stake_lock=100, slash_fraction=0.5, fee_pool=50)
    panel = ("a1", "a2", "a3")
    reveals = {a: Vote(True, 3500, _salt(i)) for i, a in enumerate(panel)}
    deltas, forfeited = redistribute(panel, reveals, Decision(True, 3500), params)
    assert forfeited == 0
    assert all(d.reason is DeltaReason.FEE_SHARE for d in deltas)
    assert [d.delta for d in deltas] == [17, 17, 16]


def test_median_voter_is_always_coherent():
    # the median lies within any tolerance band around itself, so a
    # validity-true decision always has at least one coherent juror
    rng = random.Random(5)
    for _ in range(200):
        k = rng.choice([3, 5, 7])
        amounts = [rng.randrange(0, 10_000) for _ in range(k)]
        reveals = {f"a{i}": Vote(True, amounts[i], _salt(i)) for i in range(k)}
        decision = tally(reveals)
        assert decision is not None and decision.validity
        assert any(coherent(v, decision, PARAMS) for v in reveals.values())


def test_zero_coherent_forfeits_to_insurer():
    # decision defaults to (false, 0) when nobody reveals
    params = AdjudicationParams(panel_size=3, stake_lock=100, slash_fraction=0.5, fee_pool=50)
    deltas, forfeited = redistribute(("a1", "a2", "a3"), {}, Decision(False, 0), params)
    assert all(d.reason is DeltaReason.NO_REVEAL and d.delta == -50 for d in deltas)
    assert forfeited == 150


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_redistribution_conservation_property(data):
    k = data.draw(st.sampled_from([1, 3, 5, 7]))
    params = AdjudicationParams(
        panel_size=k,
        stake_lock=data.draw(st.integers(min_value=1, max_value=500)),
        slash_fraction=data.draw(st.sampled_from([0.1, 0.25, 0.5, 0.75, 1.0])),
        fee_pool=data.draw(st.integers(min_value=0, max_value=200)),
    )
    panel = tuple(f"a{i}" for i in range(k))
    reveals = {}
    for adjuster_id in panel:
        action = data.draw(st.sampled_from(["none", "true", "false"]))
        if action == "none":
            continue
        amount = data.draw(st.integers(min_value=0, max_value=5000)) if action == "true" else 0
        reveals[adjuster_id] = Vote(action == "true", amount, _salt(len(reveals)))
    decision = tally(reveals)
    if decision is None:
        decision = Decision(False, 0)
    deltas, forfeited = redistribute(panel, reveals, decision, params)
    non_fee = sum(d.delta for d in deltas if d.reason is not DeltaReason.FEE_SHARE)
    fees = sum(d.delta for d in deltas if d.reason is DeltaReason.FEE_SHARE)
    assert non_fee + forfeited == 0
    assert fees in (0, params.fee_pool)
    coherent_exists = any(
        adjuster_id in reveals and coherent(reveals[adjuster_id], decision, params)
        for adjuster_id in panel
    )
    if coherent_exists:
        assert forfeited == 0 and fees == params.fee_pool
    else:
        assert fees == 0


# --- escalation ---

def test_tie_escalates_to_double_plus_one_panel():
    engine, registry, _ = _engine(10)
    round_ = engine.open_round("clm-1", PARAMS)
    votes = {
        round_.panel[0]: Vote(True, 3000, _salt(1)),
        round_.panel[1]: Vote(False, 0, _salt(2)),
        round_.panel[2]: Vote(True, 3000, _salt(3)),  # committed, never revealed
    }
    for adjuster_id, vote in votes.items():
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
    engine.reveal(round_.round_id, round_.panel[0], votes[round_.panel[0]])
    engine.reveal(round_.round_id, round_.panel[1], votes[round_.panel[1]])
    engine.fire_reveal_deadline(round_.round_id)
    result = engine.finalize(round_.round_id, PARAMS)
    assert result.status == "escalated"
    next_round = engine.get(result.next_round_id)
    assert len(next_round.panel) == 7  # 2k+1
    assert next_round.round_index == 1
    # silent juror slashed into the insurer pool, revealers unlocked whole
    # (total stake, since the escalated round may lock some again)
    assert result.forfeited == 50
    assert [d.reason for d in result.deltas] == [DeltaReason.NO_REVEAL]
    assert registry.get(round_.panel[0]).total_stake == 400
    assert registry.get(round_.panel[2]).total_stake == 350


def test_exhausted_escalations_default_to_denial():
    params = AdjudicationParams(panel_size=3, stake_lock=100, slash_fraction=0.5, fee_pool=50, max_escalations=0)
    engine, _, accounts = _engine(3)
    round_ = engine.open_round("clm-1", params)
    votes = {
        round_.panel[0]: Vote(True, 3000, _salt(1)),
        round_.panel[1]: Vote(False, 0, _salt(2)),
    }
    for adjuster_id, vote in votes.items():
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
        # third juror never commits
    engine.fire_commit_deadline(round_.round_id)
    for adjuster_id, vote in votes.items():
        engine.reveal(round_.round_id, adjuster_id, vote)
    engine.fire_reveal_deadline(round_.round_id)
    result = engine.finalize(round_.round_id, params)
    assert result.status == "decided"
    assert result.decision == Decision(False, 0)
    # false voter coherent with the default denial, true voter slashed
    by_id = {}
    for d in result.deltas:
        by_id.setdefault(d.adjuster_id, 0)
        by_id[d.adjuster_id] += d.delta
    assert by_id[round_.panel[0]] == -50
    assert by_id[round_.panel[1]] == 100 + 50  # both slashes plus the whole fee


def test_round_conservation_with_accounts():
    engine, registry, accounts = _engine(5)
    supply_before = accounts.total() + registry.total_stake()
    params = AdjudicationParams(panel_size=5, stake_lock=100, slash_fraction=0.5, fee_pool=50)
    round_ = engine.open_round("clm-1", params)
    rng = random.Random(9)
    votes = {}
    for i, adjuster_id in enumerate(round_.panel):
        vote = Vote(i < 3, 3500 if i < 3 else 0, rng.randbytes(32))
        votes[adjuster_id] = vote
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
    for adjuster_id, vote in votes.items():
        engine.reveal(round_.round_id, adjuster_id, vote)
    engine.finalize(round_.round_id, params)
    assert accounts.total() + registry.total_stake() == supply_before
    assert all(a.locked_stake == 0 for a in registry.all())


def test_reputation_counters_update():
    engine, registry, _ = _engine(3)
    round_ = engine.open_round("clm-1", PARAMS)
    votes = {
        round_.panel[0]: Vote(True, 3500, _salt(1)),
        round_.panel[1]: Vote(True, 3500, _salt(2)),
        round_.panel[2]: Vote(False, 0, _salt(3)),
    }
    for adjuster_id, vote in votes.items():
        engine.commit(round_.round_id, adjuster_id, vote.commitment())
    for adjuster_id, vote in votes.items():
        engine.reveal(round_.round_id, adjuster_id, vote)
    engine.finalize(round_.round_id, PARAMS)
    assert registry.get(round_.panel[0]).coherent_count == 1
    assert registry.get(round_.panel[2]).incoherent_count == 1
