"""Exact per-round stake-delta expectations by enumeration.

Independent oracle for the incentive property: instead of running rounds,
enumerate every joint vote outcome a panel can produce, weight it by the
strategy probabilities, and score it with exact rational arithmetic. The
Monte-Carlo harness must land within sampling error of these numbers
before its results are trusted.

Model (matching the harness):

  - panel seats are filled i.i.d. by strategy, probability proportional to
    profile counts;
  - ground truth validity is Bernoulli(validity_prior) with one fixed fair
    amount, truthful jurors carry zero amount noise;
  - no escalation: an undecidable round scores against (false, 0), which is
    the engine's behaviour at max_escalations = 0;
  - a coherent juror's expected share of (slashed pool + fee) is
    pool / n_coherent exactly, because the one-token remainder rotates
    uniformly over seat order.

Tractable for the small panels the property needs (k <= 5, a few dozen
distinct outcomes); complexity is combinations-with-replacement over the
outcome alphabet, not k-fold products.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial

from claimtrail.adjudication.models import AdjudicationParams
from claimtrail.sim.strategies import StrategyKind, StrategyProfile

# An outcome is None (never revealed) or (validity, amount).
Outcome = tuple[bool, int] | None


def _outcome_distribution(
    profile: StrategyProfile, truth_valid: bool, fair_amount: int, amount_grid: list[int]
) -> dict[Outcome, Fraction]:
    """Exact distribution of one juror's revealed outcome given the truth."""
    dist: dict[Outcome, Fraction] = {}

    def add(outcome: Outcome, prob: Fraction) -> None:
        if prob:
            dist[outcome] = dist.get(outcome, Fraction(0)) + prob

    correct_vote: Outcome = (truth_valid, fair_amount if truth_valid else 0)
    wrong_vote: Outcome = (not truth_valid, fair_amount if not truth_valid else 0)

    if profile.kind is StrategyKind.TRUTHFUL:
        if profile.amount_noise != 0.0:
            raise ValueError("the enumeration oracle requires truthful amount_noise = 0")
        p = Fraction(str(profile.accuracy))
        add(correct_vote, p)
        add(wrong_vote, 1 - p)
    elif profile.kind is StrategyKind.UNIFORM_RANDOM:
        add((False, 0), Fraction(1, 2))
        share = Fraction(1, 2 * len(amount_grid))
        for amount in amount_grid:
            add((True, amount), share)
    elif profile.kind is StrategyKind.ADVERSARIAL:
        validity = (not truth_valid) if profile.target_validity is None else profile.target_validity
        add((validity, profile.target_amount if validity else 0), Fraction(1))
    elif profile.kind is StrategyKind.LAZY:
        q = Fraction(str(profile.no_reveal_prob))
        p = Fraction(str(profile.accuracy))
        add(None, q)
        add(correct_vote, (1 - q) * p)
        add(wrong_vote, (1 - q) * (1 - p))
    else:
        raise ValueError(f"unknown strategy kind {profile.kind}")
    return dist


def _decide(outcomes: list[Outcome]) -> tuple[bool, int]:
    """Oracle-side tally: strict majority, lower median, tie means (false, 0)."""
    reveals = [o for o in outcomes if o is not None]
    true_amounts = sorted(amount for validity, amount in reveals if validity)
    false_count = len(reveals) - len(true_amounts)
    if len(true_amounts) > false_count:
        return True, true_amounts[(len(true_amounts) - 1) // 2]
    return False, 0


def _coherent(outcome: Outcome, decision: tuple[bool, int], tolerance: Fraction) -> bool:
    if outcome is None:
        return False
    validity, amount = outcome
    if validity != decision[0]:
        return False
    if not decision[0]:
        return True
    return abs(amount - decision[1]) <= tolerance * decision[1]


def _seat_delta(
    seat_outcome: Outcome, all_outcomes: list[Outcome], params: AdjudicationParams
) -> Fraction:
    decision = _decide(all_outcomes)
    tolerance = params.tolerance_fraction
    slash = params.slash_amount
    n_coherent = sum(1 for o in all_outcomes if _coherent(o, decision, tolerance))
    if not _coherent(seat_outcome, decision, tolerance):
        return Fraction(-slash)
    pool = slash * (len(all_outcomes) - n_coherent)
    return Fraction(pool + params.fee_pool, n_coherent)


def brute_force_round_expectation(
    params: AdjudicationParams,
    profiles: list[StrategyProfile],
    panel_size: int,
    validity_prior: float,
    fair_amount: int,
    amount_grid: list[int],
) -> dict[StrategyKind, Fraction]:
    """Expected net stake delta per round served, per strategy, exactly."""
    if panel_size < 1:
        raise ValueError("panel_size must be positive")
    total_count = sum(p.count for p in profiles)
    prior = Fraction(str(validity_prior))

    expectations: dict[StrategyKind, Fraction] = {}
    for target in profiles:
        expectation = Fraction(0)
        for truth_valid, truth_prob in ((True, prior), (False, 1 - prior)):
            if not truth_prob:
                continue
            # mixture outcome distribution of one anonymous other seat
            mixture: dict[Outcome, Fraction] = {}
            for profile in profiles:
                weight = Fraction(profile.count, total_count)
                for outcome, prob in _outcome_distribution(
                    profile, truth_valid, fair_amount, amount_grid
                ).items():
                    mixture[outcome] = mixture.get(outcome, Fraction(0)) + weight * prob
            mixture_items = sorted(mixture.items(), key=lambda kv: repr(kv[0]))

            seat_dist = _outcome_distribution(target, truth_valid, fair_amount, amount_grid)
            others = panel_size - 1
            for combo in combinations_with_replacement(range(len(mixture_items)), others):
                multiplicity: dict[int, int] = {}
                for index in combo:
                    multiplicity[index] = multiplicity.get(index, 0) + 1
                coefficient = factorial(others)
                prob_combo = Fraction(1)
                for index, count in multiplicity.items():
                    coefficient //= factorial(count)
                    prob_combo *= mixture_items[index][1] ** count
                prob_combo *= coefficient
                if not prob_combo:
                    continue
                other_outcomes = [mixture_items[index][0] for index in combo]
                for seat_outcome, seat_prob in seat_dist.items():
                    weight = truth_prob * seat_prob * prob_combo
                    if not weight:
                        continue
                    delta = _seat_delta(seat_outcome, [seat_outcome, *other_outcomes], params)
                    expectation += weight * delta
        expectations[target.kind] = expectation
    return expectations
