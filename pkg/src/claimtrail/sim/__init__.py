from claimtrail.sim.oracle import brute_force_round_expectation
from claimtrail.sim.harness import RoundSample, simulate_rounds
from claimtrail.sim.runner import SimConfig, SimMetrics, run_simulation
from claimtrail.sim.strategies import StrategyKind, StrategyProfile, amount_grid_for, decide_vote

__all__ = [
    "RoundSample",
    "SimConfig",
    "SimMetrics",
    "StrategyKind",
    "StrategyProfile",
    "amount_grid_for",
    "brute_force_round_expectation",
    "decide_vote",
    "run_simulation",
    "simulate_rounds",
]
