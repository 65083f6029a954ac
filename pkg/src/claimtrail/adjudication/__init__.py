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
from claimtrail.adjudication.rounds import (
    AdjudicationRound,
    FinalizeResult,
    RoundEngine,
    coherent,
    redistribute,
    tally,
)
from claimtrail.adjudication.selection import draw_panel, panel_seed

__all__ = [
    "AdjudicationParams",
    "AdjudicationRound",
    "Adjuster",
    "AdjusterRegistry",
    "Decision",
    "DeltaReason",
    "FinalizeResult",
    "RoundEngine",
    "RoundPhase",
    "StakeDelta",
    "Vote",
    "coherent",
    "draw_panel",
    "panel_seed",
    "redistribute",
    "tally",
]
