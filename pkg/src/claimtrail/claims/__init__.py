from claimtrail.claims.detector import AlwaysPassDetector, DetectorVerdict, MediaDetector
from claimtrail.claims.engine import ClaimsEngine
from claimtrail.claims.models import (
    ALLOWED_TRANSITIONS,
    Claim,
    ClaimState,
    Policy,
    Transfer,
    compute_payout,
    replay_history,
)

__all__ = [
    "ALLOWED_TRANSITIONS",
    "AlwaysPassDetector",
    "Claim",
    "ClaimState",
    "ClaimsEngine",
    "DetectorVerdict",
    "MediaDetector",
    "Policy",
    "Transfer",
    "compute_payout",
    "replay_history",
]
