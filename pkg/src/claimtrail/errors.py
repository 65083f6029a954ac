"""Exception hierarchy shared across the package."""


class ClaimtrailError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(ClaimtrailError):
    """Invalid or infeasible configuration."""


class NotFoundError(ClaimtrailError):
    """A referenced entity (evidence, claim, round, block...) does not exist."""


# --- evidence ---

class MediaReadError(ClaimtrailError):
    """The media stream or file could not be read."""


class SigningError(ClaimtrailError):
    """A manifest could not be signed with the supplied key."""


class IntegrityError(ClaimtrailError):
    """Supplied media does not match the hash a manifest claims for it."""


class TamperError(ClaimtrailError):
    """Stored bytes no longer rehash to their recorded digest."""


# --- ledger ---

class AnchorConflictError(ClaimtrailError):
    """Same evidence id re-anchored with a different content hash."""


class NothingToSealError(ClaimtrailError):
    """seal requested with no pending anchors."""


class ImmutabilityError(ClaimtrailError):
    """Attempt to rewrite an already-recorded private manifest."""


class ChainCorruptionError(ClaimtrailError):
    """Persisted chain fails hash-link or merkle-root recomputation."""


# --- pipeline ---

class QueueEmptyError(ClaimtrailError):
    """process_next called on an empty queue."""


class TransientFailure(ClaimtrailError):
    """Injected or downstream failure; the event should be retried."""


# --- claims ---

class InvalidTransitionError(ClaimtrailError):
    """Claim operation not allowed in the claim's current state."""


class PolicyError(ClaimtrailError):
    """Policy missing or inactive."""


class FundingError(ClaimtrailError):
    """An account cannot cover a required transfer."""


# --- adjudication ---

class StakeError(ClaimtrailError):
    """Stake below the required minimum."""


class PanelError(ClaimtrailError):
    """Not enough eligible adjusters to form a panel."""


class PhaseError(ClaimtrailError):
    """Round operation attempted in the wrong phase."""


class CommitMismatchError(ClaimtrailError):
    """Revealed vote does not hash to the stored commitment."""
