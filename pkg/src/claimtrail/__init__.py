"""claimtrail: tamper-evident accident evidence and decentralized loss adjusting.

Capture media is hashed, signed, and dual-written to a public anchor chain
and a private metadata ledger; claims verified against both are decided by
staked commit-reveal juror panels whose token incentives reward coherence
with the outcome.
"""

__version__ = "0.1.0"

from claimtrail.workspace import Workspace, WorkspaceConfig

__all__ = ["Workspace", "WorkspaceConfig", "__version__"]
