from claimtrail.ledger.chain import (
    AnchorChain,
    AnchorReceipt,
    AnchorRecord,
    Block,
    verify_inclusion,
)
from claimtrail.ledger.merkle import MerkleProof, ProofStep, Side
from claimtrail.ledger.private import Annotation, PrivateLedger, PrivateRecord
from claimtrail.ledger.verify import VerificationReport, Verdict, cross_verify

__all__ = [
    "AnchorChain",
    "AnchorReceipt",
    "AnchorRecord",
    "Annotation",
    "Block",
    "MerkleProof",
    "PrivateLedger",
    "PrivateRecord",
    "ProofStep",
    "Side",
    "Verdict",
    "VerificationReport",
    "cross_verify",
    "verify_inclusion",
]
