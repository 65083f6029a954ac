"""Cross-verification of the two ledgers against presented media.

With a public digest trail and a private metadata record for the same
evidence id, any divergence pins down who moved: media that no longer
hashes to the anchored digest, or a private manifest that no longer hashes
to the anchored manifest digest.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, BinaryIO

from claimtrail.evidence.hashing import hash_content
from claimtrail.evidence.manifest import manifest_hash
from claimtrail.ledger.chain import AnchorChain
from claimtrail.ledger.private import PrivateLedger


class Verdict(str, Enum):
    VERIFIED = "Verified"
    MEDIA_TAMPERED = "MediaTampered"
    LEDGER_MISMATCH = "LedgerMismatch"
    MISSING_ANCHOR = "MissingAnchor"
    MISSING_PRIVATE_RECORD = "MissingPrivateRecord"


@dataclass(frozen=True)
class VerificationReport:
    evidence_id: str
    verdict: Verdict
    details: str

    @property
    def verified(self) -> bool:
        return self.verdict is Verdict.VERIFIED

    def to_json_dict(self) -> dict[str, Any]:
        return {"evidence_id": self.evidence_id, "verdict": self.verdict.value, "details": self.details}


def cross_verify(
    evidence_id: str,
    media: bytes | BinaryIO,
    chain: AnchorChain,
    private_ledger: PrivateLedger,
) -> VerificationReport:
    """Check media against both ledgers; checks run in fixed order.

    1. public anchor present (pending or sealed)
    2. private record present
    3. private manifest rehashes to the anchored manifest digest
    4. media rehashes to the anchored content digest
    """
    receipt = chain.find_receipt(evidence_id)
    if receipt is None:
        return VerificationReport(
            evidence_id, Verdict.MISSING_ANCHOR, "no anchor for this evidence id on the public chain"
        )
    anchor = receipt.record

    if not private_ledger.has(evidence_id):
        return VerificationReport(
            evidence_id, Verdict.MISSING_PRIVATE_RECORD, "no private metadata record for this evidence id"
        )
    record = private_ledger.get(evidence_id)

    private_manifest_hash = manifest_hash(record.manifest)
    if private_manifest_hash != anchor.manifest_hash:
        return VerificationReport(
            evidence_id,
            Verdict.LEDGER_MISMATCH,
            f"private manifest hashes to {private_manifest_hash.hex} but the chain anchored "
            f"{anchor.manifest_hash.hex}",
        )

    media_hash = hash_content(media)
    if media_hash != anchor.content_hash:
        return VerificationReport(
            evidence_id,
            Verdict.MEDIA_TAMPERED,
            f"media hashes to {media_hash.hex} but the chain anchored {anchor.content_hash.hex}",
        )

    where = (
        f"sealed in block {receipt.block_height}" if receipt.status == "sealed" else "pending seal"
    )
    return VerificationReport(evidence_id, Verdict.VERIFIED, f"both ledgers agree; anchor {where}")
