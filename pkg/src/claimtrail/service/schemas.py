"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

from claimtrail.adjudication.rounds import AdjudicationRound, FinalizeResult
from claimtrail.claims.models import Claim, Policy, Transfer
from claimtrail.evidence.manifest import Manifest
from claimtrail.ledger.chain import AnchorReceipt, Block
from claimtrail.ledger.verify import VerificationReport


class CaptureRequest(BaseModel):
    media_b64: str = Field(..., description="base64 of the raw media bytes")
    device_id: str
    media_kind: str = Field(..., pattern="^(video|photo|audio)$")
    captured_at_ms: Optional[int] = None
    lat: Optional[float] = None
    lon: Optional[float] = None
    witness: bool = False
    evidence_id: Optional[str] = None


class ManifestModel(BaseModel):
    evidence_id: str
    algorithm: str
    digest_b64: str
    captured_at_ms: int
    location: Optional[dict[str, float]] = None
    device_id: str
    media_kind: str
    signature_b64: str
    signer_public_key_b64: str

    @classmethod
    def from_domain(cls, manifest: Manifest) -> "ManifestModel":
        return cls(**manifest.to_json_dict())


class ReceiptModel(BaseModel):
    evidence_id: str
    content_hash: str
    manifest_hash: str
    submitted_at_ms: int
    status: str
    block_height: Optional[int] = None
    leaf_index: Optional[int] = None

    @classmethod
    def from_domain(cls, receipt: AnchorReceipt) -> "ReceiptModel":
        return cls(**receipt.to_json_dict())


class EvidenceResponse(BaseModel):
    evidence_id: str
    manifest: ManifestModel
    receipt: Optional[ReceiptModel] = None


class VerifyRequest(BaseModel):
    media_b64: str


class VerificationReportModel(BaseModel):
    evidence_id: str
    verdict: str
    details: str

    @classmethod
    def from_domain(cls, report: VerificationReport) -> "VerificationReportModel":
        return cls(**report.to_json_dict())


class BlockModel(BaseModel):
    height: int
    prev_block_hash: str
    merkle_root: str
    sealed_at_ms: int
    anchor_count: int
    block_hash: str

    @classmethod
    def from_domain(cls, block: Block) -> "BlockModel":
        return cls(**block.to_json_dict())


class ProofModel(BaseModel):
    leaf_index: int
    block_height: int
    siblings: list[dict[str, str]]


class PolicyRequest(BaseModel):
    holder_account: str
    coverage_limit: int = Field(..., ge=0)
    deductible: int = Field(..., ge=0)


class PolicyModel(BaseModel):
    policy_id: str
    holder_account: str
    coverage_limit: int
    deductible: int
    active: bool

    @classmethod
    def from_domain(cls, policy: Policy) -> "PolicyModel":
        return cls(**policy.to_json_dict())


class AdjusterRequest(BaseModel):
    certificate_id: str
    initial_stake: int = Field(..., gt=0)


class AdjusterModel(BaseModel):
    adjuster_id: str
    certificate_id: str
    free_stake: int
    locked_stake: int
    coherent_count: int
    incoherent_count: int


class ClaimRequest(BaseModel):
    policy_id: str
    evidence_ids: list[str] = Field(..., min_length=1)


class ClaimModel(BaseModel):
    claim_id: str
    policy_id: str
    evidence_ids: list[str]
    state: str
    assessed_amount: Optional[int] = None
    payout: Optional[int] = None
    active_round_id: Optional[str] = None
    history: list[dict[str, Any]]

    @classmethod
    def from_domain(cls, claim: Claim) -> "ClaimModel":
        return cls(**claim.to_json_dict())


class OpenAdjudicationRequest(BaseModel):
    panel_size: Optional[int] = None


class RoundModel(BaseModel):
    round_id: str
    claim_id: str
    round_index: int
    panel: list[str]
    phase: str
    commitments: dict[str, str]
    reveals: dict[str, dict[str, Any]]
    commit_deadline_fired: bool
    reveal_deadline_fired: bool
    decision: Optional[dict[str, Any]] = None
    deltas: Optional[list[dict[str, Any]]] = None
    forfeited: int
    escalated_to: Optional[str] = None

    @classmethod
    def from_domain(cls, round_: AdjudicationRound) -> "RoundModel":
        return cls(**round_.to_json_dict())


class CommitRequest(BaseModel):
    adjuster_id: str
    commitment_hex: str = Field(..., min_length=64, max_length=64)


class RevealRequest(BaseModel):
    adjuster_id: str
    validity: bool
    amount: int = Field(0, ge=0)
    salt_hex: str = Field(..., min_length=64, max_length=64)


class DeadlineRequest(BaseModel):
    phase: str = Field(..., pattern="^(commit|reveal)$")


class FinalizeModel(BaseModel):
    status: str
    decision: Optional[dict[str, Any]] = None
    deltas: list[dict[str, Any]]
    forfeited: int
    next_round_id: Optional[str] = None

    @classmethod
    def from_domain(cls, result: FinalizeResult) -> "FinalizeModel":
        return cls(
            status=result.status,
            decision=None if result.decision is None else result.decision.to_json_dict(),
            deltas=[d.to_json_dict() for d in result.deltas],
            forfeited=result.forfeited,
            next_round_id=result.next_round_id,
        )


class TransferModel(BaseModel):
    from_account: str
    to_account: str
    amount: int
    claim_id: str
    executed_at_ms: int
    digest: str

    @classmethod
    def from_domain(cls, transfer: Transfer) -> "TransferModel":
        return cls(**transfer.to_json_dict())


class SettlementResponse(BaseModel):
    claim: ClaimModel
    transfer: Optional[TransferModel] = None


class SimulationRequest(BaseModel):
    config: dict[str, Any]


class SimulationResponse(BaseModel):
    metrics: dict[str, Any]


class ErrorResponse(BaseModel):
    error: str
    detail: str
