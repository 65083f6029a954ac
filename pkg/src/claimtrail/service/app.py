"""FastAPI service wrapping one workspace.

Long-running, multi-client surface over the same application core the CLI
drives: claimants push captures and claims, adjusters commit and reveal
votes, third parties pull proofs and verify media.
"""
from __future__ import annotations

import base64
import binascii
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from claimtrail import errors
from claimtrail.adjudication.models import Vote
from claimtrail.evidence.hashing import ContentHash
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.service import schemas
from claimtrail.workspace import Workspace

_STATUS_BY_ERROR: list[tuple[type[Exception], int]] = [
    (errors.NotFoundError, 404),
    (errors.MediaReadError, 400),
    (errors.IntegrityError, 400),
    (errors.TamperError, 409),
    (errors.AnchorConflictError, 409),
    (errors.NothingToSealError, 409),
    (errors.ImmutabilityError, 409),
    (errors.InvalidTransitionError, 409),
    (errors.PhaseError, 409),
    (errors.PanelError, 409),
    (errors.FundingError, 409),
    (errors.PolicyError, 409),
    (errors.StakeError, 422),
    (errors.CommitMismatchError, 422),
    (errors.ConfigError, 422),
    (errors.ClaimtrailError, 500),
]


def _decode_b64(payload: str, what: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise errors.MediaReadError(f"invalid base64 in {what}: {exc}") from exc


def create_app(data_dir: str | Path | None = None, workspace: Workspace | None = None) -> FastAPI:
    if workspace is None:
        if data_dir is None:
            raise errors.ConfigError("create_app needs a data_dir or a workspace")
        workspace = Workspace(Path(data_dir))

    app = FastAPI(title="claimtrail", version="0.1.0")
    app.state.workspace = workspace
    ws = workspace

    @app.exception_handler(errors.ClaimtrailError)
    async def claimtrail_error_handler(request: Request, exc: errors.ClaimtrailError):
        for error_type, status in _STATUS_BY_ERROR:
            if isinstance(exc, error_type):
                return JSONResponse(
                    status_code=status,
                    content={"error": type(exc).__name__, "detail": str(exc)},
                )
        raise exc  # pragma: no cover

    # --- health ---

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "chain_height": ws.chain.height,
            "pending_anchors": ws.chain.pending_count,
        }

    # --- evidence ---

    @app.post("/evidence", response_model=schemas.EvidenceResponse)
    def capture(request: schemas.CaptureRequest) -> schemas.EvidenceResponse:
        media = _decode_b64(request.media_b64, "media_b64")
        location = None
        if request.lat is not None and request.lon is not None:
            location = (request.lat, request.lon)
        meta = CaptureMeta(
            device_id=request.device_id,
            captured_at_ms=(
                request.captured_at_ms if request.captured_at_ms is not None else ws.clock.now_ms()
            ),
            media_kind=MediaKind(request.media_kind),
            location=location,
            witness=request.witness,
        )
        manifest = ws.capture(media, meta, evidence_id=request.evidence_id)
        receipt = ws.chain.find_receipt(manifest.evidence_id)
        return schemas.EvidenceResponse(
            evidence_id=manifest.evidence_id,
            manifest=schemas.ManifestModel.from_domain(manifest),
            receipt=None if receipt is None else schemas.ReceiptModel.from_domain(receipt),
        )

    @app.get("/evidence/{evidence_id}", response_model=schemas.EvidenceResponse)
    def get_evidence(evidence_id: str) -> schemas.EvidenceResponse:
        manifest = ws.evidence_store.manifest(evidence_id)
        receipt = ws.chain.find_receipt(evidence_id)
        return schemas.EvidenceResponse(
            evidence_id=evidence_id,
            manifest=schemas.ManifestModel.from_domain(manifest),
            receipt=None if receipt is None else schemas.ReceiptModel.from_domain(receipt),
        )

    @app.post("/evidence/{evidence_id}/verify", response_model=schemas.VerificationReportModel)
    def verify_evidence(evidence_id: str, request: schemas.VerifyRequest):
        media = _decode_b64(request.media_b64, "media_b64")
        return schemas.VerificationReportModel.from_domain(ws.verify(evidence_id, media))

    @app.get("/evidence/{evidence_id}/proof", response_model=schemas.ProofModel)
    def proof(evidence_id: str) -> schemas.ProofModel:
        return schemas.ProofModel(**ws.prove(evidence_id).to_json_dict())

    # --- chain ---

    @app.post("/chain/seal", response_model=schemas.BlockModel)
    def seal() -> schemas.BlockModel:
        return schemas.BlockModel.from_domain(ws.seal())

    @app.get("/chain/blocks", response_model=list[schemas.BlockModel])
    def blocks() -> list[schemas.BlockModel]:
        return [schemas.BlockModel.from_domain(b) for b in ws.chain.headers()]

    @app.get("/chain/blocks/{height}", response_model=schemas.BlockModel)
    def block(height: int) -> schemas.BlockModel:
        return schemas.BlockModel.from_domain(ws.chain.block_at(height))

    # --- policies and adjusters ---

    @app.post("/policies", response_model=schemas.PolicyModel)
    def create_policy(request: schemas.PolicyRequest) -> schemas.PolicyModel:
        policy = ws.claims.create_policy(
            request.holder_account, request.coverage_limit, request.deductible
        )
        return schemas.PolicyModel.from_domain(policy)

    @app.get("/policies", response_model=list[schemas.PolicyModel])
    def list_policies() -> list[schemas.PolicyModel]:
        return [schemas.PolicyModel.from_domain(p) for p in ws.claims.policies()]

    @app.post("/adjusters", response_model=schemas.AdjusterModel)
    def register_adjuster(request: schemas.AdjusterRequest) -> schemas.AdjusterModel:
        adjuster = ws.register_adjuster(request.certificate_id, request.initial_stake)
        return schemas.AdjusterModel(**adjuster.to_json_dict())

    @app.get("/adjusters", response_model=list[schemas.AdjusterModel])
    def list_adjusters() -> list[schemas.AdjusterModel]:
        return [schemas.AdjusterModel(**a.to_json_dict()) for a in ws.registry.all()]

    # --- claims ---

    @app.post("/claims", response_model=schemas.ClaimModel)
    def submit_claim(request: schemas.ClaimRequest) -> schemas.ClaimModel:
        claim = ws.claims.submit_claim(request.policy_id, request.evidence_ids)
        return schemas.ClaimModel.from_domain(claim)

    @app.get("/claims/{claim_id}", response_model=schemas.ClaimModel)
    def get_claim(claim_id: str) -> schemas.ClaimModel:
        return schemas.ClaimModel.from_domain(ws.claims.claim(claim_id))

    @app.post("/claims/{claim_id}/verify-evidence", response_model=schemas.ClaimModel)
    def verify_claim_evidence(claim_id: str) -> schemas.ClaimModel:
        return schemas.ClaimModel.from_domain(ws.claims.verify_evidence(claim_id))

    @app.post("/claims/{claim_id}/adjudication", response_model=schemas.RoundModel)
    def open_adjudication(claim_id: str, request: schemas.OpenAdjudicationRequest) -> schemas.RoundModel:
        params = ws.config.params
        if request.panel_size is not None:
            params = type(params).from_json_dict(
                {**params.to_json_dict(), "panel_size": request.panel_size}
            )
        round_ = ws.claims.open_adjudication(claim_id, params)
        return schemas.RoundModel.from_domain(round_)

    @app.post("/claims/{claim_id}/settle", response_model=schemas.SettlementResponse)
    def settle(claim_id: str) -> schemas.SettlementResponse:
        transfer = ws.claims.settle(claim_id)
        return schemas.SettlementResponse(
            claim=schemas.ClaimModel.from_domain(ws.claims.claim(claim_id)),
            transfer=None if transfer is None else schemas.TransferModel.from_domain(transfer),
        )

    # --- adjudication rounds ---

    @app.get("/rounds/{round_id}", response_model=schemas.RoundModel)
    def get_round(round_id: str) -> schemas.RoundModel:
        return schemas.RoundModel.from_domain(ws.rounds.get(round_id))

    @app.post("/rounds/{round_id}/commitments", response_model=schemas.RoundModel)
    def commit(round_id: str, request: schemas.CommitRequest) -> schemas.RoundModel:
        round_ = ws.rounds.commit(
            round_id, request.adjuster_id, ContentHash.from_hex(request.commitment_hex)
        )
        return schemas.RoundModel.from_domain(round_)

    @app.post("/rounds/{round_id}/reveals", response_model=schemas.RoundModel)
    def reveal(round_id: str, request: schemas.RevealRequest) -> schemas.RoundModel:
        vote = Vote(request.validity, request.amount, bytes.fromhex(request.salt_hex))
        return schemas.RoundModel.from_domain(ws.rounds.reveal(round_id, request.adjuster_id, vote))

    @app.post("/rounds/{round_id}/deadline", response_model=schemas.RoundModel)
    def deadline(round_id: str, request: schemas.DeadlineRequest) -> schemas.RoundModel:
        if request.phase == "commit":
            round_ = ws.rounds.fire_commit_deadline(round_id)
        else:
            round_ = ws.rounds.fire_reveal_deadline(round_id)
        return schemas.RoundModel.from_domain(round_)

    @app.post("/rounds/{round_id}/finalize", response_model=schemas.FinalizeModel)
    def finalize(round_id: str) -> schemas.FinalizeModel:
        return schemas.FinalizeModel.from_domain(ws.finalize_round(round_id))

    # --- simulation ---

    @app.post("/simulations", response_model=schemas.SimulationResponse)
    def simulate(request: schemas.SimulationRequest) -> schemas.SimulationResponse:
        from claimtrail.sim.runner import SimConfig, run_simulation

        config = SimConfig.from_json_dict(request.config)
        sim_index = len(list((ws.data_dir / "simulations").glob("*"))) if (
            ws.data_dir / "simulations"
        ).exists() else 0
        out_dir = ws.data_dir / "simulations" / f"sim-{sim_index:04d}"
        metrics = run_simulation(config, out_dir)
        return schemas.SimulationResponse(metrics=metrics.to_json_dict())

    return app
