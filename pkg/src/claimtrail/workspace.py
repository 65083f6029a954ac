"""The application core: every module wired together over one data directory.

Layout under the data dir:

    config.json         workspace configuration (params, pool funding)
    keys/               per-device Ed25519 seeds
    evidence/           content-addressed objects + manifests
    ledger/chain.bin    sealed public chain (append-only, length-prefixed)
    ledger/pending.jsonl  anchors awaiting the next seal
    private_ledger.json the private metadata ledger snapshot
    accounts.json       token account balances
    adjusters.json      adjuster registry
    rounds/             adjudication round transcripts
    claims/             claim records (+ policies.json)
    audit.jsonl         claim event audit log
    queue.jsonl         capture queue journal

The CLI, the HTTP service and the simulation all drive this one class, so
their behaviour over the same directory is identical.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from filelock import FileLock

from claimtrail.accounts import TokenAccounts
from claimtrail.clock import SystemClock
from claimtrail.errors import MediaReadError, NotFoundError
from claimtrail.evidence.hashing import hash_content
from claimtrail.evidence.keys import DeviceKeyStore
from claimtrail.evidence.manifest import CaptureMeta, Manifest
from claimtrail.evidence.store import EvidenceStore
from claimtrail.ledger.chain import AnchorChain, Block
from claimtrail.ledger.merkle import MerkleProof
from claimtrail.ledger.private import PrivateLedger
from claimtrail.ledger.verify import VerificationReport, cross_verify
from claimtrail.adjudication.models import AdjudicationParams, Adjuster
from claimtrail.adjudication.registry import AdjusterRegistry
from claimtrail.adjudication.rounds import FinalizeResult, RoundEngine
from claimtrail.claims.detector import MediaDetector
from claimtrail.claims.engine import ClaimsEngine
from claimtrail.pipeline.queue import CaptureQueue
from claimtrail.pipeline.worker import FaultInjector, PipelineWorker, ingest_media

INSURER_ACCOUNT = "insurer-pool"


@dataclass(frozen=True)
class WorkspaceConfig:
    params: AdjudicationParams = field(default_factory=AdjudicationParams)
    insurer_pool: int = 1_000_000
    max_retries: int = 3
    fault_plan: dict[str, list[int]] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_json_dict(),
            "insurer_pool": self.insurer_pool,
            "max_retries": self.max_retries,
            "fault_plan": self.fault_plan,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "WorkspaceConfig":
        return cls(
            params=AdjudicationParams.from_json_dict(data.get("params", {})),
            insurer_pool=int(data.get("insurer_pool", 1_000_000)),
            max_retries=int(data.get("max_retries", 3)),
            fault_plan=data.get("fault_plan"),
        )

    @classmethod
    def load(cls, path: Path) -> "WorkspaceConfig":
        return cls.from_json_dict(json.loads(Path(path).read_text("utf-8")))


class Workspace:
    def __init__(
        self,
        data_dir: Path,
        config: WorkspaceConfig | None = None,
        clock=None,
        key_rng: random.Random | None = None,
        detector: MediaDetector | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock if clock is not None else SystemClock()
        self.key_rng = key_rng

        config_path = self.data_dir / "config.json"
        fresh = not config_path.exists()
        if fresh:
            self.config = config if config is not None else WorkspaceConfig()
            config_path.write_text(
                json.dumps(self.config.to_json_dict(), sort_keys=True, separators=(",", ":")), "utf-8"
            )
        else:
            self.config = WorkspaceConfig.from_json_dict(json.loads(config_path.read_text("utf-8")))

        self.keystore = DeviceKeyStore(self.data_dir / "keys")
        self.evidence_store = EvidenceStore(self.data_dir / "evidence")
        self.chain = AnchorChain(self.data_dir / "ledger")
        self.private_ledger = PrivateLedger(self.data_dir / "private_ledger.json")
        self.accounts = TokenAccounts(self.data_dir / "accounts.json")
        self.registry = AdjusterRegistry(self.data_dir / "adjusters.json")
        self.rounds = RoundEngine(
            self.registry, self.accounts, INSURER_ACCOUNT, self.data_dir / "rounds"
        )
        self.claims = ClaimsEngine(
            evidence_store=self.evidence_store,
            chain=self.chain,
            private_ledger=self.private_ledger,
            accounts=self.accounts,
            round_engine=self.rounds,
            insurer_account=INSURER_ACCOUNT,
            detector=detector,
            clock=self.clock,
            state_dir=self.data_dir,
            audit_log=self.data_dir / "audit.jsonl",
        )
        self.queue = CaptureQueue(self.data_dir / "queue.jsonl")
        self.worker = PipelineWorker(
            queue=self.queue,
            keystore=self.keystore,
            evidence_store=self.evidence_store,
            chain=self.chain,
            private_ledger=self.private_ledger,
            max_retries=self.config.max_retries,
            fault_injector=FaultInjector.from_config(self.config.fault_plan),
            key_rng=self.key_rng,
        )
        if fresh and self.config.insurer_pool > 0:
            self.accounts.fund(INSURER_ACCOUNT, self.config.insurer_pool)
        else:
            self.accounts.ensure(INSURER_ACCOUNT)

    # --- locking ---

    def lock(self, timeout: float = 10.0) -> FileLock:
        """Data-directory lock guarding against concurrent mutating processes."""
        return FileLock(str(self.data_dir / ".lock"), timeout=timeout)

    # --- evidence operations ---

    def capture(
        self,
        media: bytes,
        meta: CaptureMeta,
        evidence_id: str | None = None,
    ) -> Manifest:
        """Direct capture: hash, sign, store, and dual-write in one call."""
        if evidence_id is None:
            evidence_id = f"ev-{hash_content(media).hex[:16]}"
        ingest_media(
            self.keystore,
            self.evidence_store,
            self.chain,
            self.private_ledger,
            evidence_id,
            media,
            meta,
            key_rng=self.key_rng,
        )
        return self.evidence_store.manifest(evidence_id)

    def capture_file(self, path: Path, meta: CaptureMeta, evidence_id: str | None = None) -> Manifest:
        try:
            media = Path(path).read_bytes()
        except OSError as exc:
            raise MediaReadError(f"cannot read media file {path}: {exc}") from exc
        return self.capture(media, meta, evidence_id)

    def verify(self, evidence_id: str, media: bytes) -> VerificationReport:
        return cross_verify(evidence_id, media, self.chain, self.private_ledger)

    def verify_file(self, evidence_id: str, path: Path) -> VerificationReport:
        try:
            media = Path(path).read_bytes()
        except OSError as exc:
            raise MediaReadError(f"cannot read media file {path}: {exc}") from exc
        return self.verify(evidence_id, media)

    def seal(self, sealed_at_ms: int | None = None) -> Block:
        return self.chain.seal_block(
            sealed_at_ms if sealed_at_ms is not None else self.clock.now_ms()
        )

    def prove(self, evidence_id: str) -> MerkleProof:
        return self.chain.prove_inclusion(evidence_id)

    # --- adjudication conveniences ---

    def register_adjuster(self, certificate_id: str, initial_stake: int) -> Adjuster:
        return self.registry.register(certificate_id, initial_stake, self.config.params.stake_lock)

    def finalize_round(self, round_id: str, params: AdjudicationParams | None = None) -> FinalizeResult:
        """Finalize a round and push the outcome into its claim.

        A decided round moves the claim to Approved/Denied; an escalated
        one re-points the claim at the fresh panel.
        """
        params = params if params is not None else self.config.params
        round_ = self.rounds.get(round_id)
        result = self.rounds.finalize(round_id, params)
        try:
            self.claims.claim(round_.claim_id)
        except NotFoundError:
            return result  # round not tied to a claim record (harness rounds)
        if result.status == "escalated":
            self.claims.note_escalation(round_.claim_id, result.next_round_id)
        else:
            self.claims.apply_decision(round_.claim_id, round_)
        return result

    # --- accounting ---

    def total_supply(self) -> int:
        return self.accounts.total() + self.registry.total_stake()
