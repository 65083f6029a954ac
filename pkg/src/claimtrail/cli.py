"""Operator command line.

Thin client over the application core: every command loads the workspace
at --data-dir, takes the directory lock, performs one operation, prints a
human summary (or machine JSON with --json), and exits.

Exit codes: 0 success / Verified, 1 verification failure, 2 usage error,
3 internal or domain error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from filelock import Timeout

from claimtrail.clock import parse_ms
from claimtrail.errors import ClaimtrailError
from claimtrail.evidence.hashing import ContentHash
from claimtrail.evidence.manifest import CaptureMeta, MediaKind
from claimtrail.adjudication.models import AdjudicationParams, Vote
from claimtrail.ledger.verify import Verdict
from claimtrail.pipeline.queue import CaptureEvent
from claimtrail.workspace import Workspace, WorkspaceConfig

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_ERROR = 3


def _emit(args: argparse.Namespace, human: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


def _load_workspace(args: argparse.Namespace) -> Workspace:
    config = None
    if args.config:
        config = WorkspaceConfig.load(Path(args.config))
    return Workspace(Path(args.data_dir), config=config)


def _params(ws: Workspace, args: argparse.Namespace) -> AdjudicationParams:
    params = ws.config.params
    if getattr(args, "seed", None):
        seed = bytes.fromhex(args.seed)
        params = AdjudicationParams.from_json_dict(
            {**params.to_json_dict(), "rng_seed_hex": seed.hex()}
        )
    return params


def _meta_from_args(ws: Workspace, args: argparse.Namespace) -> CaptureMeta:
    location = None
    if args.lat is not None and args.lon is not None:
        location = (args.lat, args.lon)
    captured_at = parse_ms(args.captured_at) if args.captured_at else ws.clock.now_ms()
    return CaptureMeta(
        device_id=args.device_id,
        captured_at_ms=captured_at,
        media_kind=MediaKind(args.kind),
        location=location,
        witness=args.witness,
    )


# --- command handlers ---

def cmd_capture(ws: Workspace, args: argparse.Namespace) -> int:
    manifest = ws.capture_file(Path(args.file), _meta_from_args(ws, args), args.evidence_id)
    receipt = ws.chain.find_receipt(manifest.evidence_id)
    payload = {
        "evidence_id": manifest.evidence_id,
        "manifest": manifest.to_json_dict(),
        "receipt": None if receipt is None else receipt.to_json_dict(),
    }
    _emit(args, f"captured {manifest.evidence_id} ({manifest.content_hash.hex[:16]}...)", payload)
    return EXIT_OK


def cmd_seal(ws: Workspace, args: argparse.Namespace) -> int:
    block = ws.seal()
    _emit(
        args,
        f"sealed block {block.height} with {block.anchor_count} anchors, root {block.merkle_root.hex[:16]}...",
        block.to_json_dict(),
    )
    return EXIT_OK


def cmd_verify(ws: Workspace, args: argparse.Namespace) -> int:
    report = ws.verify_file(args.evidence_id, Path(args.file))
    _emit(args, f"{report.verdict.value}: {report.details}", report.to_json_dict())
    return EXIT_OK if report.verdict is Verdict.VERIFIED else EXIT_VERIFY_FAILED


def cmd_proof(ws: Workspace, args: argparse.Namespace) -> int:
    proof = ws.prove(args.evidence_id)
    _emit(
        args,
        f"inclusion proof for {args.evidence_id}: block {proof.block_height}, "
        f"leaf {proof.leaf_index}, {len(proof.steps)} siblings",
        proof.to_json_dict(),
    )
    return EXIT_OK


def cmd_chain(ws: Workspace, args: argparse.Namespace) -> int:
    if args.height is not None:
        block = ws.chain.block_at(args.height)
        _emit(args, f"block {block.height}: {block.anchor_count} anchors", block.to_json_dict())
        return EXIT_OK
    headers = [b.to_json_dict() for b in ws.chain.headers()]
    _emit(
        args,
        f"chain height {ws.chain.height}, {ws.chain.pending_count} pending anchors",
        {"height": ws.chain.height, "pending": ws.chain.pending_count, "blocks": headers},
    )
    return EXIT_OK


def cmd_policy(ws: Workspace, args: argparse.Namespace) -> int:
    if args.policy_cmd == "create":
        policy = ws.claims.create_policy(args.holder, args.limit, args.deductible)
        _emit(args, f"created {policy.policy_id} for {policy.holder_account}", policy.to_json_dict())
    else:
        policies = [p.to_json_dict() for p in ws.claims.policies()]
        _emit(args, f"{len(policies)} policies", {"policies": policies})
    return EXIT_OK


def cmd_adjuster(ws: Workspace, args: argparse.Namespace) -> int:
    if args.adjuster_cmd == "register":
        adjuster = ws.register_adjuster(args.certificate, args.stake)
        _emit(
            args,
            f"registered {adjuster.adjuster_id} with {adjuster.free_stake} tokens",
            adjuster.to_json_dict(),
        )
    else:
        adjusters = [a.to_json_dict() for a in ws.registry.all()]
        _emit(args, f"{len(adjusters)} adjusters", {"adjusters": adjusters})
    return EXIT_OK


def cmd_claim(ws: Workspace, args: argparse.Namespace) -> int:
    if args.claim_cmd == "submit":
        claim = ws.claims.submit_claim(args.policy, args.evidence)
        _emit(args, f"submitted {claim.claim_id} ({claim.state.value})", claim.to_json_dict())
        return EXIT_OK
    if args.claim_cmd == "verify":
        claim = ws.claims.verify_evidence(args.claim_id)
        _emit(args, f"{claim.claim_id}: {claim.state.value}", claim.to_json_dict())
        return EXIT_OK if claim.state.value == "EvidenceVerified" else EXIT_VERIFY_FAILED
    if args.claim_cmd == "status":
        claim = ws.claims.claim(args.claim_id)
        _emit(args, f"{claim.claim_id}: {claim.state.value}", claim.to_json_dict())
        return EXIT_OK
    # settle
    transfer = ws.claims.settle(args.claim_id)
    claim = ws.claims.claim(args.claim_id)
    payload = {
        "claim": claim.to_json_dict(),
        "transfer": None if transfer is None else transfer.to_json_dict(),
    }
    _emit(args, f"{claim.claim_id} settled, payout {claim.payout}", payload)
    return EXIT_OK


def cmd_adjudicate(ws: Workspace, args: argparse.Namespace) -> int:
    rounds = ws.rounds
    if args.adjudicate_cmd == "open":
        params = _params(ws, args)
        if args.panel_size is not None:
            params = AdjudicationParams.from_json_dict(
                {**params.to_json_dict(), "panel_size": args.panel_size}
            )
        round_ = ws.claims.open_adjudication(args.claim_id, params)
        _emit(
            args,
            f"opened {round_.round_id} with panel {', '.join(round_.panel)}",
            round_.to_json_dict(),
        )
        return EXIT_OK
    if args.adjudicate_cmd == "commit":
        if args.commitment:
            commitment = ContentHash.from_hex(args.commitment)
        else:
            vote = Vote(args.validity == "true", args.amount, bytes.fromhex(args.salt))
            commitment = vote.commitment()
        round_ = rounds.commit(args.round_id, args.adjuster, commitment)
        _emit(
            args,
            f"{args.adjuster} committed in {round_.round_id} ({round_.phase.value})",
            round_.to_json_dict(),
        )
        return EXIT_OK
    if args.adjudicate_cmd == "reveal":
        vote = Vote(args.validity == "true", args.amount, bytes.fromhex(args.salt))
        round_ = rounds.reveal(args.round_id, args.adjuster, vote)
        _emit(
            args,
            f"{args.adjuster} revealed in {round_.round_id} "
            f"({len(round_.reveals)}/{len(round_.panel)} reveals)",
            round_.to_json_dict(),
        )
        return EXIT_OK
    if args.adjudicate_cmd == "deadline":
        if args.phase == "commit":
            round_ = rounds.fire_commit_deadline(args.round_id)
        else:
            round_ = rounds.fire_reveal_deadline(args.round_id)
        _emit(args, f"{args.phase} deadline fired on {round_.round_id}", round_.to_json_dict())
        return EXIT_OK
    if args.adjudicate_cmd == "finalize":
        result = ws.finalize_round(args.round_id, _params(ws, args))
        round_ = rounds.get(args.round_id)
        payload = {
            "status": result.status,
            "decision": None if result.decision is None else result.decision.to_json_dict(),
            "deltas": [d.to_json_dict() for d in result.deltas],
            "forfeited": result.forfeited,
            "next_round_id": result.next_round_id,
            "round": round_.to_json_dict(),
        }
        if result.status == "escalated":
            human = f"{args.round_id} escalated to {result.next_round_id}"
        else:
            human = (
                f"{args.round_id} decided: validity={result.decision.validity}, "
                f"amount={result.decision.amount}"
            )
        _emit(args, human, payload)
        return EXIT_OK
    # show
    round_ = rounds.get(args.round_id)
    _emit(args, f"{round_.round_id}: {round_.phase.value}", round_.to_json_dict())
    return EXIT_OK


def cmd_pipeline(ws: Workspace, args: argparse.Namespace) -> int:
    if args.pipeline_cmd == "enqueue":
        event = CaptureEvent(
            event_id=args.event_id,
            media_path=str(Path(args.file).resolve()),
            meta=_meta_from_args(ws, args),
            enqueued_at_ms=ws.clock.now_ms(),
        )
        ws.queue.enqueue(event)
        _emit(args, f"enqueued {event.event_id} (depth {ws.queue.depth})", event.to_json_dict())
        return EXIT_OK
    stats = ws.worker.drain()
    payload = {
        **stats.to_json_dict(),
        "dead_letter": sorted(ws.worker.dead_letter),
    }
    _emit(
        args,
        f"drained: {stats.processed_count} processed, {stats.duplicate_count} duplicates, "
        f"{stats.failed_count} dead-lettered",
        payload,
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    from claimtrail.sim.runner import SimConfig, run_simulation, write_metrics

    config = SimConfig.load(Path(args.config_file))
    workdir = Path(args.workdir) if args.workdir else Path(args.data_dir) / "sim-run"
    metrics = run_simulation(config, workdir)
    out = Path(args.out)
    write_metrics(metrics, out)
    if args.json:
        print(metrics.to_json())
    else:
        print(metrics.summary())
        print(f"metrics written to {out}")
    return EXIT_OK


def cmd_serve(ws: Workspace, args: argparse.Namespace) -> int:
    import uvicorn

    from claimtrail.service.app import create_app

    app = create_app(workspace=ws)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimtrail",
        description="Tamper-evident accident evidence and decentralized loss adjusting.",
    )
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("CLAIMTRAIL_DATA_DIR", "./claimtrail-data"),
        help="workspace directory (default: $CLAIMTRAIL_DATA_DIR or ./claimtrail-data)",
    )
    parser.add_argument("--config", help="workspace config JSON, applied when the directory is new")
    parser.add_argument("--seed", help="32-byte hex seed overriding panel selection randomness")
    parser.add_argument("--json", action="store_true", help="machine-readable JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capture", help="hash, sign, store and anchor a media file")
    p.add_argument("file")
    p.add_argument("--device-id", required=True)
    p.add_argument("--kind", choices=[k.value for k in MediaKind], default="video")
    p.add_argument("--captured-at", help="ISO-8601 capture time (default: now)")
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--witness", action="store_true", help="footage from a neighbouring vehicle")
    p.add_argument("--evidence-id", help="override the content-derived evidence id")
    p.set_defaults(func=cmd_capture)

    p = sub.add_parser("seal", help="seal pending anchors into a new block")
    p.set_defaults(func=cmd_seal)

    p = sub.add_parser("verify", help="cross-verify a media file against both ledgers")
    p.add_argument("evidence_id")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("proof", help="export the merkle inclusion proof for anchored evidence")
    p.add_argument("evidence_id")
    p.set_defaults(func=cmd_proof)

    p = sub.add_parser("chain", help="show chain headers")
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("policy", help="manage policies")
    psub = p.add_subparsers(dest="policy_cmd", required=True)
    pc = psub.add_parser("create")
    pc.add_argument("--holder", required=True)
    pc.add_argument("--limit", type=int, required=True)
    pc.add_argument("--deductible", type=int, default=0)
    psub.add_parser("list")
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("adjuster", help="manage the adjuster pool")
    asub = p.add_subparsers(dest="adjuster_cmd", required=True)
    ar = asub.add_parser("register")
    ar.add_argument("--certificate", required=True)
    ar.add_argument("--stake", type=int, required=True)
    asub.add_parser("list")
    p.set_defaults(func=cmd_adjuster)

    p = sub.add_parser("claim", help="submit, verify, inspect and settle claims")
    csub = p.add_subparsers(dest="claim_cmd", required=True)
    cs = csub.add_parser("submit")
    cs.add_argument("--policy", required=True)
    cs.add_argument("--evidence", nargs="+", required=True)
    cv = csub.add_parser("verify")
    cv.add_argument("claim_id")
    ct = csub.add_parser("status")
    ct.add_argument("claim_id")
    ce = csub.add_parser("settle")
    ce.add_argument("claim_id")
    p.set_defaults(func=cmd_claim)

    p = sub.add_parser("adjudicate", help="drive commit-reveal adjudication rounds")
    jsub = p.add_subparsers(dest="adjudicate_cmd", required=True)
    jo = jsub.add_parser("open")
    jo.add_argument("claim_id")
    jo.add_argument("--panel-size", type=int)
    jc = jsub.add_parser("commit")
    jc.add_argument("round_id")
    jc.add_argument("adjuster")
    jc.add_argument("--commitment", help="precomputed commitment hex")
    jc.add_argument("--validity", choices=["true", "false"])
    jc.add_argument("--amount", type=int, default=0)
    jc.add_argument("--salt", help="32-byte hex salt")
    jr = jsub.add_parser("reveal")
    jr.add_argument("round_id")
    jr.add_argument("adjuster")
    jr.add_argument("--validity", choices=["true", "false"], required=True)
    jr.add_argument("--amount", type=int, default=0)
    jr.add_argument("--salt", required=True)
    jd = jsub.add_parser("deadline")
    jd.add_argument("round_id")
    jd.add_argument("--phase", choices=["commit", "reveal"], required=True)
    jf = jsub.add_parser("finalize")
    jf.add_argument("round_id")
    js = jsub.add_parser("show")
    js.add_argument("round_id")
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("pipeline", help="enqueue capture events and drain the queue")
    qsub = p.add_subparsers(dest="pipeline_cmd", required=True)
    qe = qsub.add_parser("enqueue")
    qe.add_argument("file")
    qe.add_argument("--event-id", required=True)
    qe.add_argument("--device-id", required=True)
    qe.add_argument("--kind", choices=[k.value for k in MediaKind], default="video")
    qe.add_argument("--captured-at")
    qe.add_argument("--lat", type=float)
    qe.add_argument("--lon", type=float)
    qe.add_argument("--witness", action="store_true")
    qsub.add_parser("drain")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("simulate", help="run an end-to-end incentive simulation")
    p.add_argument("config_file")
    p.add_argument("--out", default="sim-metrics.json")
    p.add_argument("--workdir", help="directory for the simulation's workspace")
    p.set_defaults(func=cmd_simulate, standalone=True)

    p = sub.add_parser("serve", help="run the HTTP service over this workspace")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "standalone", False):
            return args.func(args)
        ws = _load_workspace(args)
        with ws.lock():
            return args.func(ws, args)
    except Timeout:
        print("error: data directory is locked by another claimtrail process", file=sys.stderr)
        return EXIT_ERROR
    except ClaimtrailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
