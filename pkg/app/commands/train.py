import argparse
import logging
import sys

from app.commands import emit_summary, require_file
from app.config import load_run_config
from app.errors import UsageError
from app.schemas.training import ModelConfig, TrainConfig
from app.services import checkpoint_service, manifest_service, training_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train the model on a manifest")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--config", default=None, help="key=value run config (defaults when omitted)")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--resume", default=None, help="Checkpoint to continue from, or 'latest' in --out-dir")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    entries = manifest_service.read_manifest(require_file(args.manifest, "--manifest"))
    if args.config is not None:
        try:
            model_cfg, train_cfg = load_run_config(require_file(args.config, "--config"))
        except ValueError as e:
            raise UsageError(f"--config: {e}") from e
    else:
        model_cfg, train_cfg = ModelConfig(), TrainConfig()
    resume = args.resume
    if resume == "latest":
        resume = checkpoint_service.latest_checkpoint(args.out_dir)
        if resume is None:
            raise UsageError(f"--resume latest: no checkpoints in {args.out_dir}")
    elif resume is not None:
        require_file(resume, "--resume")

    checkpoints = training_service.train(
        entries,
        model_cfg,
        train_cfg,
        args.out_dir,
        resume=resume,
        progress=sys.stderr.isatty()
    )
    records = training_service.read_loss_log(checkpoints[-1].parent / training_service.LOSS_LOG)
    last = records[-1] if records else None

    emit_summary(
        command="train",
        out_dir=args.out_dir,
        steps=train_cfg.max_steps,
        checkpoint=str(checkpoints[-1]),
        checkpoints=len(checkpoints),
        final_total=last.total if last else None,
        final_recon=last.recon if last else None
    )
