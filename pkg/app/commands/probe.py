import argparse
import logging
from pathlib import Path
from typing import get_args

from app.commands import emit_summary, require_file
from app.errors import UsageError
from app.schemas.evaluation import RepresentationKind
from app.services import manifest_service, probe_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("probe", help="Linear clean/noisy probe on frozen representations")
    parser.add_argument("--checkpoint", default=None, help="Not needed for --kind mel")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--kind", choices=list(get_args(RepresentationKind)), required=True)
    parser.add_argument("--out-report", default=None)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    entries = manifest_service.read_manifest(require_file(args.manifest, "--manifest"))
    checkpoint = None
    if args.kind != "mel":
        if args.checkpoint is None:
            raise UsageError(f"--checkpoint is required for --kind {args.kind}")
        checkpoint = require_file(args.checkpoint, "--checkpoint")

    report = probe_service.domain_probe(checkpoint, entries, args.kind)
    if args.out_report:
        out = Path(args.out_report)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    emit_summary(command="probe", **report.model_dump())
