import argparse
import logging

from app.commands import emit_summary, require_file
from app.config import get_settings
from app.services import mcd_service

settings = get_settings()
logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="MCD between converted and target utterances")
    parser.add_argument("--pairs-file", required=True, help="One '<converted.wav> <target.wav>' pair per line")
    parser.add_argument("--out-report", required=True)
    parser.add_argument("--num-workers", type=int, default=settings.NUM_WORKERS)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    pairs = mcd_service.read_pairs(require_file(args.pairs_file, "--pairs-file"))
    records, summary = mcd_service.evaluate_pairs(pairs, num_workers=args.num_workers)
    mcd_service.write_report(records, summary, args.out_report)
    emit_summary(command="evaluate", out_report=args.out_report, **summary.model_dump())
