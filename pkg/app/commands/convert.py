import argparse
import logging
from typing import get_args

from pydantic import ValidationError

from app.commands import emit_summary
from app.errors import UsageError
from app.schemas.evaluation import ConversionRequest, Scenario
from app.services import conversion_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("convert", help="Convert source content to the target speaker's voice")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--source", required=True)
    parser.add_argument("--target", required=True)
    parser.add_argument("--out-wav", required=True)
    parser.add_argument("--scenario", choices=list(get_args(Scenario)), default="SC-TC")
    parser.add_argument("--out-mel", default=None, help="Also write the converted mel as a feature file")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    try:
        req = ConversionRequest(
            source_audio=args.source,
            target_audio=args.target,
            scenario=args.scenario,
            checkpoint=args.checkpoint
        )
    except ValidationError as e:
        raise UsageError(e.errors()[0]["msg"]) from e

    sidecar = conversion_service.convert_to_files(req, args.out_wav, args.out_mel)
    emit_summary(command="convert", out_wav=args.out_wav, **sidecar)
