import argparse
import logging
from pathlib import Path

from app.commands import emit_summary, require_dir
from app.errors import UsageError
from app.services import manifest_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("prepare", help="Simulate noisy copies and write the paired manifest")
    parser.add_argument("--clean-dir", required=True)
    parser.add_argument("--noise-dir", required=True)
    parser.add_argument("--out-manifest", required=True)
    parser.add_argument("--snr-min", type=float, default=5.0)
    parser.add_argument("--snr-max", type=float, default=20.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise-split", type=float, default=0.75, help="Fraction of each noise clip used for train")
    parser.add_argument("--split", choices=["train", "test"], default="train")
    parser.add_argument("--augmentations", type=int, default=1, help="Noisy copies per clean utterance")
    parser.add_argument("--every-noise-type", action="store_true", help="One noisy copy per noise type")
    parser.add_argument("--audio-out-dir", default=None, help="Noisy WAV directory (default: next to the manifest)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    clean_dir = require_dir(args.clean_dir, "--clean-dir")
    noise_dir = require_dir(args.noise_dir, "--noise-dir")
    if args.snr_min > args.snr_max:
        raise UsageError(f"--snr-min {args.snr_min} exceeds --snr-max {args.snr_max}")

    out_manifest = Path(args.out_manifest)
    audio_out_dir = Path(args.audio_out_dir) if args.audio_out_dir else out_manifest.parent / "noisy"

    entries = manifest_service.build_manifest(
        clean_dir,
        noise_dir,
        audio_out_dir,
        snr_range=(args.snr_min, args.snr_max),
        noise_split=args.noise_split,
        seed=args.seed,
        split=args.split,
        augmentations=args.augmentations,
        every_noise_type=args.every_noise_type
    )
    manifest_service.write_manifest(entries, out_manifest)

    num_noisy = sum(1 for e in entries if e.is_noisy)
    emit_summary(
        command="prepare",
        manifest=str(out_manifest),
        entries=len(entries),
        clean=len(entries) - num_noisy,
        noisy=num_noisy,
        split=args.split
    )
