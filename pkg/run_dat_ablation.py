"""
DAT vs. no-DAT ablation on a prepared manifest
Usage: python run_dat_ablation.py <manifest.jsonl> <out_dir> [run_config.env]
"""
import logging
import sys
from pathlib import Path

from app.config import load_run_config
from app.schemas.training import ModelConfig, TrainConfig
from app.services import experiment_service, manifest_service


def print_report(report):
    print(f"\nRaw mel probe (held-out): {report.mel_probe.test_accuracy:.3f}")
    for run in report.runs:
        print(f"\n=== {run.name} (lambda={run.grl_lambda}, dat_mode={run.dat_mode}) ===")
        print(f"  speaker probe: {run.speaker_probe.test_accuracy:.3f}")
        print(f"  content probe: {run.content_probe.test_accuracy:.3f}")
        print(f"  recon: {run.recon_first:.4f} -> {run.recon_last:.4f} ({run.recon_drop:.1%} drop)")
        print(f"  noisy/clean recon error: {run.denoising_ratio:.3f}")

    checks = experiment_service.ablation_checks(report)
    print()
    for name, passed in checks.items():
        print(f"  [{'OK' if passed else 'FAIL'}] {name}")
    return all(checks.values())


def main():
    if len(sys.argv) < 3:
        print(__doc__.strip().splitlines()[-1])
        sys.exit(2)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    manifest, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    if len(sys.argv) > 3:
        model_cfg, train_cfg = load_run_config(sys.argv[3])
    else:
        model_cfg, train_cfg = ModelConfig(), TrainConfig()

    entries = manifest_service.read_manifest(manifest)
    report = experiment_service.run_ablation(entries, model_cfg, train_cfg, out_dir, progress=True)

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation_report.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    if not print_report(report):
        sys.exit(1)


if __name__ == "__main__":
    main()
