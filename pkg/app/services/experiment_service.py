"""
DAT vs. no-DAT ablation on one manifest: representation probes and denoising behaviour
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch

from app.models.vc_model import NoiseRobustVC
from app.schemas.evaluation import AblationReport, AblationRun
from app.schemas.manifest import ManifestEntry
from app.schemas.training import ModelConfig, TrainConfig
from app.services import checkpoint_service, probe_service, training_service
from app.services.dataset_service import FeatureStore

logger = logging.getLogger(__name__)


@torch.no_grad()
def reconstruction_errors(
    model: NoiseRobustVC,
    store: FeatureStore,
    entries: List[ManifestEntry]
) -> Tuple[float, float]:
    """
    Средняя L1 ошибка восстановления чистой цели (epsilon = 0, teacher forcing)

    Returns:
        (ошибка на зашумлённых входах, ошибка на чистых входах)
    """
    model.eval()
    noisy, clean = [], []
    for entry in entries:
        x = torch.from_numpy(store.mel(entry.utterance_id)).float().unsqueeze(0)
        y = torch.from_numpy(store.target(entry)).float().unsqueeze(0)
        out = model(x, teacher=y, speaker_lambda=0.0, content_lambda=0.0)
        error = float((out.reconstruction - y).abs().mean())
        (noisy if entry.is_noisy else clean).append(error)
    if not noisy or not clean:
        raise ValueError("Reconstruction ratio needs both clean and noisy entries")
    return float(np.mean(noisy)), float(np.mean(clean))


def run_variant(
    name: str,
    entries: List[ManifestEntry],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: Path,
    store: FeatureStore,
    progress: bool = False
) -> AblationRun:
    checkpoints = training_service.train(entries, model_cfg, train_cfg, out_dir, store=store, progress=progress)
    model = checkpoint_service.restore_model(checkpoint_service.load_checkpoint(checkpoints[-1]))

    speaker_probe = probe_service.domain_probe(None, entries, "speaker", store=store, model=model)
    content_probe = probe_service.domain_probe(None, entries, "content", store=store, model=model)

    records = training_service.read_loss_log(out_dir / training_service.LOSS_LOG)
    window = max(1, min(10, len(records) // 2))
    recon_first = float(np.mean([r.recon for r in records[:window]]))
    recon_last = float(np.mean([r.recon for r in records[-window:]]))
    noisy_error, clean_error = reconstruction_errors(model, store, entries)

    run = AblationRun(
        name=name,
        grl_lambda=model_cfg.grl_lambda,
        dat_mode=train_cfg.dat_mode,
        speaker_probe=speaker_probe,
        content_probe=content_probe,
        recon_first=recon_first,
        recon_last=recon_last,
        recon_drop=training_service.recon_drop(records),
        noisy_recon_error=noisy_error,
        clean_recon_error=clean_error,
        denoising_ratio=noisy_error / clean_error if clean_error > 0 else float("inf")
    )
    logger.info(
        f"[{name}] probe speaker={speaker_probe.test_accuracy:.3f} content={content_probe.test_accuracy:.3f} "
        f"recon drop={run.recon_drop:.2%} denoising ratio={run.denoising_ratio:.3f}"
    )
    return run


def run_ablation(
    entries: List[ManifestEntry],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: str | Path,
    variants: Optional[List[Tuple[str, float, str]]] = None,
    progress: bool = False
) -> AblationReport:
    """
    Обучает варианты на одном манифесте и сравнивает их

    Args:
        variants: (имя, λ, dat_mode); по умолчанию DAT (λ из model_cfg) и абляция λ = 0

    Returns:
        AblationReport: проба сырых мел-признаков и отчёт по каждому варианту
    """
    out_dir = Path(out_dir)
    store = FeatureStore(entries)
    mel_probe = probe_service.domain_probe(None, entries, "mel", store=store)

    variants = variants or [
        ("dat", model_cfg.grl_lambda, "both"),
        ("no_dat", 0.0, "none"),
    ]
    runs = []
    for name, lam, dat_mode in variants:
        runs.append(run_variant(
            name,
            entries,
            model_cfg.model_copy(update={"grl_lambda": lam}),
            train_cfg.model_copy(update={"dat_mode": dat_mode}),
            out_dir / name,
            store,
            progress
        ))
    return AblationReport(mel_probe=mel_probe, runs=runs)


def reconstruction_ratio(model: NoiseRobustVC, store: FeatureStore, entries: List[ManifestEntry]) -> float:
    """Noisy-input over clean-input recon error; near 1.0 means the decoder denoises."""
    noisy_error, clean_error = reconstruction_errors(model, store, entries)
    return noisy_error / clean_error if clean_error > 0 else float("inf")


def ablation_checks(
    report: AblationReport,
    min_gap: float = 0.15,
    max_dat_accuracy: float = 0.70,
    min_mel_accuracy: float = 0.90,
    min_recon_drop: float = 0.5,
    max_denoising_ratio: float = 1.5
) -> Dict[str, bool]:
    """
    Проверки абляции DAT по отчёту

    Отчёт должен содержать варианты "dat" и "no_dat".

    Returns:
        Dict[str, bool]: имя проверки -> выполнена ли
    """
    runs = {run.name: run for run in report.runs}
    if "dat" not in runs or "no_dat" not in runs:
        raise ValueError(f"Ablation checks need 'dat' and 'no_dat' runs, got {sorted(runs)}")
    dat, no_dat = runs["dat"], runs["no_dat"]

    checks = {"mel_probe_detects_domain": report.mel_probe.test_accuracy >= min_mel_accuracy}
    for kind in ("speaker", "content"):
        dat_acc = getattr(dat, f"{kind}_probe").test_accuracy
        no_dat_acc = getattr(no_dat, f"{kind}_probe").test_accuracy
        checks[f"{kind}_probe_gap"] = no_dat_acc - dat_acc >= min_gap
        checks[f"{kind}_probe_dat_near_chance"] = dat_acc <= max_dat_accuracy
    checks["recon_drop"] = dat.recon_drop >= min_recon_drop and no_dat.recon_drop >= min_recon_drop
    checks["denoising_ratio"] = dat.denoising_ratio <= max_denoising_ratio
    checks["denoising_beats_ablation"] = dat.denoising_ratio < no_dat.denoising_ratio
    return checks
