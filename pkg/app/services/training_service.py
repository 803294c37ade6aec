"""
Joint optimization of the five networks: one Adam step per batch
"""
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import torch
from tqdm import tqdm

from app.config import dump_run_config, get_settings
from app.errors import NonFiniteLossError
from app.models.vc_model import NoiseRobustVC
from app.schemas.manifest import ManifestEntry
from app.schemas.training import LossRecord, LossWeights, ModelConfig, TrainConfig
from app.services import checkpoint_service, dataset_service, loss_service
from app.services.dataset_service import FeatureStore, TrainBatch

settings = get_settings()
logger = logging.getLogger(__name__)

LOSS_LOG = "loss_log.jsonl"
RUN_CONFIG = "run_config.json"


def configure_determinism(enabled: bool) -> None:
    if enabled:
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True)


def step_generators(seed: int, step: int) -> Tuple[np.random.Generator, torch.Generator]:
    """Per-step generators derived from (seed, step); a resumed run draws the same batches."""
    rng = np.random.default_rng([seed, step])
    generator = torch.Generator().manual_seed(int(rng.integers(0, 2**62)))
    return rng, generator


def grl_scales(model_cfg: ModelConfig, train_cfg: TrainConfig) -> Tuple[float, float]:
    """(speaker_lambda, content_lambda) for the configured DAT placement."""
    lam = model_cfg.grl_lambda
    speaker = lam if train_cfg.dat_mode in ("both", "speaker") else 0.0
    content = lam if train_cfg.dat_mode in ("both", "content") else 0.0
    return speaker, content


def effective_weights(train_cfg: TrainConfig, step: int) -> LossWeights:
    weights = train_cfg.loss_weights
    if train_cfg.kl_anneal_steps > 0:
        ramp = min(1.0, step / train_cfg.kl_anneal_steps)
        weights = weights.model_copy(update={"beta": weights.beta * ramp})
    return weights


def build_model(model_cfg: ModelConfig, seed: int) -> NoiseRobustVC:
    torch.manual_seed(seed)
    return NoiseRobustVC(model_cfg)


def build_optimizer(model: NoiseRobustVC, train_cfg: TrainConfig) -> torch.optim.Optimizer:
    # one optimizer over all five networks
    return torch.optim.Adam(
        model.parameters(),
        lr=train_cfg.learning_rate,
        betas=(train_cfg.adam_beta1, train_cfg.adam_beta2),
        eps=train_cfg.adam_eps
    )


def compute_losses(
    model: NoiseRobustVC,
    batch: TrainBatch,
    weights: LossWeights,
    epsilon: Optional[torch.Tensor],
    speaker_lambda: float,
    content_lambda: float
) -> Tuple[loss_service.LossBreakdown, float, float]:
    """Forward pass with clean-target teacher forcing; returns (breakdown, acc_zc, acc_zs)."""
    out = model(
        batch.input_mel,
        teacher=batch.target_mel,
        epsilon=epsilon,
        speaker_lambda=speaker_lambda,
        content_lambda=content_lambda
    )
    breakdown = loss_service.total_loss(
        recon=loss_service.recon_loss(out.reconstruction, batch.target_mel),
        kl=loss_service.kl_loss(out.posterior),
        dat_zc=loss_service.domain_loss(out.content_logits, batch.domain),
        dat_zs=loss_service.domain_loss(out.speaker_logits, batch.domain),
        weights=weights
    )
    acc_zc = loss_service.domain_accuracy(out.content_logits.detach(), batch.domain)
    acc_zs = loss_service.domain_accuracy(out.speaker_logits.detach(), batch.domain)
    return breakdown, acc_zc, acc_zs


def train_step(
    model: NoiseRobustVC,
    optimizer: torch.optim.Optimizer,
    batch: TrainBatch,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    step: int = 0,
    generator: Optional[torch.Generator] = None
) -> LossRecord:
    """
    Один шаг обучения: forward, backward с GRL, шаг Adam

    Returns:
        LossRecord: значения потерь до обновления параметров

    Raises:
        NonFiniteLossError: если какая-то из потерь NaN/inf (шаг не применяется)
    """
    model.train()
    speaker_lambda, content_lambda = grl_scales(model_cfg, train_cfg)
    epsilon = torch.randn(
        batch.input_mel.shape[0], batch.input_mel.shape[1], model_cfg.content_dim,
        generator=generator
    )

    breakdown, acc_zc, acc_zs = compute_losses(
        model, batch, effective_weights(train_cfg, step), epsilon, speaker_lambda, content_lambda
    )
    for term in ("recon", "kl", "dat_zc", "dat_zs", "total"):
        if not torch.isfinite(getattr(breakdown, term)):
            raise NonFiniteLossError(term, step)

    optimizer.zero_grad(set_to_none=True)
    breakdown.total.backward()
    optimizer.step()

    values = breakdown.as_floats()
    return LossRecord(step=step, acc_zc=acc_zc, acc_zs=acc_zs, **values)


def read_loss_log(path: str | Path) -> List[LossRecord]:
    path = Path(path)
    if not path.is_file():
        return []
    with open(path, encoding="utf-8") as f:
        return [LossRecord.model_validate_json(line) for line in f if line.strip()]


def _truncate_log(path: Path, step: int) -> None:
    # drop lines past the resume point so the log continues without duplicates
    records = [r for r in read_loss_log(path) if r.step < step]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")


def train(
    entries: List[ManifestEntry],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: str | Path,
    resume: Optional[str | Path] = None,
    store: Optional[FeatureStore] = None,
    progress: bool = False
) -> List[Path]:
    """
    Цикл обучения

    Пишет чекпоинты каждые checkpoint_interval шагов и в конце,
    строки loss_log.jsonl на каждый шаг и run_config.json.

    Args:
        entries: Манифест (все записи, включая чистые пары)
        model_cfg: Конфигурация сети
        train_cfg: Конфигурация обучения
        out_dir: Каталог запуска
        resume: Чекпоинт, с которого продолжить
        store: Готовое хранилище признаков (иначе создаётся)
        progress: Показывать прогресс-бар tqdm

    Returns:
        List[Path]: пути записанных чекпоинтов
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configure_determinism(settings.DETERMINISTIC)

    train_entries = dataset_service.training_entries(entries, train_cfg)
    store = store or FeatureStore(entries)
    store.preload(1 if settings.DETERMINISTIC else settings.NUM_WORKERS)

    start_step = 0
    if resume is not None:
        ckpt = checkpoint_service.load_checkpoint(resume)
        model = checkpoint_service.restore_model(ckpt, expected=model_cfg)
        optimizer = build_optimizer(model, train_cfg)
        checkpoint_service.restore_optimizer(ckpt, model, optimizer)
        start_step = ckpt.step
        logger.info(f"Resumed from {resume} at step {start_step}")
    else:
        model = build_model(model_cfg, train_cfg.seed)
        optimizer = build_optimizer(model, train_cfg)

    (out_dir / RUN_CONFIG).write_text(
        json.dumps({
            "model_config": model_cfg.model_dump(),
            "train_config": train_cfg.model_dump(),
            "loss_weights": train_cfg.loss_weights.model_dump()
        }, indent=2, sort_keys=True) + "\n",
        encoding="utf-8"
    )
    (out_dir / "run_config.env").write_text(dump_run_config(model_cfg, train_cfg), encoding="utf-8")

    log_path = out_dir / LOSS_LOG
    if resume is not None:
        _truncate_log(log_path, start_step)
    elif log_path.exists():
        log_path.unlink()

    written: List[Path] = []
    step = start_step
    with open(log_path, "a", encoding="utf-8", newline="\n") as log_file:
        steps = range(start_step, train_cfg.max_steps)
        for step in tqdm(steps, desc="train", disable=not progress):
            rng, generator = step_generators(train_cfg.seed, step)
            batch = dataset_service.make_batch(train_entries, train_cfg, rng, store)

            record = train_step(model, optimizer, batch, model_cfg, train_cfg, step, generator)
            log_file.write(record.model_dump_json() + "\n")
            log_file.flush()

            if step % settings.LOG_EVERY == 0:
                logger.info(
                    f"step {step}: total={record.total:.4f} recon={record.recon:.4f} kl={record.kl:.4f} "
                    f"dat_zc={record.dat_zc:.4f} dat_zs={record.dat_zs:.4f} "
                    f"acc_zc={record.acc_zc:.2f} acc_zs={record.acc_zs:.2f}"
                )

            done = step + 1
            if done % train_cfg.checkpoint_interval == 0 and done < train_cfg.max_steps:
                written.append(_save(out_dir, model, optimizer, train_cfg, done))
        final_step = max(start_step, train_cfg.max_steps)

    written.append(_save(out_dir, model, optimizer, train_cfg, final_step))
    return written


def _save(out_dir: Path, model, optimizer, train_cfg: TrainConfig, step: int) -> Path:
    path = checkpoint_service.save_checkpoint(
        out_dir / f"step_{step:07d}.ckpt", model, optimizer, train_cfg, step
    )
    logger.info(f"Checkpoint written: {path}")
    return path


def recon_drop(records: List[LossRecord], window: int = 10) -> float:
    """Relative drop of the recon term from the first to the last `window` steps."""
    if len(records) < 2:
        return 0.0
    window = max(1, min(window, len(records) // 2))
    first = float(np.mean([r.recon for r in records[:window]]))
    last = float(np.mean([r.recon for r in records[-window:]]))
    return 0.0 if math.isclose(first, 0.0) else (first - last) / first
