"""
Mel feature store and training batches over the paired manifest
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import torch

from app.config import get_settings
from app.schemas.manifest import ManifestEntry
from app.schemas.training import TrainConfig
from app.services import audio_service, manifest_service

settings = get_settings()
logger = logging.getLogger(__name__)


class FeatureStore:
    """
    Lazy per-utterance log-mel cache keyed by utterance_id.
    With cache_dir set, features also persist as feature-cache files.
    """

    def __init__(self, entries: List[ManifestEntry], cache_dir: Optional[str | Path] = None):
        self.entries = {e.utterance_id: e for e in entries}
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._mels: Dict[str, np.ndarray] = {}

    def mel(self, utterance_id: str) -> np.ndarray:
        if utterance_id not in self._mels:
            self._mels[utterance_id] = self._extract(utterance_id)
        return self._mels[utterance_id]

    def _extract(self, utterance_id: str) -> np.ndarray:
        entry = self.entries.get(utterance_id)
        if entry is None:
            raise ValueError(f"Unknown utterance {utterance_id}")

        cache_path = self.cache_dir / f"{utterance_id}.feat" if self.cache_dir else None
        if cache_path is not None and cache_path.is_file():
            return audio_service.load_feature(cache_path).values

        wave = audio_service.load_waveform(entry.audio_path, target_rate=settings.SAMPLE_RATE)
        mel = audio_service.mel_spectrogram(wave)
        if cache_path is not None:
            audio_service.save_feature(mel, cache_path)
        return mel.values

    def target(self, entry: ManifestEntry) -> np.ndarray:
        """Clean-pair features: the reconstruction target for any input domain."""
        return self.mel(entry.clean_pair_id)

    def preload(self, num_workers: int = 1) -> None:
        ids = sorted(self.entries)
        if num_workers <= 1:
            for utterance_id in ids:
                self.mel(utterance_id)
            return
        with ThreadPoolExecutor(max_workers=num_workers) as pool:
            # map keeps input order, so the cache fills deterministically
            for utterance_id, values in zip(ids, pool.map(self._extract, ids)):
                self._mels[utterance_id] = values
        logger.info(f"Preloaded features for {len(ids)} utterances")


@dataclass
class TrainBatch:
    input_mel: torch.Tensor  # (B, segment_frames, num_mels), clean or noisy
    target_mel: torch.Tensor  # clean pair, same shape
    domain: torch.Tensor  # (B,) long

    def __post_init__(self):
        if self.input_mel.shape != self.target_mel.shape:
            raise ValueError(f"Input {tuple(self.input_mel.shape)} vs target {tuple(self.target_mel.shape)}")
        if self.domain.shape != (self.input_mel.shape[0],):
            raise ValueError("One domain label per batch element required")
        clean = self.domain == 0
        if clean.any() and not torch.equal(self.input_mel[clean], self.target_mel[clean]):
            raise ValueError("Clean batch elements must have input equal to target")


def fit_length(values: np.ndarray, frames: int) -> np.ndarray:
    """Repeat-pad along time up to `frames` (no-op when already long enough)."""
    if len(values) >= frames:
        return values
    reps = -(-frames // len(values))
    return np.concatenate([values] * reps, axis=0)[:frames]


def crop_pair(
    input_mel: np.ndarray,
    target_mel: np.ndarray,
    frames: int,
    rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, int]:
    """Same random window for input and target; returns (input_crop, target_crop, start)."""
    if input_mel.shape != target_mel.shape:
        raise ValueError(f"Paired features differ in shape: {input_mel.shape} vs {target_mel.shape}")
    input_mel, target_mel = fit_length(input_mel, frames), fit_length(target_mel, frames)
    start = int(rng.integers(0, len(input_mel) - frames + 1))
    return input_mel[start:start + frames], target_mel[start:start + frames], start


def make_batch(
    entries: List[ManifestEntry],
    cfg: TrainConfig,
    rng: np.random.Generator,
    store: FeatureStore
) -> TrainBatch:
    """
    Собирает батч для шага обучения

    Записи выбираются равномерно с возвращением; одинаковое окно
    вырезается из входа и из его чистой пары.

    Returns:
        TrainBatch: вход, чистая цель, метки доменов из манифеста
    """
    if not entries:
        raise ValueError("Cannot build a batch from an empty manifest")

    inputs, targets, domains = [], [], []
    for index in rng.integers(0, len(entries), size=cfg.batch_size):
        entry = entries[int(index)]
        x, y, _ = crop_pair(store.mel(entry.utterance_id), store.target(entry), cfg.segment_frames, rng)
        inputs.append(x)
        targets.append(y)
        domains.append(int(entry.domain))

    return TrainBatch(
        input_mel=torch.from_numpy(np.stack(inputs)).float(),
        target_mel=torch.from_numpy(np.stack(targets)).float(),
        domain=torch.tensor(domains, dtype=torch.long)
    )


def training_entries(entries: List[ManifestEntry], cfg: TrainConfig) -> List[ManifestEntry]:
    selected = manifest_service.filter_entries(entries, split="train", clean_only=cfg.clean_only)
    if not selected:
        raise ValueError("No training entries after filtering the manifest")
    return selected
