"""
Domain probe: how linearly separable are clean and noisy representations
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch
from sklearn.linear_model import LogisticRegression
from sklearn.model_selection import GroupShuffleSplit
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from app.config import get_settings
from app.models.vc_model import NoiseRobustVC
from app.schemas.evaluation import ProbeReport
from app.schemas.manifest import ManifestEntry
from app.services import conversion_service
from app.services.dataset_service import FeatureStore

settings = get_settings()
logger = logging.getLogger(__name__)

MIN_PER_DOMAIN = 10


@dataclass
class Representations:
    vectors: np.ndarray  # (N, D)
    domains: np.ndarray  # (N,) 0 clean / 1 noisy
    speakers: List[str]
    groups: List[str]  # clean_pair_id, keeps a clean utterance and its noisy copies together


def _frame_indices(num_frames: int, count: int) -> np.ndarray:
    if num_frames <= count:
        return np.arange(num_frames)
    return np.unique(np.linspace(0, num_frames - 1, count).round().astype(int))


@torch.no_grad()
def collect_representations(
    model: Optional[NoiseRobustVC],
    store: FeatureStore,
    entries: List[ManifestEntry],
    kind: str,
    pooled: bool = False,
    frames_per_utterance: Optional[int] = None
) -> Representations:
    """
    Извлекает представления замороженной моделью

    Args:
        model: Модель (не нужна для kind="mel")
        store: Хранилище мел-признаков
        entries: Записи манифеста
        kind: "speaker" (z_s), "content" (среднее апостериорного z_c) или "mel"
        pooled: Усреднять покадровые представления по времени
        frames_per_utterance: Сколько кадров брать с высказывания (равномерно)

    Returns:
        Representations
    """
    if kind not in ("speaker", "content", "mel"):
        raise ValueError(f"Unknown representation kind '{kind}'")
    if kind != "mel" and model is None:
        raise ValueError(f"A model is required for '{kind}' representations")
    frames_per_utterance = frames_per_utterance or settings.PROBE_FRAMES_PER_UTTERANCE

    if model is not None:
        model.eval()
    vectors, domains, speakers, groups = [], [], [], []
    for entry in sorted(entries, key=lambda e: e.utterance_id):
        mel = store.mel(entry.utterance_id)
        if kind == "speaker":
            rows = model.speaker_encoder(torch.from_numpy(mel).float().unsqueeze(0)).numpy()
        else:
            if kind == "content":
                frames = model.content_encoder(torch.from_numpy(mel).float().unsqueeze(0)).mean[0].numpy()
            else:
                frames = mel
            rows = frames.mean(axis=0, keepdims=True) if pooled else frames[_frame_indices(len(frames), frames_per_utterance)]

        vectors.append(rows)
        domains += [int(entry.domain)] * len(rows)
        speakers += [entry.speaker_id] * len(rows)
        groups += [entry.clean_pair_id] * len(rows)

    return Representations(
        vectors=np.concatenate(vectors, axis=0).astype(np.float64),
        domains=np.array(domains, dtype=np.int64),
        speakers=speakers,
        groups=groups
    )


def probe_representations(reps: Representations, kind: str, seed: Optional[int] = None) -> ProbeReport:
    """Fresh logistic-linear probe, grouped 80/20 split with a fixed seed; held-out accuracy."""
    num_clean = int(np.sum(reps.domains == 0))
    num_noisy = int(np.sum(reps.domains == 1))
    if min(num_clean, num_noisy) < MIN_PER_DOMAIN:
        raise ValueError(f"Probe needs >= {MIN_PER_DOMAIN} samples per domain, got {num_clean} clean / {num_noisy} noisy")

    splitter = GroupShuffleSplit(
        n_splits=1,
        test_size=settings.PROBE_TEST_SIZE,
        random_state=settings.PROBE_SEED if seed is None else seed
    )
    train_idx, test_idx = next(splitter.split(reps.vectors, reps.domains, groups=reps.groups))
    if len(np.unique(reps.domains[train_idx])) < 2:
        raise ValueError("Probe training split holds a single domain")

    probe = make_pipeline(StandardScaler(), LogisticRegression(max_iter=2000))
    probe.fit(reps.vectors[train_idx], reps.domains[train_idx])

    report = ProbeReport(
        kind=kind,
        train_accuracy=float(probe.score(reps.vectors[train_idx], reps.domains[train_idx])),
        test_accuracy=float(probe.score(reps.vectors[test_idx], reps.domains[test_idx])),
        num_train=len(train_idx),
        num_test=len(test_idx),
        num_clean=num_clean,
        num_noisy=num_noisy
    )
    logger.info(f"Probe [{kind}]: train {report.train_accuracy:.3f}, held-out {report.test_accuracy:.3f}")
    return report


def domain_probe(
    checkpoint: Optional[str | Path],
    entries: List[ManifestEntry],
    kind: str,
    store: Optional[FeatureStore] = None,
    model: Optional[NoiseRobustVC] = None
) -> ProbeReport:
    """
    Проба доменной инвариантности

    Точность около 0.5: представления не выдают домен. Около 1.0: утечка домена.
    """
    if model is None and kind != "mel":
        if checkpoint is None:
            raise ValueError(f"A checkpoint is required for '{kind}' probing")
        model = conversion_service.load_model(checkpoint)
    store = store or FeatureStore(entries)
    reps = collect_representations(model, store, entries, kind)
    return probe_representations(reps, kind)
