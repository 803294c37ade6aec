from pathlib import Path

import numpy as np
import pytest
import torch

from app.schemas.audio import Waveform
from app.schemas.training import ModelConfig, TrainConfig
from app.services import audio_service, manifest_service, synthetic_service

SR = 16000


@pytest.fixture
def tiny_model_cfg() -> ModelConfig:
    # mel width stays at the front end's 256; everything else shrunk for CPU tests
    return ModelConfig(
        speaker_dim=16,
        content_dim=16,
        bank_kernels=3,
        bank_channels=4,
        speaker_channels=16,
        speaker_res_blocks=1,
        content_channels=16,
        content_blocks=2,
        decoder_channels=16,
        decoder_blocks=2,
        prenet_dim=16,
        ar_hidden=16,
        kernel_size=3
    )


@pytest.fixture
def tiny_train_cfg() -> TrainConfig:
    return TrainConfig(
        batch_size=2,
        segment_frames=16,
        max_steps=3,
        checkpoint_interval=2,
        learning_rate=1e-3
    )


@pytest.fixture(autouse=True)
def seed_torch():
    torch.manual_seed(0)


def write_wav(path: Path, samples: np.ndarray, sample_rate: int = SR) -> Path:
    return audio_service.save_waveform(Waveform(samples=samples, sample_rate=sample_rate), path)


def tone(freq: float, seconds: float = 1.0, sample_rate: int = SR, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    return (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """(clean_dir, noise_dir) with 2 speakers x 6 utterances and 2 noise types."""
    root = tmp_path_factory.mktemp("toy")
    return synthetic_service.write_toy_corpus(
        root, utterances_per_speaker=6, duration=0.5, noise_duration=3.0, seed=0
    )


@pytest.fixture(scope="session")
def toy_manifest(toy_corpus, tmp_path_factory):
    """Paired train manifest over the toy corpus, one noisy copy per noise type."""
    clean_dir, noise_dir = toy_corpus
    out_dir = tmp_path_factory.mktemp("noisy")
    entries = manifest_service.build_manifest(clean_dir, noise_dir, out_dir, seed=0, every_noise_type=True)
    path = manifest_service.write_manifest(entries, out_dir / "manifest.jsonl")
    return path, entries
