from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from app.config import get_settings

settings = get_settings()


class DomainLabel(IntEnum):
    CLEAN = 0
    NOISY = 1


@dataclass
class Waveform:
    samples: np.ndarray  # float32 mono in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise ValueError(f"Waveform must be mono, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("Waveform contains non-finite samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class MelSpectrogram:
    values: np.ndarray  # (num_frames, num_mels) log-amplitude

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise ValueError(f"Mel spectrogram must be (frames >= 1, mels), got {self.values.shape}")
        if self.values.shape[1] != settings.N_MELS:
            raise ValueError(f"Expected {settings.N_MELS} mel channels, got {self.values.shape[1]}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Mel spectrogram contains non-finite entries")

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


@dataclass
class MccSequence:
    frames: np.ndarray  # (num_frames, N_MCC), 0th coefficient excluded

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[1] != settings.N_MCC:
            raise ValueError(f"Expected (frames, {settings.N_MCC}) cepstra, got {self.frames.shape}")

    def __len__(self) -> int:
        return self.frames.shape[0]
