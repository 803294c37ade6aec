"""
Synthetic toy corpus: harmonic "speakers" and stationary noise types
"""
import logging
from pathlib import Path
from typing import Dict

import numpy as np
from scipy.signal import lfilter

from app.config import get_settings
from app.schemas.audio import Waveform
from app.services import audio_service

settings = get_settings()
logger = logging.getLogger(__name__)

# fundamental frequency (Hz) and spectral tilt per harmonic
SPEAKERS: Dict[str, tuple[float, float]] = {
    "spk1": (110.0, 0.18),
    "spk2": (210.0, 0.08),
}
VOWEL_FORMANTS = [(730, 1090), (270, 2290), (530, 1840), (300, 870), (660, 1720)]


def synth_utterance(f0: float, tilt: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Syllable sequence: harmonic source shaped by two formant bumps, raised-cosine envelopes."""
    sr = settings.SAMPLE_RATE
    n = int(duration * sr)
    t = np.arange(n) / sr
    signal = np.zeros(n)

    num_syllables = int(rng.integers(2, 5))
    bounds = np.linspace(0, n, num_syllables + 1).astype(int)
    for start, end in zip(bounds[:-1], bounds[1:]):
        f1, f2 = VOWEL_FORMANTS[int(rng.integers(len(VOWEL_FORMANTS)))]
        pitch = f0 * rng.uniform(0.9, 1.1)
        seg_t = t[start:end]
        seg = np.zeros(end - start)
        for k in range(1, int(settings.F_MAX / pitch)):
            freq = k * pitch
            formant = np.exp(-((freq - f1) / 150.0) ** 2) + 0.6 * np.exp(-((freq - f2) / 200.0) ** 2)
            seg += np.exp(-tilt * k) * (0.15 + formant) * np.sin(2 * np.pi * freq * seg_t + rng.uniform(0, 2 * np.pi))
        seg *= np.hanning(end - start)
        signal[start:end] = seg

    return 0.5 * signal / (np.max(np.abs(signal)) + 1e-9)


def synth_noise(noise_type: str, duration: float, rng: np.random.Generator) -> np.ndarray:
    n = int(duration * settings.SAMPLE_RATE)
    white = rng.standard_normal(n)
    if noise_type == "white":
        noise = white
    elif noise_type == "rumble":
        # one-pole low-pass: energy concentrated below a few hundred Hz
        noise = lfilter([1.0], [1.0, -0.97], white)
    else:
        raise ValueError(f"Unknown synthetic noise type '{noise_type}'")
    return 0.3 * noise / (np.max(np.abs(noise)) + 1e-9)


def write_toy_corpus(
    out_dir: str | Path,
    utterances_per_speaker: int = 20,
    duration: float = 0.8,
    noise_duration: float = 8.0,
    seed: int = 0
) -> tuple[Path, Path]:
    """
    Пишет игрушечный корпус

    Returns:
        (каталог чистых WAV <speaker>/<utt>.wav, каталог шумов <type>.wav)
    """
    out_dir = Path(out_dir)
    clean_dir, noise_dir = out_dir / "clean", out_dir / "noise"
    rng = np.random.default_rng(seed)

    for speaker, (f0, tilt) in SPEAKERS.items():
        for i in range(utterances_per_speaker):
            samples = synth_utterance(f0, tilt, duration, rng)
            audio_service.save_waveform(
                Waveform(samples=samples, sample_rate=settings.SAMPLE_RATE),
                clean_dir / speaker / f"utt{i:03d}.wav"
            )

    for noise_type in ("white", "rumble"):
        samples = synth_noise(noise_type, noise_duration, rng)
        audio_service.save_waveform(
            Waveform(samples=samples, sample_rate=settings.SAMPLE_RATE),
            noise_dir / f"{noise_type}.wav"
        )

    logger.info(f"Toy corpus written to {out_dir}: {len(SPEAKERS)} speakers x {utterances_per_speaker} utterances")
    return clean_dir, noise_dir
