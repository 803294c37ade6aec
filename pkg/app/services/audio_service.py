"""
Audio front end: WAV I/O, resampling, SNR-controlled noise mixing, mel features
"""
import logging
import warnings
from functools import lru_cache
from math import gcd
from pathlib import Path
from typing import Optional, Tuple

import librosa
import numpy as np
import soundfile as sf
from scipy.signal import resample_poly

from app.config import get_settings
from app.schemas.audio import MelSpectrogram, Waveform

settings = get_settings()
logger = logging.getLogger(__name__)

FEATURE_HEADER = np.dtype("<i4")
FEATURE_DTYPE = np.dtype("<f4")


def load_waveform(path: str | Path, target_rate: Optional[int] = None) -> Waveform:
    """
    Загружает моно WAV (16-bit PCM)

    Args:
        path: Путь к файлу
        target_rate: Если задан, сигнал ресемплируется к этой частоте

    Returns:
        Waveform: сэмплы в [-1, 1], частота из заголовка (или target_rate)
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Audio file not found: {path}")

    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise ValueError(f"Unsupported audio format: {path} ({e})") from e

    if info.subtype != "PCM_16":
        raise ValueError(f"Expected 16-bit PCM WAV, got {info.format}/{info.subtype}: {path}")
    if info.channels != 1:
        raise ValueError(f"Expected mono audio, got {info.channels} channels: {path}")

    samples, sample_rate = sf.read(str(path), dtype="float32", always_2d=False)
    wave = Waveform(samples=samples, sample_rate=int(sample_rate))

    if target_rate is not None and target_rate != wave.sample_rate:
        wave = resample(wave, target_rate)
    return wave


def save_waveform(wave: Waveform, path: str | Path) -> Path:
    """Write mono 16-bit PCM WAV, clipping to [-1, 1]."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = np.clip(wave.samples, -1.0, 1.0)
    sf.write(str(path), samples, wave.sample_rate, subtype="PCM_16", format="WAV")
    return path


def resample(wave: Waveform, target_rate: int) -> Waveform:
    """Polyphase resampling; duration preserved within one sample period."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == wave.sample_rate:
        return Waveform(samples=wave.samples.copy(), sample_rate=wave.sample_rate)

    g = gcd(target_rate, wave.sample_rate)
    up, down = target_rate // g, wave.sample_rate // g
    samples = resample_poly(wave.samples.astype(np.float64), up, down)
    return Waveform(samples=samples.astype(np.float32), sample_rate=target_rate)


def signal_power(samples: np.ndarray) -> float:
    """Mean squared sample value over the full segment (no VAD)."""
    x = np.asarray(samples, dtype=np.float64)
    return float(np.mean(x * x)) if len(x) else 0.0


def align_noise(noise: np.ndarray, length: int, rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, int]:
    """
    Подгоняет шум под длину сигнала

    Длинный шум обрезается со случайного смещения, короткий повторяется по кругу.

    Returns:
        (сегмент шума длины length, смещение начала)
    """
    noise = np.asarray(noise)
    if len(noise) == 0:
        raise ValueError("Noise clip is empty")

    offset = 0
    if len(noise) > length:
        if rng is not None:
            offset = int(rng.integers(0, len(noise) - length + 1))
        return noise[offset:offset + length], offset

    reps = -(-length // len(noise))
    return np.tile(noise, reps)[:length], offset


def noise_segment(noise: np.ndarray, length: int, offset: int) -> np.ndarray:
    """Deterministic counterpart of align_noise for a known offset."""
    noise = np.asarray(noise)
    if len(noise) > length:
        return noise[offset:offset + length]
    reps = -(-length // len(noise))
    return np.tile(noise, reps)[:length]


def scale_noise(clean: np.ndarray, segment: np.ndarray, snr_db: float) -> Tuple[np.ndarray, float]:
    """
    Масштабирует шум под целевой SNR

    g = sqrt(P_clean / (P_noise * 10^(snr_db/10)))

    Returns:
        (g * segment, g)
    """
    p_clean = signal_power(clean)
    p_noise = signal_power(segment)
    if p_noise <= 0.0:
        raise ValueError("Noise segment has zero power")
    if p_clean <= 0.0:
        raise ValueError("Clean signal has zero power")

    gain = float(np.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0))))
    return np.asarray(segment, dtype=np.float64) * gain, gain


def measured_snr(clean: np.ndarray, scaled_noise: np.ndarray) -> float:
    return float(10.0 * np.log10(signal_power(clean) / signal_power(scaled_noise)))


def mix_at_snr(
    clean: Waveform,
    noise: Waveform,
    snr_db: float,
    rng: Optional[np.random.Generator] = None,
    offset: Optional[int] = None
) -> Waveform:
    """
    Смешивает чистый сигнал с шумом при заданном SNR

    Args:
        clean: Чистая речь
        noise: Шум той же частоты дискретизации
        snr_db: Целевой SNR в дБ
        rng: Генератор для случайного смещения обрезки шума
        offset: Явное смещение (имеет приоритет над rng)

    Returns:
        Waveform: clean + g * noise_segment, обрезанный до [-1, 1]
    """
    if clean.sample_rate != noise.sample_rate:
        raise ValueError(f"Sample rates differ: {clean.sample_rate} vs {noise.sample_rate}")

    n = len(clean.samples)
    if offset is not None:
        segment = noise_segment(noise.samples, n, offset)
    else:
        segment, _ = align_noise(noise.samples, n, rng)

    scaled, _ = scale_noise(clean.samples, segment, snr_db)
    mixed = clean.samples.astype(np.float64) + scaled

    clipped = int(np.count_nonzero(np.abs(mixed) > 1.0))
    if clipped:
        logger.warning(f"Clipped {clipped} samples after mixing at {snr_db:.2f} dB")
        mixed = np.clip(mixed, -1.0, 1.0)

    return Waveform(samples=mixed.astype(np.float32), sample_rate=clean.sample_rate)


@lru_cache(maxsize=4)
def mel_basis(n_mels: int) -> np.ndarray:
    with warnings.catch_warnings():
        # 256 bands on a 1024-point FFT leave some low bands without a bin
        warnings.filterwarnings("ignore", message="Empty filters detected")
        return librosa.filters.mel(
            sr=settings.SAMPLE_RATE,
            n_fft=settings.N_FFT,
            n_mels=n_mels,
            fmin=settings.F_MIN,
            fmax=settings.F_MAX
        )


def power_spectrogram(samples: np.ndarray) -> np.ndarray:
    """|STFT|^2 with Hann window and reflect center padding, shape (bins, frames)."""
    if len(samples) < settings.HOP_LENGTH:
        raise ValueError(
            f"Waveform of {len(samples)} samples is shorter than one hop ({settings.HOP_LENGTH})"
        )
    # center padding done here so clips shorter than n_fft frame the same way
    padded = np.pad(samples, settings.N_FFT // 2, mode="reflect")
    stft = librosa.stft(
        padded,
        n_fft=settings.N_FFT,
        hop_length=settings.HOP_LENGTH,
        win_length=settings.WIN_LENGTH,
        window="hann",
        center=False
    )
    return np.abs(stft) ** 2


def num_frames(num_samples: int) -> int:
    return 1 + num_samples // settings.HOP_LENGTH


def mel_spectrogram(wave: Waveform) -> MelSpectrogram:
    """
    Лог-мел спектрограмма (F, 256)

    F = 1 + len // hop; значения log(max(energy, floor))
    """
    if wave.sample_rate != settings.SAMPLE_RATE:
        raise ValueError(f"Expected {settings.SAMPLE_RATE} Hz input, got {wave.sample_rate}")

    power = power_spectrogram(wave.samples)
    energy = mel_basis(settings.N_MELS) @ power
    values = np.log(np.maximum(energy, settings.LOG_FLOOR))
    return MelSpectrogram(values=values.T)


def save_feature(mel: MelSpectrogram, path: str | Path) -> Path:
    """Feature cache: two LE int32 (frames, mels), then row-major LE float32."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(mel.values, dtype=FEATURE_DTYPE)
    with open(path, "wb") as f:
        f.write(np.array(values.shape, dtype=FEATURE_HEADER).tobytes())
        f.write(values.tobytes(order="C"))
    return path


def load_feature(path: str | Path) -> MelSpectrogram:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Feature file not found: {path}")

    raw = path.read_bytes()
    if len(raw) < 8:
        raise ValueError(f"Truncated feature file: {path}")
    rows, cols = np.frombuffer(raw[:8], dtype=FEATURE_HEADER)
    body = np.frombuffer(raw[8:], dtype=FEATURE_DTYPE)
    if body.size != int(rows) * int(cols):
        raise ValueError(f"Feature file {path} holds {body.size} values, header says {rows}x{cols}")
    return MelSpectrogram(values=body.reshape(int(rows), int(cols)).copy())
