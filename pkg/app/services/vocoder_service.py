"""
Spectrogram inversion: pseudo-inverse mel filter bank + Griffin-Lim phase reconstruction
"""
import librosa
import numpy as np

from app.config import get_settings
from app.schemas.audio import MelSpectrogram, Waveform
from app.services.audio_service import mel_basis

settings = get_settings()


def mel_to_linear(mel: MelSpectrogram) -> np.ndarray:
    """Log-mel (F, n_mels) -> linear magnitude (bins, F)."""
    # decoder output is unbounded
    log_mel = np.clip(mel.values.astype(np.float64), np.log(settings.LOG_FLOOR), settings.LOG_CEIL)
    energy = np.exp(log_mel).T
    power = np.linalg.pinv(mel_basis(settings.N_MELS)) @ energy
    return np.sqrt(np.maximum(power, 0.0))


def invert_to_waveform(mel: MelSpectrogram, n_iter: int | None = None) -> Waveform:
    """
    Восстанавливает сигнал из лог-мел спектрограммы

    Длина выхода (F - 1) * hop, так что повторное извлечение даёт те же F кадров.
    Фаза инициализируется фиксированным seed, результат детерминирован.
    """
    magnitude = mel_to_linear(mel)
    length = max(mel.num_frames - 1, 1) * settings.HOP_LENGTH
    samples = librosa.griffinlim(
        magnitude,
        n_iter=n_iter or settings.GRIFFIN_LIM_ITERS,
        hop_length=settings.HOP_LENGTH,
        win_length=settings.WIN_LENGTH,
        n_fft=settings.N_FFT,
        window="hann",
        center=True,
        pad_mode="reflect",
        length=length,
        init="random",
        random_state=settings.GRIFFIN_LIM_SEED
    )
    return Waveform(samples=np.clip(samples, -1.0, 1.0).astype(np.float32), sample_rate=settings.SAMPLE_RATE)
