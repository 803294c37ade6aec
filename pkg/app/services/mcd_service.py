"""
Mel-cepstral distortion with DTW alignment
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Tuple

import librosa
import numpy as np
from scipy.fft import dct

from app.config import get_settings
from app.schemas.audio import MccSequence, Waveform
from app.schemas.evaluation import McdRecord, McdSummary
from app.services import audio_service

settings = get_settings()
logger = logging.getLogger(__name__)

MCD_SCALE = 10.0 / np.log(10.0) * np.sqrt(2.0)


def extract_mcc(wave: Waveform) -> MccSequence:
    """
    Мел-кепстр: DCT-II (ortho) лог-мел энергий, коэффициенты 1..N_MCC

    Нулевой (энергетический) коэффициент отброшен, поэтому результат
    не зависит от общего усиления сигнала.
    """
    if wave.sample_rate != settings.SAMPLE_RATE:
        wave = audio_service.resample(wave, settings.SAMPLE_RATE)
    power = audio_service.power_spectrogram(wave.samples.astype(np.float64))
    energy = audio_service.mel_basis(settings.MCC_MELS).astype(np.float64) @ power
    log_mel = np.log(np.maximum(energy, settings.LOG_FLOOR)).T  # (F, MCC_MELS)
    cepstra = dct(log_mel, type=2, norm="ortho", axis=-1)
    return MccSequence(frames=cepstra[:, 1:settings.N_MCC + 1])


def frame_mcd(conv: np.ndarray, targ: np.ndarray) -> np.ndarray:
    """Per-frame MCD in dB for aligned (N, D) arrays."""
    return MCD_SCALE * np.sqrt(np.sum((conv - targ) ** 2, axis=-1))


def dtw_path(conv: MccSequence, targ: MccSequence) -> np.ndarray:
    """Monotone, contiguous alignment minimizing summed Euclidean frame distance; (L, 2) from start."""
    if len(conv) == 0 or len(targ) == 0:
        raise ValueError("MCD needs non-empty sequences")
    _, path = librosa.sequence.dtw(X=conv.frames.T, Y=targ.frames.T, metric="euclidean")
    return path[::-1]


def aligned_mcd(conv: MccSequence, targ: MccSequence) -> Tuple[float, np.ndarray]:
    """Mean per-frame MCD over the DTW path, and the path itself."""
    path = dtw_path(conv, targ)
    return float(np.mean(frame_mcd(conv.frames[path[:, 0]], targ.frames[path[:, 1]]))), path


def mcd(conv: MccSequence, targ: MccSequence) -> float:
    return aligned_mcd(conv, targ)[0]


def mcd_files(converted: str | Path, target: str | Path) -> McdRecord:
    conv = extract_mcc(audio_service.load_waveform(converted, target_rate=settings.SAMPLE_RATE))
    targ = extract_mcc(audio_service.load_waveform(target, target_rate=settings.SAMPLE_RATE))
    value, path = aligned_mcd(conv, targ)
    return McdRecord(
        converted=str(converted),
        target=str(target),
        mcd_db=value,
        converted_frames=len(conv),
        target_frames=len(targ),
        path_length=len(path)
    )


def read_pairs(path: str | Path) -> List[Tuple[str, str]]:
    """Pairs file: one `converted target` pair per line, '#' starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Pairs file not found: {path}")
    pairs = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected two paths, got {len(parts)} fields")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise ValueError(f"Pairs file {path} has no pairs")
    return pairs


def evaluate_pairs(pairs: List[Tuple[str, str]], num_workers: int = 1) -> Tuple[List[McdRecord], McdSummary]:
    """
    MCD для списка пар (converted, target)

    Returns:
        (записи по парам в исходном порядке, сводка mean/std)
    """
    if num_workers > 1:
        with ThreadPoolExecutor(max_workers=num_workers) as pool:
            records = list(pool.map(lambda pair: mcd_files(*pair), pairs))
    else:
        records = [mcd_files(c, t) for c, t in pairs]

    values = np.array([r.mcd_db for r in records])
    summary = McdSummary(count=len(records), mean_mcd_db=float(values.mean()), std_mcd_db=float(values.std()))
    logger.info(f"MCD over {summary.count} pairs: {summary.mean_mcd_db:.3f} +- {summary.std_mcd_db:.3f} dB")
    return records, summary


def write_report(records: List[McdRecord], summary: McdSummary, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
        f.write(summary.model_dump_json() + "\n")
    return path
