"""
Paired clean/noisy corpus manifest: simulation of noisy copies and JSON-lines I/O
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import get_settings
from app.schemas.audio import DomainLabel, Waveform
from app.schemas.manifest import ManifestEntry
from app.services import audio_service

settings = get_settings()
logger = logging.getLogger(__name__)


def _list_wavs(directory: Path) -> List[Path]:
    return sorted(p for p in directory.rglob("*.wav") if p.is_file())


def _speaker_of(path: Path, root: Path) -> str:
    # <root>/<speaker>/<utt>.wav, or <speaker>_<utt>.wav when flat
    relative = path.relative_to(root)
    if len(relative.parts) > 1:
        return relative.parts[0]
    return path.stem.split("_")[0]


def noise_portion(noise: Waveform, noise_split: float, split: str) -> Waveform:
    """Первые noise_split длины клипа идут в train, остаток в test."""
    cut = int(round(len(noise.samples) * noise_split))
    samples = noise.samples[:cut] if split == "train" else noise.samples[cut:]
    if len(samples) == 0:
        raise ValueError(f"Noise split {noise_split} leaves an empty '{split}' portion")
    return Waveform(samples=samples, sample_rate=noise.sample_rate)


def build_manifest(
    clean_dir: str | Path,
    noise_dir: str | Path,
    out_dir: str | Path,
    snr_range: Tuple[float, float] = (5.0, 20.0),
    noise_split: float = 0.75,
    seed: int = 0,
    split: str = "train",
    augmentations: int = 1,
    every_noise_type: bool = False
) -> List[ManifestEntry]:
    """
    Строит манифест пар чистых и зашумлённых высказываний

    Args:
        clean_dir: Каталог с чистыми WAV (<speaker>/<utt>.wav)
        noise_dir: Каталог с шумами, тип шума = имя файла
        out_dir: Куда писать зашумлённые WAV
        snr_range: [low, high], SNR выбирается равномерно
        noise_split: Доля каждого шумового клипа для train
        seed: Seed генератора
        split: "train" или "test", из какой части шума резать
        augmentations: Число зашумлённых копий на высказывание
        every_noise_type: По одной копии на каждый тип шума

    Returns:
        List[ManifestEntry]: чистые записи, за каждой её зашумлённые копии
    """
    clean_dir, noise_dir, out_dir = Path(clean_dir), Path(noise_dir), Path(out_dir)
    low, high = snr_range
    if low > high:
        raise ValueError(f"Invalid SNR range [{low}, {high}]")
    if not 0.0 < noise_split <= 1.0:
        raise ValueError(f"noise_split must be in (0, 1], got {noise_split}")
    if split not in ("train", "test"):
        raise ValueError(f"Unknown split '{split}'")
    if augmentations < 1 and not every_noise_type:
        raise ValueError("augmentations must be >= 1")

    clean_files = _list_wavs(clean_dir) if clean_dir.is_dir() else []
    if not clean_files:
        raise ValueError(f"No clean utterances found in {clean_dir}")
    noise_files = _list_wavs(noise_dir) if noise_dir.is_dir() else []
    if not noise_files:
        raise ValueError(f"No noise clips found in {noise_dir}")

    noises: Dict[str, Tuple[Path, Waveform]] = {}
    for path in noise_files:
        wave = audio_service.load_waveform(path, target_rate=settings.SAMPLE_RATE)
        noises[path.stem] = (path, noise_portion(wave, noise_split, split))
    noise_types = sorted(noises)

    rng = np.random.default_rng(seed)
    entries: List[ManifestEntry] = []

    for clean_path in clean_files:
        speaker = _speaker_of(clean_path, clean_dir)
        nested = clean_path.parent != clean_dir
        clean_id = f"{speaker}_{clean_path.stem}" if nested else clean_path.stem
        clean = audio_service.load_waveform(clean_path, target_rate=settings.SAMPLE_RATE)

        entries.append(ManifestEntry(
            utterance_id=clean_id,
            audio_path=str(clean_path),
            speaker_id=speaker,
            domain=DomainLabel.CLEAN,
            clean_pair_id=clean_id,
            split=split
        ))

        if every_noise_type:
            chosen = noise_types
        else:
            chosen = [noise_types[int(rng.integers(len(noise_types)))] for _ in range(augmentations)]

        for k, noise_type in enumerate(chosen):
            noise_path, noise = noises[noise_type]
            snr_db = float(rng.uniform(low, high))
            _, offset = audio_service.align_noise(noise.samples, len(clean.samples), rng)
            noisy = audio_service.mix_at_snr(clean, noise, snr_db, offset=offset)

            noisy_id = f"{clean_id}__{noise_type}_{k}"
            noisy_path = audio_service.save_waveform(noisy, out_dir / split / f"{noisy_id}.wav")
            entries.append(ManifestEntry(
                utterance_id=noisy_id,
                audio_path=str(noisy_path),
                speaker_id=speaker,
                domain=DomainLabel.NOISY,
                clean_pair_id=clean_id,
                noise_type=noise_type,
                snr_db=snr_db,
                noise_path=str(noise_path),
                noise_offset=offset,
                split=split
            ))

    n_noisy = sum(1 for e in entries if e.is_noisy)
    logger.info(f"Manifest built: {len(entries) - n_noisy} clean, {n_noisy} noisy ({split})")
    return entries


def validate_manifest(entries: List[ManifestEntry]) -> None:
    """Every clean_pair_id must resolve to a clean entry; ids must be unique."""
    by_id = {}
    for entry in entries:
        if entry.utterance_id in by_id:
            raise ValueError(f"Duplicate utterance_id {entry.utterance_id}")
        by_id[entry.utterance_id] = entry

    for entry in entries:
        pair = by_id.get(entry.clean_pair_id)
        if pair is None:
            raise ValueError(f"{entry.utterance_id}: clean pair {entry.clean_pair_id} not in manifest")
        if pair.domain != DomainLabel.CLEAN:
            raise ValueError(f"{entry.utterance_id}: clean pair {entry.clean_pair_id} is not clean")


def write_manifest(entries: List[ManifestEntry], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for entry in entries:
            f.write(entry.model_dump_json() + "\n")
    return path


def read_manifest(path: str | Path) -> List[ManifestEntry]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Manifest not found: {path}")

    entries = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                entries.append(ManifestEntry.model_validate_json(line))
            except ValueError as e:
                raise ValueError(f"{path}:{line_no}: malformed manifest entry ({e})") from e

    if not entries:
        raise ValueError(f"Manifest {path} is empty")
    validate_manifest(entries)
    return entries


def clean_pairs(entries: List[ManifestEntry]) -> Dict[str, ManifestEntry]:
    return {e.utterance_id: e for e in entries if not e.is_noisy}


def filter_entries(
    entries: List[ManifestEntry],
    split: Optional[str] = None,
    clean_only: bool = False
) -> List[ManifestEntry]:
    result = [e for e in entries if split is None or e.split == split]
    if clean_only:
        result = [e for e in result if not e.is_noisy]
    return result
