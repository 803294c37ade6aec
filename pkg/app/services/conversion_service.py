"""
Run-time conversion: content from the source, speaker from the target
"""
import json
import logging
from pathlib import Path
from typing import Optional

import torch

from app.config import get_settings
from app.models.vc_model import NoiseRobustVC
from app.schemas.audio import MelSpectrogram
from app.schemas.evaluation import ConversionRequest
from app.services import audio_service, checkpoint_service, vocoder_service

settings = get_settings()
logger = logging.getLogger(__name__)


def load_model(checkpoint: str | Path) -> NoiseRobustVC:
    ckpt = checkpoint_service.load_checkpoint(checkpoint)
    model = checkpoint_service.restore_model(ckpt)
    if model.cfg.num_mels != settings.N_MELS:
        raise ValueError(f"Checkpoint expects {model.cfg.num_mels} mel channels, front end produces {settings.N_MELS}")
    return model


def to_batch(mel: MelSpectrogram) -> torch.Tensor:
    return torch.from_numpy(mel.values).float().unsqueeze(0)


def convert_mels(model: NoiseRobustVC, source: MelSpectrogram, target: MelSpectrogram) -> MelSpectrogram:
    """Deterministic path (epsilon = 0); output has the source's frame count."""
    if source.num_frames < 2:
        raise ValueError("Source utterance needs at least 2 frames")
    model.eval()
    converted = model.convert(to_batch(source), to_batch(target))[0].cpu().numpy()
    return MelSpectrogram(values=converted)


def convert(req: ConversionRequest, model: Optional[NoiseRobustVC] = None) -> MelSpectrogram:
    """
    Конвертация голоса по запросу

    Сценарий (SC-TC, SC-TN, SN-TC, SN-TN): только метаданные, конвейер одинаковый.
    """
    model = model or load_model(req.checkpoint)
    source = audio_service.mel_spectrogram(
        audio_service.load_waveform(req.source_audio, target_rate=settings.SAMPLE_RATE)
    )
    target = audio_service.mel_spectrogram(
        audio_service.load_waveform(req.target_audio, target_rate=settings.SAMPLE_RATE)
    )
    converted = convert_mels(model, source, target)
    logger.info(f"Converted {req.source_audio} -> {req.target_audio} [{req.scenario}]: {converted.num_frames} frames")
    return converted


def convert_to_files(
    req: ConversionRequest,
    out_wav: str | Path,
    out_mel: Optional[str | Path] = None
) -> dict:
    """Convert, invert to WAV, write the scenario sidecar; returns the sidecar content."""
    out_wav = Path(out_wav)
    converted = convert(req)
    wave = vocoder_service.invert_to_waveform(converted)
    audio_service.save_waveform(wave, out_wav)
    if out_mel is not None:
        audio_service.save_feature(converted, out_mel)

    sidecar = {
        "scenario": req.scenario,
        "source_audio": req.source_audio,
        "target_audio": req.target_audio,
        "checkpoint": req.checkpoint,
        "frames": converted.num_frames,
        "samples": int(len(wave.samples)),
        "sample_rate": wave.sample_rate
    }
    out_wav.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar

