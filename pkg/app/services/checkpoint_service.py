"""
Checkpoint container

Byte layout (all integers little-endian):

    magic           8 bytes   b"NRVCKPT\\x00"
    version         uint32    FORMAT_VERSION
    header_length   uint32
    header          UTF-8 JSON, sorted keys: model_config, train_config, step, seed,
                    optimizer_step, format_version
    tensor_count    uint32
    tensor_count x:
        name_length uint16
        name        UTF-8
        ndim        uint8
        shape       ndim x uint32
        data        prod(shape) x float32, row-major

Model parameters are stored under their module names; Adam moments under
"optimizer.exp_avg.<name>" and "optimizer.exp_avg_sq.<name>".
"""
import json
import logging
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import torch

from app.models.vc_model import NoiseRobustVC
from app.schemas.training import ModelConfig, TrainConfig

logger = logging.getLogger(__name__)

MAGIC = b"NRVCKPT\x00"
FORMAT_VERSION = 1
EXP_AVG = "optimizer.exp_avg."
EXP_AVG_SQ = "optimizer.exp_avg_sq."


@dataclass
class Checkpoint:
    model_config: ModelConfig
    train_config: Optional[TrainConfig]
    step: int
    seed: int
    optimizer_step: int = 0
    tensors: Dict[str, np.ndarray] = field(default_factory=OrderedDict)


def collect_tensors(model: NoiseRobustVC, optimizer: Optional[torch.optim.Optimizer] = None) -> tuple[Dict[str, np.ndarray], int]:
    tensors: Dict[str, np.ndarray] = OrderedDict()
    for name, param in model.named_parameters():
        tensors[name] = param.detach().cpu().numpy().astype(np.float32)

    optimizer_step = 0
    if optimizer is not None:
        for name, param in model.named_parameters():
            state = optimizer.state.get(param)
            if not state:
                continue
            optimizer_step = int(state["step"])
            tensors[EXP_AVG + name] = state["exp_avg"].detach().cpu().numpy().astype(np.float32)
            tensors[EXP_AVG_SQ + name] = state["exp_avg_sq"].detach().cpu().numpy().astype(np.float32)
    return tensors, optimizer_step


def save_checkpoint(
    path: str | Path,
    model: NoiseRobustVC,
    optimizer: Optional[torch.optim.Optimizer] = None,
    train_cfg: Optional[TrainConfig] = None,
    step: int = 0
) -> Path:
    tensors, optimizer_step = collect_tensors(model, optimizer)
    ckpt = Checkpoint(
        model_config=model.cfg,
        train_config=train_cfg,
        step=step,
        seed=train_cfg.seed if train_cfg is not None else 0,
        optimizer_step=optimizer_step,
        tensors=tensors
    )
    return write_checkpoint(ckpt, path)


def write_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    header = json.dumps({
        "format_version": FORMAT_VERSION,
        "model_config": ckpt.model_config.model_dump(),
        "train_config": ckpt.train_config.model_dump() if ckpt.train_config is not None else None,
        "step": ckpt.step,
        "seed": ckpt.seed,
        "optimizer_step": ckpt.optimizer_step
    }, sort_keys=True, separators=(",", ":")).encode("utf-8")

    tmp_path = path.with_suffix(path.suffix + ".tmp")
    with open(tmp_path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        f.write(header)
        f.write(struct.pack("<I", len(ckpt.tensors)))
        for name, values in ckpt.tensors.items():
            encoded = name.encode("utf-8")
            values = np.ascontiguousarray(values, dtype="<f4")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", values.ndim))
            f.write(struct.pack(f"<{values.ndim}I", *values.shape))
            f.write(values.tobytes(order="C"))
    tmp_path.replace(path)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Читает чекпоинт

    Raises:
        FileNotFoundError: файла нет
        ValueError: чужой формат, другая версия или обрезанный файл
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    raw = path.read_bytes()

    if raw[:8] != MAGIC:
        raise ValueError(f"Not a checkpoint file: {path}")
    try:
        version, header_length = struct.unpack_from("<II", raw, 8)
        if version != FORMAT_VERSION:
            raise ValueError(f"Unsupported checkpoint version {version} in {path}")
        offset = 16
        header = json.loads(raw[offset:offset + header_length].decode("utf-8"))
        offset += header_length

        (count,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        tensors: Dict[str, np.ndarray] = OrderedDict()
        for _ in range(count):
            (name_length,) = struct.unpack_from("<H", raw, offset)
            offset += 2
            name = raw[offset:offset + name_length].decode("utf-8")
            offset += name_length
            (ndim,) = struct.unpack_from("<B", raw, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, offset)
            offset += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            values = np.frombuffer(raw, dtype="<f4", count=size, offset=offset)
            offset += 4 * size
            tensors[name] = values.reshape(shape).copy()
    except struct.error as e:
        raise ValueError(f"Truncated checkpoint {path}: {e}") from e

    train_cfg = header.get("train_config")
    return Checkpoint(
        model_config=ModelConfig(**header["model_config"]),
        train_config=TrainConfig(**train_cfg) if train_cfg is not None else None,
        step=int(header["step"]),
        seed=int(header["seed"]),
        optimizer_step=int(header.get("optimizer_step", 0)),
        tensors=tensors
    )


def restore_model(ckpt: Checkpoint, expected: Optional[ModelConfig] = None) -> NoiseRobustVC:
    """Build the model from the checkpoint's config and copy its parameters in."""
    if expected is not None and expected != ckpt.model_config:
        raise ValueError("Checkpoint model config does not match the requested config")

    model = NoiseRobustVC(ckpt.model_config)
    params = dict(model.named_parameters())
    stored = {k: v for k, v in ckpt.tensors.items() if not k.startswith("optimizer.")}
    if set(stored) != set(params):
        missing = sorted(set(params) - set(stored))[:3]
        extra = sorted(set(stored) - set(params))[:3]
        raise ValueError(f"Checkpoint/config mismatch: missing {missing}, unexpected {extra}")

    with torch.no_grad():
        for name, param in params.items():
            values = stored[name]
            if tuple(values.shape) != tuple(param.shape):
                raise ValueError(f"Checkpoint/config mismatch for {name}: {values.shape} vs {tuple(param.shape)}")
            param.copy_(torch.from_numpy(values))
    model.eval()
    return model


def restore_optimizer(ckpt: Checkpoint, model: NoiseRobustVC, optimizer: torch.optim.Optimizer) -> None:
    if ckpt.optimizer_step == 0:
        return
    for name, param in model.named_parameters():
        if EXP_AVG + name not in ckpt.tensors:
            continue
        optimizer.state[param] = {
            "step": torch.tensor(float(ckpt.optimizer_step)),
            "exp_avg": torch.from_numpy(ckpt.tensors[EXP_AVG + name].copy()),
            "exp_avg_sq": torch.from_numpy(ckpt.tensors[EXP_AVG_SQ + name].copy())
        }


def latest_checkpoint(directory: str | Path) -> Optional[Path]:
    found = sorted(Path(directory).glob("step_*.ckpt"))
    return found[-1] if found else None
