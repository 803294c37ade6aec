from pydantic_settings import BaseSettings
from functools import lru_cache
from pathlib import Path

from dotenv import dotenv_values

from app.schemas.training import ModelConfig, TrainConfig


class Settings(BaseSettings):
    # App
    APP_NAME: str = "Noise-Robust VC"
    LOG_LEVEL: str = "INFO"
    LOG_EVERY: int = 50  # steps between loss log lines on the console

    # Audio front end
    SAMPLE_RATE: int = 16000
    N_FFT: int = 1024
    WIN_LENGTH: int = 800  # 50 ms
    HOP_LENGTH: int = 200  # 12.5 ms
    N_MELS: int = 256
    F_MIN: float = 0.0
    F_MAX: float = 8000.0
    LOG_FLOOR: float = 1e-10
    LOG_CEIL: float = 20.0  # log-mel ceiling before inversion; full-scale speech stays near 12

    # Mel cepstra for MCD
    N_MCC: int = 40
    MCC_MELS: int = 80

    # Spectrogram inversion
    GRIFFIN_LIM_ITERS: int = 60
    GRIFFIN_LIM_SEED: int = 0

    # Execution
    NUM_WORKERS: int = 1
    DETERMINISTIC: bool = False

    # Domain probe
    PROBE_TEST_SIZE: float = 0.2
    PROBE_SEED: int = 0
    PROBE_FRAMES_PER_UTTERANCE: int = 16

    class Config:
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def load_run_config(path: str | Path) -> tuple[ModelConfig, TrainConfig]:
    """
    Читает конфиг запуска: key=value документ (синтаксис .env)

    Ключи совпадают с именами полей ModelConfig и TrainConfig;
    неизвестные ключи отклоняются.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")

    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    model_keys = set(ModelConfig.model_fields)
    train_keys = set(TrainConfig.model_fields)

    unknown = sorted(set(values) - model_keys - train_keys)
    if unknown:
        raise ValueError(f"Unknown config keys: {', '.join(unknown)}")

    model_cfg = ModelConfig(**{k: v for k, v in values.items() if k in model_keys})
    train_cfg = TrainConfig(**{k: v for k, v in values.items() if k in train_keys})
    return model_cfg, train_cfg


def dump_run_config(model_cfg: ModelConfig, train_cfg: TrainConfig) -> str:
    """Render a config back to key=value text, model keys first."""
    lines = [f"{k}={v}" for k, v in model_cfg.model_dump().items()]
    lines += [f"{k}={v}" for k, v in train_cfg.model_dump().items()]
    return "\n".join(lines) + "\n"
