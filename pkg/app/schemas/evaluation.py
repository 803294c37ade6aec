from pydantic import BaseModel, Field, field_validator
from pathlib import Path
from typing import Literal, Optional

Scenario = Literal["SC-TC", "SC-TN", "SN-TC", "SN-TN"]
RepresentationKind = Literal["speaker", "content", "mel"]


class ConversionRequest(BaseModel):
    source_audio: str
    target_audio: str
    scenario: Scenario = "SC-TC"  # metadata only
    checkpoint: str

    @field_validator("source_audio", "target_audio", "checkpoint")
    @classmethod
    def path_exists(cls, value: str) -> str:
        if not Path(value).is_file():
            raise ValueError(f"File not found: {value}")
        return value


class ProbeReport(BaseModel):
    kind: RepresentationKind
    train_accuracy: float = Field(ge=0, le=1)
    test_accuracy: float = Field(ge=0, le=1)
    num_train: int
    num_test: int
    num_clean: int
    num_noisy: int


class McdRecord(BaseModel):
    converted: str
    target: str
    mcd_db: float
    converted_frames: int
    target_frames: int
    path_length: int
    alignment: str = "dtw"


class McdSummary(BaseModel):
    count: int
    mean_mcd_db: float
    std_mcd_db: float
    alignment: str = "dtw"


class ProjectionRow(BaseModel):
    x: float
    y: float
    domain: int
    speaker: str


class ProjectionResult(BaseModel):
    rows: list[ProjectionRow]
    method: str
    explained_variance_ratio: Optional[list[float]] = None


class AblationRun(BaseModel):
    name: str
    grl_lambda: float
    dat_mode: str
    speaker_probe: ProbeReport
    content_probe: ProbeReport
    recon_first: float
    recon_last: float
    recon_drop: float
    noisy_recon_error: float
    clean_recon_error: float
    denoising_ratio: float


class AblationReport(BaseModel):
    mel_probe: ProbeReport
    runs: list[AblationRun]
