from pydantic import BaseModel, model_validator
from typing import Optional, Literal

from app.schemas.audio import DomainLabel


class ManifestEntry(BaseModel):
    utterance_id: str
    audio_path: str
    speaker_id: str
    domain: DomainLabel
    clean_pair_id: str  # self for clean entries
    noise_type: Optional[str] = None
    snr_db: Optional[float] = None
    noise_path: Optional[str] = None
    noise_offset: Optional[int] = None  # offset into the split's noise portion
    split: Literal["train", "test"] = "train"

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def check_domain_fields(self):
        has_noise = self.noise_type is not None and self.snr_db is not None
        if self.domain == DomainLabel.NOISY and not has_noise:
            raise ValueError(f"Noisy entry {self.utterance_id} needs noise_type and snr_db")
        if self.domain == DomainLabel.CLEAN:
            if self.noise_type is not None or self.snr_db is not None:
                raise ValueError(f"Clean entry {self.utterance_id} must not carry noise fields")
            if self.clean_pair_id != self.utterance_id:
                raise ValueError(f"Clean entry {self.utterance_id} must pair with itself")
        return self

    @property
    def is_noisy(self) -> bool:
        return self.domain == DomainLabel.NOISY
