from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn

from app.models.content_encoder import ContentEncoder, ContentPosterior, sample_content
from app.models.decoder import Decoder
from app.models.domain_classifier import DomainClassifier
from app.models.layers import grl, init_weights
from app.models.speaker_encoder import SpeakerEncoder
from app.schemas.training import ModelConfig


@dataclass
class ModelOutput:
    posterior: ContentPosterior
    z_c: torch.Tensor  # (B, T, content_dim)
    z_s: torch.Tensor  # (B, speaker_dim)
    content_logits: torch.Tensor  # (B, T, 2)
    speaker_logits: torch.Tensor  # (B, 2)
    reconstruction: torch.Tensor  # (B, T, num_mels)


class NoiseRobustVC(nn.Module):
    """Speaker encoder, content encoder, decoder and one domain head per representation."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.speaker_encoder = SpeakerEncoder(cfg)
        self.content_encoder = ContentEncoder(cfg)
        self.decoder = Decoder(cfg)
        self.speaker_domain = DomainClassifier(cfg.speaker_dim)
        self.content_domain = DomainClassifier(cfg.content_dim)
        self.apply(init_weights)

    def forward(
        self,
        x: torch.Tensor,
        teacher: Optional[torch.Tensor] = None,
        epsilon: Optional[torch.Tensor] = None,
        speaker_lambda: Optional[float] = None,
        content_lambda: Optional[float] = None
    ) -> ModelOutput:
        """
        Training-time pass. epsilon=None takes the deterministic path (z_c = mean).
        The GRL sits between each representation and its domain head, so the heads
        minimize cross-entropy while the encoders receive reversed gradients.
        """
        speaker_lambda = self.cfg.grl_lambda if speaker_lambda is None else speaker_lambda
        content_lambda = self.cfg.grl_lambda if content_lambda is None else content_lambda

        posterior = self.content_encoder(x)
        if epsilon is None:
            epsilon = torch.zeros_like(posterior.mean)
        z_c = sample_content(posterior, epsilon)
        z_s = self.speaker_encoder(x)

        content_logits = self.content_domain(grl(z_c, content_lambda))
        speaker_logits = self.speaker_domain(grl(z_s, speaker_lambda))
        reconstruction = self.decoder(z_s, z_c, teacher=teacher)

        return ModelOutput(
            posterior=posterior,
            z_c=z_c,
            z_s=z_s,
            content_logits=content_logits,
            speaker_logits=speaker_logits,
            reconstruction=reconstruction
        )

    @torch.no_grad()
    def convert(self, source: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        """Run-time path: content from source (epsilon = 0), speaker from target, autoregressive decode."""
        z_c = self.content_encoder(source).mean
        z_s = self.speaker_encoder(target)
        return self.decoder(z_s, z_c)
