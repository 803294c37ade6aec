from dataclasses import dataclass
from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.models.layers import SamePadConv1d, instance_norm
from app.schemas.training import ModelConfig

LOGVAR_MIN, LOGVAR_MAX = -7.0, 7.0


@dataclass
class ContentPosterior:
    mean: torch.Tensor  # (B, T, content_dim)
    log_variance: torch.Tensor  # (B, T, content_dim)

    def __post_init__(self):
        if self.mean.shape != self.log_variance.shape:
            raise ValueError(f"Posterior shapes differ: {tuple(self.mean.shape)} vs {tuple(self.log_variance.shape)}")


def sample_content(posterior: ContentPosterior, epsilon: torch.Tensor) -> torch.Tensor:
    """Reparameterized draw: mean + exp(0.5 * log_variance) * epsilon."""
    if epsilon.shape != posterior.mean.shape:
        raise ValueError(f"epsilon shape {tuple(epsilon.shape)} != posterior shape {tuple(posterior.mean.shape)}")
    return posterior.mean + torch.exp(0.5 * posterior.log_variance) * epsilon


class ContentEncoder(nn.Module):
    """
    Frame-level content posterior. Every conv block is followed by instance
    normalization without affine parameters, so per-utterance channel statistics
    (speaker timbre, stationary noise coloration) are removed. Stride 1 throughout:
    T frames in, T posterior frames out.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        channels = [cfg.num_mels] + [cfg.content_channels] * cfg.content_blocks
        self.convs = nn.ModuleList(
            [SamePadConv1d(c_in, c_out, cfg.kernel_size) for c_in, c_out in zip(channels[:-1], channels[1:])]
        )
        self.mean_head = nn.Conv1d(cfg.content_channels, cfg.content_dim, 1)
        self.logvar_head = nn.Conv1d(cfg.content_channels, cfg.content_dim, 1)

    def normalized_activations(self, x: torch.Tensor) -> List[torch.Tensor]:
        """Outputs of each instance-normalization sublayer, each (B, C, T)."""
        if x.shape[1] < 2:
            raise ValueError("Content encoder needs at least 2 frames")
        if not torch.isfinite(x).all():
            raise ValueError("Content encoder input contains non-finite values")
        h = x.transpose(1, 2)
        outputs = []
        for conv in self.convs:
            h = instance_norm(conv(h))
            outputs.append(h)
            h = F.relu(h)
        return outputs

    def forward(self, x: torch.Tensor) -> ContentPosterior:
        h = F.relu(self.normalized_activations(x)[-1])
        mean = self.mean_head(h).transpose(1, 2)
        log_variance = self.logvar_head(h).clamp(LOGVAR_MIN, LOGVAR_MAX).transpose(1, 2)
        return ContentPosterior(mean=mean, log_variance=log_variance)
