import torch
import torch.nn as nn
import torch.nn.functional as F

from app.models.layers import ConvBank, ResBlock1d, SamePadConv1d
from app.schemas.training import ModelConfig


class SpeakerEncoder(nn.Module):
    """
    Utterance-level speaker embedding:
    - ConvBank (kernel sizes 1..K, concatenated)
    - residual 1-D conv blocks
    - average pooling over time
    - two dense layers
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.bank = ConvBank(cfg.num_mels, cfg.bank_channels, cfg.bank_kernels)
        self.in_proj = SamePadConv1d(self.bank.out_channels, cfg.speaker_channels, 1)
        self.res_blocks = nn.Sequential(
            *[ResBlock1d(cfg.speaker_channels, cfg.kernel_size) for _ in range(cfg.speaker_res_blocks)]
        )
        self.dense1 = nn.Linear(cfg.speaker_channels, cfg.speaker_channels)
        self.dense2 = nn.Linear(cfg.speaker_channels, cfg.speaker_dim)

    def frame_features(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, T, num_mels) -> (B, C, T)
        h = self.bank(x.transpose(1, 2))
        h = F.relu(self.in_proj(h))
        return self.res_blocks(h)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[1] < 1:
            raise ValueError("Speaker encoder needs at least one frame")
        if not torch.isfinite(x).all():
            raise ValueError("Speaker encoder input contains non-finite values")
        pooled = self.frame_features(x).mean(dim=-1)  # (B, C)
        return self.dense2(F.relu(self.dense1(pooled)))  # (B, speaker_dim)
