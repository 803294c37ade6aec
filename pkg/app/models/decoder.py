from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from app.models.layers import AdaIN, SamePadConv1d
from app.schemas.training import ModelConfig


class Decoder(nn.Module):
    """
    AdaIN-conditioned conv trunk over z_c, followed by a single-frame
    autoregressive GRU. Training uses teacher forcing with the clean target;
    inference feeds back the previously generated frame.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        channels = cfg.decoder_channels
        self.in_proj = nn.Conv1d(cfg.content_dim, channels, 1)
        self.blocks = nn.ModuleList(
            [SamePadConv1d(channels, channels, cfg.kernel_size) for _ in range(cfg.decoder_blocks)]
        )
        self.adain = AdaIN()
        # z_s -> per-block (scale, shift)
        self.cond = nn.Linear(cfg.speaker_dim, cfg.decoder_blocks * 2 * channels)

        if cfg.autoregressive:
            self.prenet = nn.Sequential(
                nn.Linear(cfg.num_mels, cfg.prenet_dim),
                nn.ReLU(),
                nn.Linear(cfg.prenet_dim, cfg.prenet_dim),
                nn.ReLU()
            )
            self.rnn = nn.GRU(channels + cfg.prenet_dim, cfg.ar_hidden, batch_first=True)
            self.out = nn.Linear(cfg.ar_hidden + channels, cfg.num_mels)
        else:
            self.out = nn.Linear(channels, cfg.num_mels)

    def trunk(self, z_s: torch.Tensor, z_c: torch.Tensor) -> torch.Tensor:
        # z_s: (B, S), z_c: (B, T, D) -> (B, T, C)
        batch = z_s.shape[0]
        params = self.cond(z_s).view(batch, len(self.blocks), 2, -1)
        scale, shift = 1.0 + params[:, :, 0], params[:, :, 1]

        h = self.in_proj(z_c.transpose(1, 2))
        for i, conv in enumerate(self.blocks):
            y = F.relu(conv(h))
            h = h + self.adain(y, scale[:, i], shift[:, i])
        return h.transpose(1, 2)

    def forward(
        self,
        z_s: torch.Tensor,
        z_c: torch.Tensor,
        teacher: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        if z_c.shape[1] < 1:
            raise ValueError("Decoder needs a non-empty content sequence")
        h = self.trunk(z_s, z_c)

        if not self.cfg.autoregressive:
            return self.out(h)

        if teacher is None:
            return self.generate(h)

        if teacher.shape[:2] != z_c.shape[:2]:
            raise ValueError(
                f"Teacher frames {tuple(teacher.shape[:2])} do not match content frames {tuple(z_c.shape[:2])}"
            )
        # previous clean frame, zeros before the first one
        previous = torch.cat([torch.zeros_like(teacher[:, :1]), teacher[:, :-1]], dim=1)
        outputs, _ = self.rnn(torch.cat([h, self.prenet(previous)], dim=-1))
        return self.out(torch.cat([outputs, h], dim=-1))

    def generate(self, h: torch.Tensor) -> torch.Tensor:
        batch, frames, _ = h.shape
        frame = h.new_zeros(batch, 1, self.cfg.num_mels)
        state = None
        generated = []
        for t in range(frames):
            step = h[:, t:t + 1]
            output, state = self.rnn(torch.cat([step, self.prenet(frame)], dim=-1), state)
            frame = self.out(torch.cat([output, step], dim=-1))
            generated.append(frame)
        return torch.cat(generated, dim=1)
