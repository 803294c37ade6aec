from pydantic import BaseModel, Field
from typing import Literal


class LossWeights(BaseModel):
    alpha: float = Field(10.0, ge=0)  # reconstruction
    beta: float = Field(0.5, ge=0)  # KL
    gamma: float = Field(0.1, ge=0)  # speaker-domain adversary
    tau: float = Field(0.1, ge=0)  # content-domain adversary


class ModelConfig(BaseModel):
    num_mels: int = Field(256, gt=0)
    speaker_dim: int = Field(128, gt=0)
    content_dim: int = Field(128, gt=0)
    grl_lambda: float = Field(0.1, ge=0)

    # Speaker encoder: ConvBank -> residual blocks -> pooling -> dense
    bank_kernels: int = Field(8, gt=0)  # kernel sizes 1..bank_kernels
    bank_channels: int = Field(32, gt=0)  # per kernel size
    speaker_channels: int = Field(128, gt=0)
    speaker_res_blocks: int = Field(3, ge=0)

    # Content encoder
    content_channels: int = Field(256, gt=0)
    content_blocks: int = Field(3, gt=0)

    # Decoder
    decoder_channels: int = Field(256, gt=0)
    decoder_blocks: int = Field(3, gt=0)
    prenet_dim: int = Field(128, gt=0)
    ar_hidden: int = Field(256, gt=0)
    autoregressive: bool = True

    kernel_size: int = Field(5, gt=0)

    class Config:
        extra = "forbid"


class TrainConfig(BaseModel):
    # Loss weights, flat so the config file mirrors field names
    alpha: float = Field(10.0, ge=0)
    beta: float = Field(0.5, ge=0)
    gamma: float = Field(0.1, ge=0)
    tau: float = Field(0.1, ge=0)

    # Adam
    learning_rate: float = Field(1e-4, gt=0)
    adam_beta1: float = Field(0.9, ge=0, lt=1)
    adam_beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)

    batch_size: int = Field(8, ge=1)
    segment_frames: int = Field(128, ge=2)
    max_steps: int = Field(10000, ge=0)
    seed: int = 0
    checkpoint_interval: int = Field(1000, ge=1)

    # Which encoders get reversed gradients; "none" is the no-DAT ablation
    dat_mode: Literal["both", "speaker", "content", "none"] = "both"
    clean_only: bool = False
    kl_anneal_steps: int = Field(0, ge=0)  # 0 = constant beta

    class Config:
        extra = "forbid"

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(alpha=self.alpha, beta=self.beta, gamma=self.gamma, tau=self.tau)


class LossRecord(BaseModel):
    step: int
    recon: float
    kl: float
    dat_zc: float
    dat_zs: float
    total: float
    acc_zc: float
    acc_zs: float
