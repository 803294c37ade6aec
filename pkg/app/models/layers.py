import torch
import torch.nn as nn
import torch.nn.functional as F


class GradientReversal(torch.autograd.Function):
    """Identity forward; backward multiplies the incoming gradient by -lambda."""

    @staticmethod
    def forward(ctx, x, lambda_):
        ctx.lambda_ = lambda_
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output):
        return grad_output.neg() * ctx.lambda_, None


def grl(x: torch.Tensor, lambda_: float) -> torch.Tensor:
    if lambda_ < 0:
        raise ValueError(f"GRL scale must be >= 0, got {lambda_}")
    return GradientReversal.apply(x, float(lambda_))


class SamePadConv1d(nn.Module):
    """Conv1d over (B, C, T) with replicate padding so T is preserved for any kernel size."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super().__init__()
        self.pad = ((kernel_size - 1) // 2, kernel_size // 2)
        self.conv = nn.Conv1d(in_channels, out_channels, kernel_size)

    def forward(self, x):
        if self.pad != (0, 0):
            x = F.pad(x, self.pad, mode="replicate")
        return self.conv(x)


class ConvBank(nn.Module):
    """Parallel convolutions with kernel sizes 1..K, outputs concatenated on channels."""

    def __init__(self, in_channels: int, channels_per_kernel: int, max_kernel: int):
        super().__init__()
        self.convs = nn.ModuleList(
            [SamePadConv1d(in_channels, channels_per_kernel, k) for k in range(1, max_kernel + 1)]
        )
        self.out_channels = channels_per_kernel * max_kernel

    def forward(self, x):
        return torch.cat([F.relu(conv(x)) for conv in self.convs], dim=1)


class ResBlock1d(nn.Module):
    def __init__(self, channels: int, kernel_size: int):
        super().__init__()
        self.conv1 = SamePadConv1d(channels, channels, kernel_size)
        self.conv2 = SamePadConv1d(channels, channels, kernel_size)

    def forward(self, x):
        h = F.relu(self.conv1(x))
        return F.relu(x + self.conv2(h))


def instance_norm(x: torch.Tensor, eps: float = 1e-5) -> torch.Tensor:
    """Per-utterance, per-channel normalization over time for (B, C, T); no learned affine."""
    if x.shape[-1] < 1:
        raise ValueError("Instance normalization needs at least one frame")
    if x.shape[-1] == 1:
        # zero variance: the centered frame is all zeros
        return x - x.mean(dim=-1, keepdim=True)
    return F.instance_norm(x, eps=eps)


class AdaIN(nn.Module):
    """Instance-normalize, then apply scale/shift produced from a conditioning vector."""

    def forward(self, x, scale, shift):
        # x: (B, C, T); scale, shift: (B, C)
        return instance_norm(x) * scale.unsqueeze(-1) + shift.unsqueeze(-1)


def init_weights(module: nn.Module) -> None:
    """Fan-in scaled uniform weights, zero biases, for conv/dense layers."""
    if isinstance(module, (nn.Conv1d, nn.Linear)):
        fan_in = module.weight[0].numel()
        bound = (1.0 / fan_in) ** 0.5
        nn.init.uniform_(module.weight, -bound, bound)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
