"""
Loss terms of the joint objective and their weighted combination
"""
from dataclasses import dataclass
from typing import Union

import torch
import torch.nn.functional as F

from app.models.content_encoder import ContentPosterior
from app.schemas.training import LossWeights

Scalar = Union[torch.Tensor, float]


@dataclass
class LossBreakdown:
    recon: Scalar
    kl: Scalar
    dat_zc: Scalar
    dat_zs: Scalar
    total: Scalar

    def as_floats(self) -> dict:
        return {name: float(value) for name, value in vars(self).items()}


def _expand_labels(logits: torch.Tensor, labels: Union[torch.Tensor, int]) -> torch.Tensor:
    # utterance labels broadcast over frames for per-frame logits
    labels = torch.as_tensor(labels, dtype=torch.long, device=logits.device)
    if labels.dim() < logits.dim() - 1:
        labels = labels.view(*labels.shape, *([1] * (logits.dim() - 1 - labels.dim())))
        labels = labels.expand(logits.shape[:-1])
    return labels


def recon_loss(x_hat: torch.Tensor, x_clean: torch.Tensor) -> torch.Tensor:
    """Mean absolute error against the clean target."""
    if x_hat.shape != x_clean.shape:
        raise ValueError(f"Shape mismatch: {tuple(x_hat.shape)} vs {tuple(x_clean.shape)}")
    return (x_hat - x_clean).abs().mean()


def kl_loss(posterior: ContentPosterior) -> torch.Tensor:
    """KL(N(mu, diag(exp(lv))) || N(0, I)), summed over dimensions, averaged over frames."""
    mu, lv = posterior.mean, posterior.log_variance
    if not (torch.all(torch.isfinite(mu)) and torch.all(torch.isfinite(lv))):
        raise ValueError("Posterior contains non-finite values")
    per_frame = 0.5 * (mu.pow(2) + lv.exp() - 1.0 - lv).sum(dim=-1)
    return per_frame.mean()


def domain_loss(logits: torch.Tensor, labels: Union[torch.Tensor, int]) -> torch.Tensor:
    """
    Softmax cross-entropy over {clean, noisy}

    logits: (2,), (B, 2) or per-frame (B, T, 2); labels: int, (B,) or (B, T).
    Per-frame losses are averaged over frames.
    """
    if logits.shape[-1] != 2:
        raise ValueError(f"Domain logits must have 2 classes, got {logits.shape[-1]}")
    labels = _expand_labels(logits, labels)
    return F.cross_entropy(logits.reshape(-1, 2), labels.reshape(-1))


def domain_accuracy(logits: torch.Tensor, labels: Union[torch.Tensor, int]) -> float:
    labels = _expand_labels(logits, labels)
    return float((logits.argmax(dim=-1) == labels).float().mean())


def total_loss(recon: Scalar, kl: Scalar, dat_zc: Scalar, dat_zs: Scalar, weights: LossWeights) -> LossBreakdown:
    """
    total = alpha*recon + beta*kl + tau*dat_zc + gamma*dat_zs

    No sign flip here: the domain heads minimize their cross-entropy and the
    GRL reverses what reaches the encoders.
    """
    total = weights.alpha * recon + weights.beta * kl + weights.tau * dat_zc + weights.gamma * dat_zs
    return LossBreakdown(recon=recon, kl=kl, dat_zc=dat_zc, dat_zs=dat_zs, total=total)
