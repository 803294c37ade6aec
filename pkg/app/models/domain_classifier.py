import torch
import torch.nn as nn


class DomainClassifier(nn.Module):
    """
    Clean/noisy classifier: one dense layer producing 2 logits (softmax lives in the loss).
    Applied on the last dimension, so a (B, T, D) content sequence is classified
    frame by frame with shared weights.
    """

    def __init__(self, input_dim: int, num_domains: int = 2):
        super().__init__()
        self.dense = nn.Linear(input_dim, num_domains)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return self.dense(z)
