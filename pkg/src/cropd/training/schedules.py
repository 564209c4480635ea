import math
from typing import Callable, Iterable

import torch
from torch.optim.lr_scheduler import LambdaLR

from cropd.training.training_types import TrainConfig


def lr_factor(cfg: TrainConfig) -> Callable[[int], float]:
    """Epoch -> learning-rate multiplier: linear warm-up, then the configured schedule."""

    def factor(epoch: int) -> float:
        if epoch < cfg.warmup_epochs:
            return (epoch + 1) / cfg.warmup_epochs
        if cfg.schedule == "cosine":
            span = max(1, cfg.epochs - cfg.warmup_epochs)
            progress = min(1.0, (epoch - cfg.warmup_epochs) / span)
            return 0.5 * (1.0 + math.cos(math.pi * progress))
        if cfg.schedule == "step":
            passed = sum(1 for milestone in cfg.milestones if epoch >= milestone)
            return cfg.decay_factor**passed
        return 1.0

    return factor


def build_optimizer(params: Iterable[torch.nn.Parameter], cfg: TrainConfig) -> torch.optim.AdamW:
    return torch.optim.AdamW(params, lr=cfg.learning_rate, weight_decay=cfg.weight_decay)


def build_scheduler(optimizer: torch.optim.Optimizer, cfg: TrainConfig) -> LambdaLR:
    """Scheduler stepped once per epoch."""
    return LambdaLR(optimizer, lr_lambda=lr_factor(cfg))
