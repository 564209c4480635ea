"""Training configuration and per-step records."""

from dataclasses import dataclass
from typing import Any, Literal, NamedTuple, Optional

import torch

from cropd.training.exceptions import TrainingError

Schedule = Literal["cosine", "step", "constant"]
HeadMode = Literal["clean", "robust"]

# Head recipe: decay by 0.1 after epochs 30, 70 and 100 of 150.
HEAD_MILESTONE_FRACTIONS = (30 / 150, 70 / 150, 100 / 150)
# Pre-processor recipe: 20 warm-up epochs out of 400.
PREPROCESSOR_WARMUP_FRACTION = 20 / 400


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimizer and schedule settings of one training stage.

    The optimizer is AdamW (decoupled weight decay). `milestones` are only used
    by the step schedule; `batch_size_schedule` holds (epoch, batch_size)
    switches applied from that epoch on.
    """

    learning_rate: float = 1e-3
    weight_decay: float = 5e-2
    epochs: int = 100
    batch_size: int = 64
    warmup_epochs: int = 0
    schedule: Schedule = "cosine"
    seed: int = 0
    milestones: tuple[int, ...] = ()
    decay_factor: float = 0.1
    batch_size_schedule: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "milestones", tuple(int(m) for m in self.milestones))
        object.__setattr__(
            self,
            "batch_size_schedule",
            tuple(sorted((int(e), int(b)) for e, b in self.batch_size_schedule)),
        )
        if not self.learning_rate > 0:
            raise TrainingError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise TrainingError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1 or any(b < 1 for _, b in self.batch_size_schedule):
            raise TrainingError("batch sizes must be at least 1")
        if not 0 <= self.warmup_epochs <= self.epochs:
            raise TrainingError("warmup_epochs must lie in [0, epochs]")
        if self.schedule not in ("cosine", "step", "constant"):
            raise TrainingError(f"Unknown schedule '{self.schedule}'")

    @classmethod
    def preprocessor_default(cls, epochs: int = 100, seed: int = 0) -> "TrainConfig":
        """Warm-up plus cosine annealing with AdamW, scaled to `epochs`."""
        return cls(
            learning_rate=1e-3,
            weight_decay=5e-2,
            epochs=epochs,
            batch_size=64,
            warmup_epochs=max(1, round(epochs * PREPROCESSOR_WARMUP_FRACTION)),
            schedule="cosine",
            seed=seed,
        )

    @classmethod
    def head_default(cls, epochs: int = 50, seed: int = 0) -> "TrainConfig":
        """Step decay at the head recipe's milestones scaled to `epochs`."""
        return cls(
            learning_rate=1e-2,
            weight_decay=0.0,
            epochs=epochs,
            batch_size=64,
            schedule="step",
            milestones=tuple(max(1, round(epochs * f)) for f in HEAD_MILESTONE_FRACTIONS),
            seed=seed,
        )

    def batch_size_at(self, epoch: int) -> int:
        """Batch size in effect at `epoch` (0-based)."""
        size = self.batch_size
        for start, value in self.batch_size_schedule:
            if epoch >= start:
                size = value
        return size


class StepOutput(NamedTuple):
    """Result of one optimization step's forward pass"""

    loss: torch.Tensor
    terms: dict[str, Optional[float]]
    forward_batches: int = 1


@dataclass
class EpochRecord:
    """Means over the steps of one completed epoch"""

    epoch: int
    learning_rate: float
    batch_size: int
    steps: int
    terms: dict[str, Optional[float]]
    grad_norm: float
    wall_clock_sec: float
    forward_batches: int
    samples: int

    def to_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "epoch": self.epoch,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "steps": self.steps,
        }
        row.update(self.terms)
        row.update(
            {
                "grad_norm": self.grad_norm,
                "wall_clock_sec": self.wall_clock_sec,
                "forward_batches": self.forward_batches,
                "samples": self.samples,
            }
        )
        return row

