from dataclasses import dataclass
from typing import Optional, TypedDict

import torch

from cropd.losses.exceptions import BatchTooSmallError, LossError

UNIT_NORM_TOL = 1e-6
DEFAULT_TEMPERATURE = 0.5


@dataclass(frozen=True)
class ContrastiveBatch:
    """
    Anchors and their adversarial positives.

    Row i of `positives` is the attacked view of anchor i. Negatives for pair i
    are every other row of both matrices (2M - 2 rows).
    """

    anchors: torch.Tensor
    positives: torch.Tensor
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self) -> None:
        if self.anchors.dim() != 2 or self.anchors.shape != self.positives.shape:
            raise LossError(
                f"anchors and positives must be matching (M, dim) matrices, got "
                f"{tuple(self.anchors.shape)} and {tuple(self.positives.shape)}"
            )
        if self.anchors.shape[0] < 2:
            raise BatchTooSmallError("A contrastive batch needs at least two pairs")
        if not self.temperature > 0:
            raise LossError(f"temperature must be positive, got {self.temperature}")
        with torch.no_grad():
            rows = torch.cat([self.anchors, self.positives]).norm(dim=1)
            if ((rows - 1).abs() > UNIT_NORM_TOL).any():
                raise LossError("Contrastive batch rows must have unit norm")

    @property
    def size(self) -> int:
        return self.anchors.shape[0]


class ObjectiveTerms(TypedDict):
    """Term-wise breakdown of a pre-processor objective"""

    reconstruction: float
    contrastive: Optional[float]
    adversarial_reconstruction: Optional[float]
    total: float
    degenerate_rows: int
