"""Dataset type definitions."""

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import torch

from cropd.data.exceptions import DatasetFormatError, InvalidDatasetParameterError
from cropd.utils.seeding import torch_generator

Split = Literal["train", "test"]


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable labelled sample collection.

    `inputs` is (n, d) for vector data or (n, c, h, w) for image-like data and
    is held as float32; `labels` is an int64 vector with values in [0, K).
    """

    inputs: torch.Tensor
    labels: torch.Tensor
    name: str
    split: Split
    num_classes: int = 0

    def __post_init__(self) -> None:
        inputs = self.inputs.detach().to(torch.float32).contiguous()
        labels = self.labels.detach().to(torch.int64).contiguous()

        if inputs.dim() not in (2, 4):
            raise DatasetFormatError(
                f"Inputs must be (n, d) or (n, c, h, w), got shape {tuple(inputs.shape)}"
            )
        if labels.dim() != 1 or labels.shape[0] != inputs.shape[0]:
            raise DatasetFormatError(
                f"Label vector of length {labels.shape[0] if labels.dim() else 0} "
                f"does not match {inputs.shape[0]} inputs"
            )
        if inputs.shape[0] < 1:
            raise DatasetFormatError("Dataset must contain at least one sample")
        if not torch.isfinite(inputs).all():
            raise DatasetFormatError("Dataset inputs contain NaN or Inf")
        if self.split not in ("train", "test"):
            raise DatasetFormatError(f"Unknown split '{self.split}'")

        num_classes = self.num_classes or int(labels.max().item()) + 1
        if labels.min().item() < 0 or labels.max().item() >= num_classes:
            raise DatasetFormatError(f"Labels must lie in [0, {num_classes})")

        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", num_classes)

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def sample_shape(self) -> tuple[int, ...]:
        """Shape of one input sample."""
        return tuple(self.inputs.shape[1:])

    @property
    def image_like(self) -> bool:
        """True for (n, c, h, w) inputs, which live in [0, 1]."""
        return self.inputs.dim() == 4

    def subset(self, indices: Sequence[int] | torch.Tensor, split: Split | None = None) -> "LabeledDataset":
        """Return the samples at `indices` as a new dataset."""
        index = torch.as_tensor(indices, dtype=torch.int64)
        return LabeledDataset(
            inputs=self.inputs[index],
            labels=self.labels[index],
            name=self.name,
            split=split or self.split,
            num_classes=self.num_classes,
        )

    def take_fraction(self, fraction: float, seed: int) -> "LabeledDataset":
        """Deterministic subsample holding ceil(fraction * n) samples (at least two), in dataset order."""
        if not 0.0 < fraction <= 1.0:
            raise InvalidDatasetParameterError(f"fraction must lie in (0, 1], got {fraction}")
        if fraction == 1.0:
            return self
        count = min(len(self), max(2, math.ceil(fraction * len(self))))
        index = torch.randperm(len(self), generator=torch_generator(seed))[:count]
        return self.subset(index.sort().values)


@dataclass(frozen=True)
class AugmentationPolicy:
    """Desk-scale analogue of crop / flip / colour-jitter / grayscale augmentation."""

    crop_fraction: float = 1.0
    flip_prob: float = 0.0
    jitter_strength: float = 0.0
    grayscale_prob: float = 0.0
    enabled: bool = False
    jitter_prob: float = field(default=0.8)

    def __post_init__(self) -> None:
        if not 0.0 < self.crop_fraction <= 1.0:
            raise InvalidDatasetParameterError("crop_fraction must lie in (0, 1]")
        for name in ("flip_prob", "grayscale_prob", "jitter_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidDatasetParameterError(f"{name} must lie in [0, 1]")
        if self.jitter_strength < 0:
            raise InvalidDatasetParameterError("jitter_strength must be non-negative")

    @classmethod
    def contrastive_default(cls) -> "AugmentationPolicy":
        """Settings matching RandomResizedCrop / flip / ColorJitter(0.4) / grayscale(0.2)."""
        return cls(
            crop_fraction=0.5,
            flip_prob=0.5,
            jitter_strength=0.4,
            grayscale_prob=0.2,
            enabled=True,
        )
