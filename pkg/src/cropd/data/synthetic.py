"""Synthetic dataset generators."""

import logging
import math

import numpy as np
import torch

from cropd.data.dataset_types import LabeledDataset, Split
from cropd.data.exceptions import InvalidDatasetParameterError
from cropd.utils.geometry import pairwise_distances
from cropd.utils.seeding import torch_generator

logger = logging.getLogger(__name__)

# Grid spacing is 2*epsilon*(1 + SPACING_SLACK) so float32 storage never
# pulls two points closer than 2*epsilon.
SPACING_SLACK = 1e-5
# Discrete points must fit in the unit hypercube scaled by this factor.
MAX_BOX_SIDE = 10.0
# Half-width (in standard deviations) of the fixed affine window used to map
# Gaussian data into [0, 1].
RESCALE_MARGIN = 5.0


def gaussian_class_means(d: int, k: int, separation: float) -> torch.Tensor:
    """Class means with pairwise distance at least `separation`.

    For k <= d the means sit on scaled basis vectors (pairwise distance exactly
    `separation`); otherwise they are spaced `separation` apart on the first axis.
    """
    means = torch.zeros(k, d, dtype=torch.float64)
    if k <= d:
        for i in range(k):
            means[i, i] = separation / math.sqrt(2.0)
    else:
        for i in range(k):
            means[i, 0] = i * separation
    return means


def make_synthetic_gaussian(
    n: int,
    d: int,
    k: int,
    separation: float,
    seed: int,
    split: Split = "train",
    image_shape: tuple[int, int, int] | None = None,
    rescale_unit: bool = False,
    name: str | None = None,
) -> LabeledDataset:
    """
    Draw k unit-variance isotropic Gaussian clusters with balanced labels.

    Args:
        n: Number of samples
        d: Input dimension
        k: Number of classes
        separation: Minimum distance between class means
        seed: Seed for the sample draw (the means do not depend on it)
        split: Split tag of the returned dataset
        image_shape: Optional (c, h, w) with c*h*w == d; implies rescale_unit
        rescale_unit: Map samples into [0, 1] with a fixed affine window

    Returns:
        LabeledDataset: float32 samples, labels balanced to within one

    Raises:
        InvalidDatasetParameterError: If a size or the separation is out of range
    """
    if n < 1 or d < 1:
        raise InvalidDatasetParameterError("n and d must be positive")
    if not separation > 0:
        raise InvalidDatasetParameterError("separation must be positive")
    if k < 2 or n < k:
        raise InvalidDatasetParameterError("Need n >= k >= 2")
    if image_shape is not None and int(np.prod(image_shape)) != d:
        raise InvalidDatasetParameterError(
            f"image_shape {image_shape} does not hold {d} values"
        )

    generator = torch_generator(seed)
    means = gaussian_class_means(d, k, separation)
    labels = torch.arange(n, dtype=torch.int64) % k
    labels = labels[torch.randperm(n, generator=generator)]
    noise = torch.randn(n, d, generator=generator, dtype=torch.float64)
    inputs = means[labels] + noise

    if image_shape is not None or rescale_unit:
        low = means.min().item() - RESCALE_MARGIN
        high = means.max().item() + RESCALE_MARGIN
        inputs = ((inputs - low) / (high - low)).clamp(0.0, 1.0)
    if image_shape is not None:
        inputs = inputs.reshape(n, *image_shape)

    return LabeledDataset(
        inputs=inputs.to(torch.float32),
        labels=labels,
        name=name or f"gaussian-k{k}-d{d}",
        split=split,
        num_classes=k,
    )


def make_separated_discrete(
    n: int,
    d: int,
    epsilon: float,
    seed: int,
    split: Split = "train",
) -> LabeledDataset:
    """
    Place n points on an axis-aligned grid with spacing 2*epsilon.

    Points occupy the first n cells of an m**d grid (m the smallest side with
    m**d >= n), in an order shuffled by `seed`; labels alternate over two
    classes. The grid must fit inside the unit hypercube scaled by MAX_BOX_SIDE.

    Raises:
        InvalidDatasetParameterError: If n < 2, epsilon <= 0 or the grid does not fit
    """
    if n < 2 or d < 1:
        raise InvalidDatasetParameterError("Need n >= 2 points and d >= 1")
    if not epsilon > 0:
        raise InvalidDatasetParameterError("epsilon must be positive")

    side_count = 1
    while side_count**d < n:
        side_count += 1
    spacing = 2.0 * epsilon * (1.0 + SPACING_SLACK)
    box_side = (side_count - 1) * spacing
    if box_side > MAX_BOX_SIDE:
        raise InvalidDatasetParameterError(
            f"{n} points at spacing {2 * epsilon} need a box of side {box_side:.4g} "
            f"in dimension {d}, larger than {MAX_BOX_SIDE}"
        )

    cells = np.stack(np.unravel_index(np.arange(n), (side_count,) * d), axis=1)
    order = torch.randperm(n, generator=torch_generator(seed)).numpy()
    points = torch.as_tensor(cells[order] * spacing, dtype=torch.float32)

    distances = pairwise_distances(points, points)
    distances.fill_diagonal_(float("inf"))
    min_distance = distances.min().item()
    if min_distance < 2.0 * epsilon:
        raise InvalidDatasetParameterError(
            f"Grid placement violated spacing: {min_distance} < {2 * epsilon}"
        )
    logger.debug("Separated grid: n=%d d=%d min distance %.6g", n, d, min_distance)

    return LabeledDataset(
        inputs=points,
        labels=torch.arange(n, dtype=torch.int64) % 2,
        name=f"separated-n{n}-d{d}",
        split=split,
        num_classes=2,
    )
