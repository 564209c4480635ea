from typing import Iterator

import torch

from cropd.data.dataset_types import LabeledDataset
from cropd.data.exceptions import InvalidDatasetParameterError
from cropd.utils.seeding import torch_generator


def batch_indices(n: int, batch_size: int, shuffle_seed: int | None = None) -> list[torch.Tensor]:
    """Split range(n) into consecutive index batches, permuted when a seed is given."""
    if batch_size < 1:
        raise InvalidDatasetParameterError("batch_size must be at least 1")
    if shuffle_seed is None:
        order = torch.arange(n)
    else:
        order = torch.randperm(n, generator=torch_generator(shuffle_seed))
    return list(torch.split(order, batch_size))


def batch_iter(
    ds: LabeledDataset, batch_size: int, shuffle_seed: int | None = None
) -> Iterator[tuple[torch.Tensor, torch.Tensor]]:
    """Yield (inputs, labels) batches covering every sample exactly once."""
    for index in batch_indices(len(ds), batch_size, shuffle_seed):
        yield ds.inputs[index], ds.labels[index]
