from cropd.data.dataset_types import LabeledDataset, AugmentationPolicy
from cropd.data.synthetic import make_synthetic_gaussian, make_separated_discrete
from cropd.data.container import save_tensor_dataset, load_tensor_dataset
from cropd.data.augmentation import augment
from cropd.data.batching import batch_iter, batch_indices
from cropd.data.exceptions import (
    DatasetError,
    InvalidDatasetParameterError,
    DatasetNotFoundError,
    DatasetFormatError,
)

__all__ = [
    "LabeledDataset",
    "AugmentationPolicy",
    "make_synthetic_gaussian",
    "make_separated_discrete",
    "save_tensor_dataset",
    "load_tensor_dataset",
    "augment",
    "batch_iter",
    "batch_indices",
    "DatasetError",
    "InvalidDatasetParameterError",
    "DatasetNotFoundError",
    "DatasetFormatError",
]
