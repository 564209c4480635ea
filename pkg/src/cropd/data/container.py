"""On-disk dataset container: manifest.json + raw little-endian arrays."""

import json
from pathlib import Path

import numpy as np
import torch

from cropd.data.dataset_types import LabeledDataset
from cropd.data.exceptions import DatasetFormatError, DatasetNotFoundError

MANIFEST_FILE = "manifest.json"
INPUTS_FILE = "inputs.bin"
LABELS_FILE = "labels.bin"

_INPUT_DTYPES = {"float32": "<f4", "float64": "<f8"}
_LABEL_DTYPE = "<i4"


def save_tensor_dataset(ds: LabeledDataset, path: str | Path, dtype: str = "float32") -> Path:
    """
    Write a dataset container directory.

    Args:
        ds: Dataset to store
        path: Target directory, created if missing
        dtype: Input element type recorded in the manifest

    Returns:
        Path: The container directory
    """
    if dtype not in _INPUT_DTYPES:
        raise DatasetFormatError(f"Unsupported input dtype '{dtype}'")
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)

    manifest = {
        "name": ds.name,
        "n": len(ds),
        "shape": list(ds.inputs.shape),
        "K": ds.num_classes,
        "dtype": dtype,
        "split": ds.split,
    }
    ds.inputs.numpy().astype(_INPUT_DTYPES[dtype]).tofile(directory / INPUTS_FILE)
    ds.labels.numpy().astype(_LABEL_DTYPE).tofile(directory / LABELS_FILE)
    (directory / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory


def load_tensor_dataset(path: str | Path) -> LabeledDataset:
    """
    Read a dataset container directory written by save_tensor_dataset.

    Raises:
        DatasetNotFoundError: If the directory or one of its files is missing
        DatasetFormatError: If the manifest is unreadable or sizes disagree
    """
    directory = Path(path)
    files = [directory / MANIFEST_FILE, directory / INPUTS_FILE, directory / LABELS_FILE]
    missing = [f.name for f in files if not f.is_file()]
    if missing:
        raise DatasetNotFoundError(f"Dataset container {directory} is missing {missing}")

    try:
        manifest = json.loads(files[0].read_text())
        shape = [int(s) for s in manifest["shape"]]
        n = int(manifest["n"])
        num_classes = int(manifest["K"])
        input_dtype = _INPUT_DTYPES[manifest["dtype"]]
        name = str(manifest["name"])
        split = manifest["split"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"Corrupt dataset manifest in {directory}: {str(e)}")

    if not shape or shape[0] != n:
        raise DatasetFormatError(f"Manifest shape {shape} does not start with n={n}")

    inputs = np.fromfile(files[1], dtype=input_dtype)
    labels = np.fromfile(files[2], dtype=_LABEL_DTYPE)
    if inputs.size != int(np.prod(shape)):
        raise DatasetFormatError(
            f"inputs.bin holds {inputs.size} values, manifest shape {shape} needs {int(np.prod(shape))}"
        )
    if labels.size != n:
        raise DatasetFormatError(f"labels.bin holds {labels.size} labels, expected {n}")

    return LabeledDataset(
        inputs=torch.from_numpy(inputs.astype(np.float32).reshape(shape)),
        labels=torch.from_numpy(labels.astype(np.int64)),
        name=name,
        split=split,
        num_classes=num_classes,
    )
