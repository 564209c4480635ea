"""Checkpoint storage: manifest.json plus one raw little-endian blob per tensor."""

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np
import torch

from cropd.models.base_model import TensorModel
from cropd.models.exceptions import CheckpointError
from cropd.models.model_registry import model_registry

MANIFEST_FILE = "manifest.json"

_BLOB_DTYPES = {torch.float32: ("float32", "<f4"), torch.float64: ("float64", "<f8")}
_NUMPY_DTYPES = {name: code for name, code in _BLOB_DTYPES.values()}


def save_checkpoint(
    model: TensorModel,
    path: str | Path,
    seed: Optional[int] = None,
    provenance: Optional[dict[str, Any]] = None,
) -> Path:
    """
    Write a model checkpoint directory.

    Args:
        model: Model to store
        path: Target directory, created if missing
        seed: Construction seed recorded in the manifest
        provenance: Free-form training provenance (config hash, stage, ...)

    Returns:
        Path: The checkpoint directory
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)

    tensors = []
    for name, value in model.state_dict().items():
        if value.dtype not in _BLOB_DTYPES:
            raise CheckpointError(f"Cannot store tensor '{name}' of dtype {value.dtype}")
        dtype_name, code = _BLOB_DTYPES[value.dtype]
        filename = f"{name}.bin"
        value.detach().cpu().numpy().astype(code).tofile(directory / filename)
        tensors.append({"name": name, "shape": list(value.shape), "dtype": dtype_name, "file": filename})

    manifest = {
        "kind": model.kind,
        "spec": model.spec_dict(),
        "trainable": model.trainable,
        "seed": seed,
        "provenance": provenance or {},
        "tensors": tensors,
    }
    (directory / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory


def load_checkpoint(path: str | Path) -> TensorModel:
    """
    Rebuild a model from a checkpoint directory, restoring its frozen state.

    Raises:
        CheckpointError: If the directory, manifest or a blob is missing or inconsistent
    """
    directory = Path(path)
    manifest_path = directory / MANIFEST_FILE
    if not manifest_path.is_file():
        raise CheckpointError(f"No checkpoint manifest in {directory}")

    try:
        manifest = json.loads(manifest_path.read_text())
        model_cls = model_registry.get_model_class(manifest["kind"])
        model = model_cls.from_spec_dict(manifest["spec"])
        state = {}
        for entry in manifest["tensors"]:
            blob = directory / entry["file"]
            if not blob.is_file():
                raise CheckpointError(f"Missing blob {entry['file']}")
            array = np.fromfile(blob, dtype=_NUMPY_DTYPES[entry["dtype"]])
            if array.size != int(np.prod(entry["shape"])):
                raise CheckpointError(f"Blob {entry['file']} does not match shape {entry['shape']}")
            state[entry["name"]] = torch.from_numpy(array.reshape(entry["shape"]).copy())
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise CheckpointError(f"Corrupt checkpoint manifest in {directory}: {str(e)}")

    model.load_state_dict(state, strict=True)
    if not manifest.get("trainable", True):
        model.freeze()
    return model


def read_checkpoint_manifest(path: str | Path) -> dict[str, Any]:
    """Return the manifest of a checkpoint without loading tensors."""
    manifest_path = Path(path) / MANIFEST_FILE
    if not manifest_path.is_file():
        raise CheckpointError(f"No checkpoint manifest in {path}")
    return json.loads(manifest_path.read_text())
