from cropd.models.model_types import (
    AutoencoderSpec,
    BackboneSpec,
    HeadSpec,
    PipelineVariant,
    GradCheckReport,
)
from cropd.models.base_model import TensorModel
from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.head import LinearHead
from cropd.models.operations import encode, decode, project, foundation_forward, head_forward
from cropd.models.grad_check import grad_check
from cropd.models.checkpoint import save_checkpoint, load_checkpoint, read_checkpoint_manifest
from cropd.models.model_registry import ModelRegistry, model_registry
from cropd.models.exceptions import (
    ModelError,
    ShapeMismatchError,
    FrozenModelError,
    CheckpointError,
)

__all__ = [
    "AutoencoderSpec",
    "BackboneSpec",
    "HeadSpec",
    "PipelineVariant",
    "GradCheckReport",
    "TensorModel",
    "Autoencoder",
    "FeatureBackbone",
    "LinearHead",
    "encode",
    "decode",
    "project",
    "foundation_forward",
    "head_forward",
    "grad_check",
    "save_checkpoint",
    "load_checkpoint",
    "read_checkpoint_manifest",
    "ModelRegistry",
    "model_registry",
    "ModelError",
    "ShapeMismatchError",
    "FrozenModelError",
    "CheckpointError",
]
