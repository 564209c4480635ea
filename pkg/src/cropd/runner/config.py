"""Experiment configuration schema, loading and canonical hashing."""

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Sequence

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator

from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import AugmentationPolicy
from cropd.models.model_types import AutoencoderSpec, BackboneSpec, HeadSpec, PipelineVariant
from cropd.runner.exceptions import ConfigError
from cropd.training.training_types import TrainConfig
from cropd.utils.serialization import canonical_json, format_real, parse_real, sha256_hex


def _canonical_real(value: Any) -> str:
    try:
        parse_real(value)
        return format_real(value)
    except (ValueError, TypeError, AttributeError) as e:
        raise ValueError(f"expected a number or a rational string such as '8/255': {str(e)}")


# Budget values are kept as canonical strings ("8/255") so hashes never see float drift.
Real = Annotated[str, BeforeValidator(_canonical_real)]

AttackPreset = Literal["fgsm", "pgd10", "pgd20", "robust_head"]


class ConfigSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DatasetConfig(ConfigSection):
    """Synthetic data recipe or an on-disk container pair"""

    kind: Literal["gaussian", "separated", "container"] = "gaussian"
    name: str = ""
    n_train: int = Field(default=2000, ge=2)
    n_test: int = Field(default=1000, ge=2)
    d: int = Field(default=32, ge=1)
    k: int = Field(default=2, ge=2)
    separation: float = Field(default=3.0, gt=0)
    seed: int = 0
    image_shape: Optional[tuple[int, int, int]] = None
    rescale_unit: bool = False
    epsilon: Real = "1/10"
    path: str = ""
    train_fraction: float = Field(default=1.0, gt=0, le=1)


class ThreatConfig(ConfigSection):
    """Attack budget shared by pre-processor training, head training and evaluation"""

    norm: Literal["inf", "2"] = "inf"
    epsilon: Real = "8/255"
    clamp: Optional[tuple[float, float]] = None
    train_attack: AttackPreset = "fgsm"
    eval_attacks: tuple[AttackPreset, ...] = ("pgd10", "pgd20")

    def threat_model(self, preset: str) -> ThreatModel:
        return ThreatModel.preset(preset, parse_real(self.epsilon), p=self.norm, clamp_range=self.clamp)

    def train_threat_model(self) -> ThreatModel:
        return self.threat_model(self.train_attack)

    def eval_threat_models(self) -> list[ThreatModel]:
        return [self.threat_model(name) for name in self.eval_attacks]


class TrainSection(ConfigSection):
    learning_rate: float = Field(default=1e-3, gt=0)
    weight_decay: float = Field(default=5e-2, ge=0)
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=64, ge=1)
    warmup_epochs: int = Field(default=0, ge=0)
    schedule: Literal["cosine", "step", "constant"] = "cosine"
    milestones: tuple[int, ...] = ()
    decay_factor: float = Field(default=0.1, gt=0)
    batch_size_schedule: dict[int, int] = Field(default_factory=dict)

    def to_train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            batch_size=self.batch_size,
            warmup_epochs=self.warmup_epochs,
            schedule=self.schedule,
            seed=seed,
            milestones=self.milestones,
            decay_factor=self.decay_factor,
            batch_size_schedule=tuple(self.batch_size_schedule.items()),
        )


class BackboneConfig(ConfigSection):
    hidden_widths: tuple[int, ...] = (64,)
    feature_dim: int = Field(default=32, ge=1)
    activation: Literal["relu", "gelu"] = "gelu"
    kind: Literal["trained", "random", "identity"] = "trained"


class AutoencoderConfig(ConfigSection):
    encoder_widths: tuple[int, ...] = (64,)
    decoder_widths: tuple[int, ...] = (64,)
    latent_dim: int = Field(default=16, ge=1)
    projector_hidden: int = Field(default=64, ge=1)
    projector_out: int = Field(default=32, ge=2)
    mask_fraction: float = Field(default=0.0, ge=0, lt=1)
    mask_deterministic: bool = True
    activation: Literal["relu", "gelu"] = "gelu"
    encoder_kind: Literal["mlp", "conv"] = "mlp"
    conv_channels: tuple[int, ...] = (8, 16)


class AugmentationConfig(ConfigSection):
    enabled: bool = False
    crop_fraction: float = 0.5
    flip_prob: float = 0.5
    jitter_strength: float = 0.4
    jitter_prob: float = 0.8
    grayscale_prob: float = 0.2

    def to_policy(self) -> AugmentationPolicy:
        return AugmentationPolicy(**self.model_dump())


class EvaluationConfig(ConfigSection):
    batch_size: int = Field(default=256, ge=1)
    bootstrap_repeats: int = Field(default=1000, ge=100)


class TheoryConfig(ConfigSection):
    enabled: bool = True
    eta_space: Literal["projector", "latent"] = "projector"
    lipschitz_pairs: int = Field(default=64, ge=1)
    kappa: Optional[float] = Field(default=None, ge=0)
    max_eta_samples: int = Field(default=2000, ge=4)
    witness_points: int = Field(default=64, ge=2)


class TransferConfig(ConfigSection):
    """Train the pre-processor on `source` and apply it to the main dataset"""

    enabled: bool = False
    source: DatasetConfig = Field(default_factory=DatasetConfig)


def _foundation_defaults() -> TrainSection:
    return TrainSection(learning_rate=1e-2, weight_decay=0.0, epochs=30, schedule="constant")


def _preprocessor_defaults() -> TrainSection:
    return TrainSection(learning_rate=1e-3, weight_decay=5e-2, epochs=100, warmup_epochs=5, schedule="cosine")


def _head_defaults() -> TrainSection:
    return TrainSection(learning_rate=1e-2, weight_decay=0.0, epochs=50, schedule="step", milestones=(10, 23, 33))


class ExperimentConfig(ConfigSection):
    """
    Complete description of one experiment.

    Every field has a default and unknown keys are rejected. `lam` weights the
    contrastive term of CRoPD; `gamma` weights the adversarial reconstruction
    term of ARAE.
    """

    name: str = "experiment"
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    variant: PipelineVariant = PipelineVariant.IDENTITY
    lam: float = Field(default=1.0, ge=0)
    gamma: float = Field(default=0.1, ge=0)
    tau: float = Field(default=0.5, gt=0)
    threat: ThreatConfig = Field(default_factory=ThreatConfig)
    backbone: BackboneConfig = Field(default_factory=BackboneConfig)
    autoencoder: AutoencoderConfig = Field(default_factory=AutoencoderConfig)
    augmentation: AugmentationConfig = Field(default_factory=AugmentationConfig)
    foundation_training: TrainSection = Field(default_factory=_foundation_defaults)
    preprocessor_training: TrainSection = Field(default_factory=_preprocessor_defaults)
    head_training: TrainSection = Field(default_factory=_head_defaults)
    head_mode: Literal["clean", "robust"] = "clean"
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    theory: TheoryConfig = Field(default_factory=TheoryConfig)
    transfer: TransferConfig = Field(default_factory=TransferConfig)
    output_dir: str = ""
    seeds: tuple[int, ...] = (0,)
    dtype: Literal["float32", "float64"] = "float64"

    @field_validator("seeds")
    @classmethod
    def _seeds_not_empty(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("at least one seed is required")
        return value

    @property
    def preprocessor_weight(self) -> float:
        """lambda for CRoPD, gamma for ARAE, 0 otherwise."""
        if self.variant is PipelineVariant.CROPD:
            return self.lam
        if self.variant is PipelineVariant.ARAE:
            return self.gamma
        return 0.0

    def backbone_spec(self, input_shape: tuple[int, ...]) -> BackboneSpec:
        return BackboneSpec(input_shape=input_shape, dtype=self.dtype, **self.backbone.model_dump())

    def autoencoder_spec(self, input_shape: tuple[int, ...], seed: int) -> AutoencoderSpec:
        return AutoencoderSpec(input_shape=input_shape, mask_seed=seed, dtype=self.dtype, **self.autoencoder.model_dump())

    def head_spec(self, feature_dim: int, num_classes: int) -> HeadSpec:
        return HeadSpec(feature_dim=feature_dim, num_classes=num_classes, dtype=self.dtype)


def config_dict(config: ConfigSection) -> dict[str, Any]:
    return config.model_dump(mode="json")


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical JSON text of a configuration."""
    return canonical_json(config_dict(config))


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical form; stable across platforms."""
    return sha256_hex(config_dict(config))


def _format_location(loc: Sequence[Any]) -> str:
    return ".".join(str(part) for part in loc)


def validate_config(data: dict[str, Any]) -> ExperimentConfig:
    """
    Validate a raw mapping.

    Raises:
        ConfigError: Naming the first offending field; unknown keys are reported as such
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        path = _format_location(error["loc"])
        if error["type"] == "extra_forbidden":
            raise ConfigError(f"Unknown config key '{path}'", field_path=path)
        raise ConfigError(f"Invalid value for '{path}': {error['msg']}", field_path=path)


def apply_overrides(data: dict[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """
    Apply `a.b.c=value` overrides; values are parsed as JSON, else kept as strings.

    Raises:
        ConfigError: If an override has no '='
    """
    data = json.loads(json.dumps(data))
    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"Override '{override}' must have the form key=value", field_path=override)
        key, raw = override.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            child = target.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Cannot set '{key}': '{part}' is not a section", field_path=key)
            target = child
        target[parts[-1]] = value
    return data


def load_config(path: str | Path | None = None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """
    Read a JSON config file (or start from defaults), apply overrides, validate.

    Raises:
        ConfigError: If the file is missing, not JSON, or fails validation
    """
    data: dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"Config file not found: {config_path}")
        try:
            data = json.loads(config_path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {config_path} is not valid JSON: {str(e)}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {config_path} must hold a JSON object")
    return validate_config(apply_overrides(data, overrides))
