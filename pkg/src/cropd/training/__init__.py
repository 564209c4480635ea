from cropd.training.training_types import TrainConfig, EpochRecord, StepOutput, HeadMode, Schedule
from cropd.training.history import TrainHistory
from cropd.training.schedules import lr_factor, build_optimizer, build_scheduler
from cropd.training.trainer import Trainer
from cropd.training.variant_registry import VariantRegistry, variant_registry
from cropd.training.foundation import pretrain_foundation
from cropd.training.preprocessor import train_preprocessor
from cropd.training.head_training import train_head
from cropd.training.exceptions import (
    TrainingError,
    TrainingDivergedError,
    UnsupportedVariantError,
    UnfrozenComponentError,
)

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "StepOutput",
    "HeadMode",
    "Schedule",
    "TrainHistory",
    "lr_factor",
    "build_optimizer",
    "build_scheduler",
    "Trainer",
    "VariantRegistry",
    "variant_registry",
    "pretrain_foundation",
    "train_preprocessor",
    "train_head",
    "TrainingError",
    "TrainingDivergedError",
    "UnsupportedVariantError",
    "UnfrozenComponentError",
]
