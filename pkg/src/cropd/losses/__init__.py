from cropd.losses.loss_types import ContrastiveBatch, ObjectiveTerms, DEFAULT_TEMPERATURE
from cropd.losses.contrastive import cosine_sim, contrastive_item_loss, batch_contrastive_loss
from cropd.losses.reconstruction import reconstruction_loss, squared_error
from cropd.losses.classification import cross_entropy
from cropd.losses.objectives import cropd_objective, arae_objective, arae_terms
from cropd.losses.exceptions import (
    LossError,
    ZeroVectorError,
    EmptyNegativesError,
    BatchTooSmallError,
    InvalidLabelError,
)

__all__ = [
    "ContrastiveBatch",
    "ObjectiveTerms",
    "DEFAULT_TEMPERATURE",
    "cosine_sim",
    "contrastive_item_loss",
    "batch_contrastive_loss",
    "reconstruction_loss",
    "squared_error",
    "cross_entropy",
    "cropd_objective",
    "arae_objective",
    "arae_terms",
    "LossError",
    "ZeroVectorError",
    "EmptyNegativesError",
    "BatchTooSmallError",
    "InvalidLabelError",
]
