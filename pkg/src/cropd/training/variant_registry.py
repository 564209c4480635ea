from typing import Callable, Dict, Optional

import torch

from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import AugmentationPolicy
from cropd.losses.loss_types import ObjectiveTerms
from cropd.losses.objectives import arae_terms, cropd_objective
from cropd.models.autoencoder import Autoencoder
from cropd.models.model_types import PipelineVariant
from cropd.training.exceptions import UnsupportedVariantError

# (ae, X, weight, tm, tau, aug, seed) -> (loss, terms)
Objective = Callable[
    [Autoencoder, torch.Tensor, float, ThreatModel, float, Optional[AugmentationPolicy], int],
    tuple[torch.Tensor, ObjectiveTerms],
]


def _vanilla(ae, X, weight, tm, tau, aug, seed):
    return cropd_objective(ae, X, 0.0, tm, tau, aug, seed)


def _cropd(ae, X, weight, tm, tau, aug, seed):
    return cropd_objective(ae, X, weight, tm, tau, aug, seed)


def _arae(ae, X, weight, tm, tau, aug, seed):
    return arae_terms(ae, X, weight, tm)


class VariantRegistry:
    """Maps pipeline variants to their pre-processor training objective"""

    def __init__(self) -> None:
        self._objectives: Dict[PipelineVariant, Optional[Objective]] = {}

    def register(self, variant: PipelineVariant, objective: Optional[Objective]) -> None:
        """Register an objective; None marks a variant without a pre-processor"""
        if variant in self._objectives:
            raise UnsupportedVariantError(f"Variant '{variant.value}' already registered")
        self._objectives[variant] = objective

    def get_objective(self, variant: PipelineVariant) -> Objective:
        """Get the training objective of a variant"""
        if variant not in self._objectives:
            raise UnsupportedVariantError(f"No objective registered for variant '{variant}'")
        objective = self._objectives[variant]
        if objective is None:
            raise UnsupportedVariantError(f"Variant '{variant.value}' has no pre-processor to train")
        return objective

    def list_variants(self) -> list[PipelineVariant]:
        """Return all registered variants"""
        return list(self._objectives)


variant_registry = VariantRegistry()
variant_registry.register(PipelineVariant.IDENTITY, None)
variant_registry.register(PipelineVariant.VANILLA, _vanilla)
variant_registry.register(PipelineVariant.CROPD, _cropd)
variant_registry.register(PipelineVariant.ARAE, _arae)
