from typing import Dict, Type

from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.base_model import TensorModel
from cropd.models.exceptions import CheckpointError


class ModelRegistry:
    """Maps checkpoint `kind` tags to model classes"""

    def __init__(self) -> None:
        self._models: Dict[str, Type[TensorModel]] = {}

    def register(self, model_cls: Type[TensorModel]) -> None:
        """Register a model class under its kind"""
        if model_cls.kind in self._models:
            raise CheckpointError(f"Model kind '{model_cls.kind}' already registered")
        self._models[model_cls.kind] = model_cls

    def get_model_class(self, kind: str) -> Type[TensorModel]:
        """Get model class by kind"""
        if kind not in self._models:
            raise CheckpointError(f"No model registered for kind '{kind}'")
        return self._models[kind]

    def list_models(self) -> Dict[str, Type[TensorModel]]:
        """Return all registered model classes"""
        return self._models.copy()


def _default_registry() -> ModelRegistry:
    from cropd.models.head import LinearHead

    registry = ModelRegistry()
    for model_cls in (Autoencoder, FeatureBackbone, LinearHead):
        registry.register(model_cls)
    return registry


# Singleton instance
model_registry = _default_registry()
