import pytest
import torch

from cropd.data import make_synthetic_gaussian
from cropd.models import Autoencoder, BackboneSpec, FeatureBackbone, HeadSpec, LinearHead


@pytest.fixture
def separable_train():
    return make_synthetic_gaussian(n=200, d=4, k=2, separation=6.0, seed=0, split="train")


@pytest.fixture
def separable_test():
    return make_synthetic_gaussian(n=200, d=4, k=2, separation=6.0, seed=1, split="test")


@pytest.fixture
def identity_autoencoder():
    return Autoencoder.identity(4).freeze()


@pytest.fixture
def identity_backbone():
    return FeatureBackbone.build(BackboneSpec(input_shape=(4,), kind="identity"), seed=0).freeze()


@pytest.fixture
def random_backbone():
    spec = BackboneSpec(input_shape=(4,), hidden_widths=(8,), feature_dim=6, kind="random")
    return FeatureBackbone.build(spec, seed=0).freeze()


@pytest.fixture
def linear_head():
    return LinearHead.build(HeadSpec(feature_dim=4, num_classes=2), seed=0)


@pytest.fixture
def unit_rows_batch():
    def make(m: int, dim: int, seed: int = 0) -> torch.Tensor:
        generator = torch.Generator().manual_seed(seed)
        rows = torch.randn(m, dim, generator=generator, dtype=torch.float64)
        return rows / rows.norm(dim=1, keepdim=True)

    return make
