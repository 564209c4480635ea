import numpy as np
import pytest
import torch

from cropd.models import (
    Autoencoder,
    AutoencoderSpec,
    BackboneSpec,
    CheckpointError,
    FeatureBackbone,
    FrozenModelError,
    HeadSpec,
    LinearHead,
    ModelError,
    ShapeMismatchError,
    decode,
    encode,
    foundation_forward,
    grad_check,
    head_forward,
    load_checkpoint,
    model_registry,
    project,
    read_checkpoint_manifest,
    save_checkpoint,
)
from cropd.oracles import finite_diff_grad


def test_zero_encoder_maps_to_zero():
    ae = Autoencoder.identity(3)
    with torch.no_grad():
        ae.encoder[0].weight.zero_()
    z = encode(ae, torch.randn(3, 3))
    assert z.shape == (3, 3)
    assert torch.equal(z, torch.zeros(3, 3, dtype=torch.float64))


def test_deterministic_mask_is_repeatable():
    spec = AutoencoderSpec(input_shape=(10,), mask_fraction=0.5, mask_deterministic=True)
    ae = Autoencoder.build(spec, seed=0)
    x = torch.randn(4, 10)
    assert torch.equal(encode(ae, x), encode(ae, x))
    assert int(ae.mask.sum()) == 5


def test_identity_autoencoder_reconstructs_exactly():
    ae = Autoencoder.identity(5)
    x = torch.randn(7, 5)
    assert torch.equal(decode(ae, encode(ae, x)), x.double())


def test_zero_decoder_outputs_zeros():
    ae = Autoencoder.identity(4)
    with torch.no_grad():
        ae.decoder[0].weight.zero_()
    out = decode(ae, torch.randn(2, 4))
    assert torch.equal(out, torch.zeros(2, 4, dtype=torch.float64))


def test_round_trip_keeps_image_shape():
    spec = AutoencoderSpec(input_shape=(3, 4, 4), encoder_kind="conv", latent_dim=6)
    ae = Autoencoder.build(spec, seed=1)
    x = torch.rand(2, 3, 4, 4)
    assert ae(x).shape == x.shape


def test_encoder_rejects_wrong_shape():
    with pytest.raises(ShapeMismatchError):
        encode(Autoencoder.identity(3), torch.randn(2, 4))


def test_projection_is_unit_norm():
    ae = Autoencoder.build(AutoencoderSpec(input_shape=(6,), projector_out=8), seed=0)
    v = project(ae, encode(ae, torch.randn(5, 6)))
    assert torch.allclose(v.norm(dim=1), torch.ones(5, dtype=torch.float64), atol=1e-6)


def test_projection_hand_set_weights():
    spec = AutoencoderSpec(
        input_shape=(2,),
        encoder_widths=(),
        decoder_widths=(),
        latent_dim=2,
        projector_hidden=2,
        projector_out=2,
        activation="relu",
    )
    ae = Autoencoder.build(spec, seed=0)
    with torch.no_grad():
        first, last = ae.projector[0], ae.projector[2]
        first.weight.copy_(torch.eye(2, dtype=torch.float64))
        first.bias.zero_()
        last.weight.copy_(torch.tensor([[3.0, 0.0], [4.0, 0.0]], dtype=torch.float64))
        last.bias.zero_()
    v = project(ae, torch.tensor([[1.0, 0.0]], dtype=torch.float64))
    assert torch.allclose(v, torch.tensor([[0.6, 0.8]], dtype=torch.float64), atol=1e-12)


def test_zero_projector_row_is_flagged():
    ae = Autoencoder.build(AutoencoderSpec(input_shape=(3,), latent_dim=3, projector_out=4), seed=0)
    with torch.no_grad():
        ae.projector[2].weight.zero_()
        ae.projector[2].bias.zero_()
    v, degenerate = ae.project_with_flags(torch.randn(2, 3, dtype=torch.float64))
    assert degenerate.all()
    assert torch.equal(v, torch.tensor([[1.0, 0, 0, 0], [1.0, 0, 0, 0]], dtype=torch.float64))


def test_identity_backbone_returns_inputs(identity_backbone):
    x = torch.randn(3, 4)
    assert torch.equal(foundation_forward(identity_backbone, x), x.double())


def test_foundation_forward_requires_frozen_backbone():
    backbone = FeatureBackbone.build(BackboneSpec(input_shape=(4,)), seed=0)
    with pytest.raises(ModelError):
        foundation_forward(backbone, torch.randn(2, 4))


def test_frozen_backbone_rejects_updates(random_backbone):
    before = random_backbone.get_params()
    with pytest.raises(FrozenModelError):
        random_backbone.trainable_parameters()
    with pytest.raises(FrozenModelError):
        random_backbone.set_params(before)
    after = random_backbone.get_params()
    assert all(torch.equal(before[name], after[name]) for name in before)


def test_foundation_input_gradient_matches_finite_differences(random_backbone):
    x = torch.randn(1, 4, dtype=torch.float64, generator=torch.Generator().manual_seed(0))
    x_var = x.clone().requires_grad_(True)
    foundation_forward(random_backbone, x_var).pow(2).sum().backward()

    def value(array: np.ndarray) -> float:
        with torch.no_grad():
            return float(foundation_forward(random_backbone, torch.from_numpy(array)).pow(2).sum())

    numeric = finite_diff_grad(value, x.numpy(), step=1e-3)
    analytic = x_var.grad.numpy()
    assert np.abs(analytic - numeric).max() / np.abs(analytic).max() < 1e-4


def test_zero_head_gives_uniform_probabilities():
    head = LinearHead.build(HeadSpec(feature_dim=4, num_classes=3), seed=0)
    with torch.no_grad():
        head.linear.weight.zero_()
        head.linear.bias.zero_()
    probs = head_forward(head, torch.randn(5, 4)).softmax(dim=1)
    assert probs.shape == (5, 3)
    assert torch.allclose(probs, torch.full((5, 3), 1 / 3, dtype=torch.float64))


def test_hand_set_head_is_a_sign_test():
    head = LinearHead.build(HeadSpec(feature_dim=1, num_classes=2), seed=0)
    with torch.no_grad():
        head.linear.weight.copy_(torch.tensor([[-1.0], [1.0]], dtype=torch.float64))
        head.linear.bias.zero_()
    features = torch.tensor([[-2.0], [-0.5], [0.3], [4.0]])
    predictions = head_forward(head, features).argmax(dim=1)
    assert predictions.tolist() == (features[:, 0] > 0).long().tolist()


def test_grad_check_linear_model_is_exact():
    head = LinearHead.build(HeadSpec(feature_dim=3, num_classes=1), seed=0)
    report = grad_check(head, torch.randn(2, 3), lambda out: out.sum(), tol=1e-8)
    assert report.passed
    assert report.max_rel_err < 1e-8


def test_grad_check_two_layer_mlp():
    backbone = FeatureBackbone.build(BackboneSpec(input_shape=(3,), hidden_widths=(5,), feature_dim=2), seed=0)
    x = torch.randn(2, 3, generator=torch.Generator().manual_seed(1))
    report = grad_check(backbone, x, lambda out: out.pow(2).sum(), tol=1e-4)
    assert report.passed
    assert backbone.trainable


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_grad_check_autoencoder(seed):
    spec = AutoencoderSpec(
        input_shape=(4,), encoder_widths=(5,), decoder_widths=(5,), latent_dim=3, projector_hidden=4, projector_out=2
    )
    ae = Autoencoder.build(spec, seed=seed)
    x = torch.randn(3, 4, dtype=torch.float64, generator=torch.Generator().manual_seed(seed))
    report = grad_check(ae, x, lambda out: out.pow(2).sum(), tol=1e-4)
    assert report.passed
    assert report.coordinates_checked > x.numel()


def test_grad_check_zero_tolerance_never_passes():
    head = LinearHead.build(HeadSpec(feature_dim=2, num_classes=1), seed=0)
    report = grad_check(head, torch.randn(1, 2), lambda out: out.sum(), tol=0.0)
    assert not report.passed


def test_same_seed_builds_same_weights():
    spec = AutoencoderSpec(input_shape=(6,))
    a = Autoencoder.build(spec, seed=3).get_params()
    b = Autoencoder.build(spec, seed=3).get_params()
    assert all(torch.equal(a[name], b[name]) for name in a)


def test_checkpoint_restores_frozen_autoencoder(tmp_path):
    spec = AutoencoderSpec(input_shape=(6,), mask_fraction=0.25)
    ae = Autoencoder.build(spec, seed=2).freeze()
    save_checkpoint(ae, tmp_path / "ae", seed=2, provenance={"stage": "test"})

    loaded = load_checkpoint(tmp_path / "ae")
    assert isinstance(loaded, Autoencoder)
    assert not loaded.trainable
    original, restored = ae.get_params(), loaded.get_params()
    assert all(torch.equal(original[name], restored[name]) for name in original)
    manifest = read_checkpoint_manifest(tmp_path / "ae")
    assert manifest["kind"] == "autoencoder"
    assert manifest["provenance"] == {"stage": "test"}


def test_checkpoint_missing_manifest(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path)


def test_model_registry_lists_components():
    assert set(model_registry.list_models()) >= {"autoencoder", "backbone", "head"}
    with pytest.raises(CheckpointError):
        model_registry.get_model_class("transformer")
