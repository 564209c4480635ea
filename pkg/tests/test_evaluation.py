import math

import numpy as np
import pytest
import torch

from cropd.attacks import ThreatModel
from cropd.evaluation import (
    DEFAULT_REPEATS,
    EmptyCorrectnessError,
    EvaluationError,
    Pipeline,
    PipelineConfigurationError,
    PipelineShapeError,
    bootstrap_ci,
    evaluate,
    pipeline_forward,
    transfer_evaluate,
)
from cropd.losses import cross_entropy
from cropd.models import (
    Autoencoder,
    AutoencoderSpec,
    BackboneSpec,
    FeatureBackbone,
    HeadSpec,
    LinearHead,
    PipelineVariant,
)
from cropd.oracles import binomial_half_width, finite_diff_grad


def axis_head() -> LinearHead:
    """Scores class c by input coordinate c, which separates the fixture clusters."""
    head = LinearHead.build(HeadSpec(4, 2), seed=0)
    with torch.no_grad():
        head.linear.weight.copy_(torch.eye(2, 4, dtype=torch.float64))
        head.linear.bias.zero_()
    return head.freeze()


def constant_head(bias=(0.0, 1.0)) -> LinearHead:
    head = LinearHead.build(HeadSpec(4, 2), seed=0)
    with torch.no_grad():
        head.linear.weight.zero_()
        head.linear.bias.copy_(torch.tensor(bias, dtype=torch.float64))
    return head.freeze()


def test_pipeline_rejects_inconsistent_components(identity_backbone, linear_head):
    with pytest.raises(PipelineConfigurationError):
        Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head, Autoencoder.identity(4))
    with pytest.raises(PipelineConfigurationError):
        Pipeline(PipelineVariant.CROPD, identity_backbone, linear_head)
    with pytest.raises(PipelineShapeError):
        Pipeline(PipelineVariant.VANILLA, identity_backbone, linear_head, Autoencoder.identity(3))
    with pytest.raises(PipelineShapeError):
        Pipeline(PipelineVariant.IDENTITY, identity_backbone, LinearHead.build(HeadSpec(5, 2), seed=0))


def test_pipeline_rejects_trainable_backbone(linear_head):
    backbone = FeatureBackbone.build(BackboneSpec(input_shape=(4,), kind="identity"), seed=0)
    with pytest.raises(PipelineConfigurationError):
        Pipeline(PipelineVariant.IDENTITY, backbone, linear_head)


def test_pipeline_rejects_wrong_input_shape(identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    with pytest.raises(PipelineShapeError):
        pipeline_forward(pipe, torch.zeros(2, 3))


def test_identity_pipeline_is_head_of_features(identity_backbone, linear_head, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    x = separable_test.inputs[:16]
    assert torch.equal(pipe(x), linear_head(identity_backbone(x)))


def test_identity_autoencoder_matches_identity_pipeline(identity_backbone, identity_autoencoder, linear_head, separable_test):
    plain = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    wrapped = Pipeline(PipelineVariant.VANILLA, identity_backbone, linear_head, identity_autoencoder)
    x = separable_test.inputs
    assert (plain(x) - wrapped(x)).abs().max().item() <= 1e-12


def test_end_to_end_gradient_matches_finite_differences(random_backbone):
    spec = AutoencoderSpec(
        input_shape=(4,), encoder_widths=(6,), decoder_widths=(6,), latent_dim=3, projector_hidden=8, projector_out=4
    )
    pipe = Pipeline(
        PipelineVariant.CROPD,
        random_backbone,
        LinearHead.build(HeadSpec(6, 3), seed=1).freeze(),
        Autoencoder.build(spec, seed=2).freeze(),
    )
    x = torch.randn(2, 4, dtype=torch.float64, generator=torch.Generator().manual_seed(0))
    y = torch.tensor([0, 2])
    x_var = x.clone().requires_grad_(True)
    (analytic,) = torch.autograd.grad(cross_entropy(pipeline_forward(pipe, x_var), y), x_var)

    def value(array: np.ndarray) -> float:
        with torch.no_grad():
            return cross_entropy(pipeline_forward(pipe, torch.from_numpy(array)), y).item()

    numeric = finite_diff_grad(value, x.numpy())
    rel_err = np.abs(analytic.numpy() - numeric).max() / max(np.abs(numeric).max(), 1e-12)
    assert rel_err < 1e-4


def test_vanishing_budget_keeps_clean_accuracy(identity_backbone, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, axis_head())
    attack = ThreatModel.pgd10(1e-12)
    result = evaluate(pipe, separable_test, [attack], bootstrap_repeats=100)
    assert result.robust_acc["pgd10"] == result.clean_acc
    assert result.clean_acc >= 0.95
    assert result.budget_violations == {"pgd10": 0}


def test_evaluation_result_layout(identity_backbone, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, axis_head())
    attacks = [ThreatModel.fgsm(0.5), ThreatModel.pgd10(0.5)]
    result = evaluate(pipe, separable_test, attacks, batch_size=64, bootstrap_repeats=200)
    assert result.n == len(separable_test)
    assert set(result.per_sample_correct) == {"clean", "fgsm", "pgd10"}
    assert result.attack_budget == attacks[0]
    for name, (lo, hi) in result.ci.items():
        assert lo <= result.accuracy(name) <= hi
    assert result.robust_acc["pgd10"] <= result.clean_acc


def test_stronger_pgd_is_not_weaker(identity_backbone, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, axis_head())
    result = evaluate(pipe, separable_test, [ThreatModel.pgd10(1.5), ThreatModel.pgd20(1.5)], bootstrap_repeats=100)
    assert result.robust_acc["pgd20"] <= result.robust_acc["pgd10"] + 0.01


@pytest.mark.parametrize("seed", range(5))
def test_stronger_pgd_stays_within_sampling_error(separable_test, seed):
    spec = BackboneSpec(input_shape=(4,), hidden_widths=(8,), feature_dim=6, kind="random")
    backbone = FeatureBackbone.build(spec, seed=seed).freeze()
    head = LinearHead.build(HeadSpec(6, 2), seed=seed + 100).freeze()
    pipe = Pipeline(PipelineVariant.IDENTITY, backbone, head)
    epsilon = 0.25 * (seed + 1)
    attacks = [ThreatModel.pgd10(epsilon), ThreatModel.pgd20(epsilon)]
    result = evaluate(pipe, separable_test, attacks, bootstrap_repeats=100)
    assert result.robust_acc["pgd20"] <= result.robust_acc["pgd10"] + binomial_half_width(0.5, result.n)


def test_constant_head_accuracy_is_class_frequency(identity_backbone, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, constant_head())
    frequency = (separable_test.labels == 1).double().mean().item()
    result = evaluate(pipe, separable_test, [ThreatModel.pgd10(2.0)], bootstrap_repeats=100)
    assert result.clean_acc == pytest.approx(frequency)
    assert result.robust_acc["pgd10"] == pytest.approx(frequency)


def test_duplicate_attack_names_are_rejected(identity_backbone, separable_test):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, axis_head())
    with pytest.raises(EvaluationError):
        evaluate(pipe, separable_test, [ThreatModel.fgsm(0.1), ThreatModel.fgsm(0.2)])


def test_bootstrap_of_all_correct_vector():
    assert bootstrap_ci(np.ones(50, dtype=bool)) == (1.0, 1.0, 1.0)


def test_bootstrap_half_width_matches_binomial_approximation():
    coin = np.arange(10_000) % 2
    mean, lo, hi = bootstrap_ci(coin, seed=0)
    expected = binomial_half_width(0.5, 10_000)
    assert mean == 0.5
    assert expected == pytest.approx(0.0098, abs=1e-4)
    assert abs((hi - lo) / 2 - expected) <= 0.3 * expected


def test_bootstrap_half_width_shrinks_with_sample_size():
    widths = []
    for n in (100, 400, 1600):
        _, lo, hi = bootstrap_ci(np.arange(n) % 10 != 0, seed=1)
        widths.append((hi - lo) / 2)
    for smaller, larger in zip(widths[1:], widths[:-1]):
        assert smaller / larger == pytest.approx(0.5, rel=0.3)


def test_bootstrap_is_deterministic_and_ordered():
    rng = np.random.default_rng(7)
    correct = rng.random(300) < 0.7
    first = bootstrap_ci(correct, repeats=500, seed=3)
    assert first == bootstrap_ci(correct, repeats=500, seed=3)
    mean, lo, hi = first
    assert lo <= mean <= hi
    assert DEFAULT_REPEATS == 1000


def test_bootstrap_errors():
    with pytest.raises(EmptyCorrectnessError):
        bootstrap_ci(np.array([], dtype=bool))
    with pytest.raises(EvaluationError):
        bootstrap_ci(np.ones(10), repeats=99)


def test_transfer_requires_matching_input_shape(identity_backbone, separable_test):
    with pytest.raises(PipelineShapeError):
        transfer_evaluate(Autoencoder.identity(3).freeze(), separable_test, identity_backbone, axis_head(), [])


def test_identity_autoencoder_transfer_matches_in_domain(identity_backbone, separable_test):
    head = axis_head()
    attacks = [ThreatModel.fgsm(0.5)]
    in_domain = evaluate(Pipeline(PipelineVariant.IDENTITY, identity_backbone, head), separable_test, attacks, bootstrap_repeats=100)
    transferred = transfer_evaluate(
        Autoencoder.identity(4).freeze(),
        separable_test,
        identity_backbone,
        head,
        attacks,
        variant=PipelineVariant.VANILLA,
        bootstrap_repeats=100,
    )
    assert abs(transferred.clean_acc - in_domain.clean_acc) <= 0.02
    assert math.isfinite(transferred.robust_acc["fgsm"])
