import math

import pytest
import torch

from cropd.attacks import ThreatModel
from cropd.data import LabeledDataset, make_separated_discrete, make_synthetic_gaussian
from cropd.evaluation import Pipeline
from cropd.models import Autoencoder, PipelineVariant
from cropd.theory import (
    InvalidWitnessParameterError,
    SingleClassError,
    TheoryError,
    check_theorem_bound,
    estimate_eta,
    estimate_lipschitz,
    proposition1_witness,
)


def constant_autoencoder(dim: int = 4) -> Autoencoder:
    ae = Autoencoder.identity(dim)
    with torch.no_grad():
        ae.encoder[0].weight.zero_()
        ae.encoder[0].bias.fill_(1.0)
    return ae.freeze()


def test_constant_encoder_has_no_margin(separable_train):
    report = estimate_eta(constant_autoencoder(), separable_train, ThreatModel.pgd10(0.5), space="latent")
    assert report.eta1 == 0.0
    assert report.eta2 == 0.0
    assert not report.margin_ok


def test_identity_encoder_on_separated_points():
    eps, d = 0.25, 2
    ds = make_separated_discrete(n=4, d=d, epsilon=eps, seed=0)
    report = estimate_eta(Autoencoder.identity(d), ds, ThreatModel.pgd10(eps), space="latent")
    assert 0.0 <= report.eta1 <= eps * math.sqrt(d) + 1e-6
    assert report.eta2 >= 2 * eps - report.eta1 - 1e-6
    assert report.sample_count == 4
    # two inputs per class: 4 self pairs, 4 clean-clean, 8 clean-adversarial
    assert report.pairs_visited == 4 + 4 + 8
    assert not report.subsampled


def test_eta_without_encoder_uses_normalized_inputs(separable_test):
    report = estimate_eta(None, separable_test, ThreatModel.fgsm(0.1))
    assert report.eta1 >= 0.0
    assert report.eta2 >= 0.0
    assert report.sample_count == len(separable_test)


def test_eta_subsamples_large_datasets(separable_train):
    report = estimate_eta(Autoencoder.identity(4), separable_train, ThreatModel.fgsm(0.1), max_samples=50, seed=3)
    assert report.subsampled
    assert report.sample_count == 50
    cross_pairs = (report.pairs_visited - 50) // 3
    assert report.pairs_visited == 50 + 3 * cross_pairs
    assert 0 < cross_pairs < 50 * 49 // 2


def test_eta_requires_two_classes():
    ds = LabeledDataset(
        inputs=torch.randn(5, 2), labels=torch.zeros(5, dtype=torch.int64), name="one-class", split="test", num_classes=2
    )
    with pytest.raises(SingleClassError):
        estimate_eta(Autoencoder.identity(2), ds, ThreatModel.fgsm(0.1))


def test_bound_with_constant_encoder_holds_for_any_kappa(separable_test, identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.VANILLA, identity_backbone, linear_head, constant_autoencoder())
    for kappa in (0.0, 2.5):
        report = check_theorem_bound(pipe, separable_test, ThreatModel.pgd10(0.5), kappa=kappa, lipschitz_pairs=8)
        assert report.lhs == pytest.approx(report.clean_ce, abs=1e-12)
        assert report.holds_at_kappa
        assert report.kappa_supplied
    half = len(separable_test) // 2
    assert report.lcon == pytest.approx(math.log(2 * half - 2), abs=1e-9)


def test_zero_kappa_fails_on_fragile_pipeline(separable_test, identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    report = check_theorem_bound(pipe, separable_test, ThreatModel.pgd10(0.5), kappa=0.0)
    assert report.lhs > report.clean_ce
    assert not report.holds_at_kappa


def test_fitted_kappa_holds_on_calibration(separable_test, identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    report = check_theorem_bound(pipe, separable_test, ThreatModel.pgd10(0.5), seed=1)
    assert not report.degenerate
    assert report.kappa_fitted >= 0.0
    assert report.holds_on_calibration
    assert report.calibration.n == len(separable_test) // 2
    assert report.M_hat >= report.lhs
    assert report.lipschitz["L_en"] == 1.0


def test_bound_with_single_sample_batches_stays_finite(separable_test, identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    report = check_theorem_bound(pipe, separable_test, ThreatModel.fgsm(0.1), seed=2, batch_size=1, lipschitz_pairs=8)
    whole = check_theorem_bound(pipe, separable_test, ThreatModel.fgsm(0.1), seed=2, batch_size=2, lipschitz_pairs=8)
    assert math.isfinite(report.lcon)
    assert report.lcon == pytest.approx(whole.lcon)
    assert report.calibration.n == len(separable_test) // 2
    assert math.isfinite(report.calibration.lcon)


def test_bound_rejects_invalid_inputs(separable_test, identity_backbone, linear_head):
    pipe = Pipeline(PipelineVariant.IDENTITY, identity_backbone, linear_head)
    with pytest.raises(TheoryError):
        check_theorem_bound(pipe, separable_test, ThreatModel.fgsm(0.1), kappa=-1.0)
    with pytest.raises(TheoryError):
        check_theorem_bound(pipe, separable_test.subset([0, 1, 2]), ThreatModel.fgsm(0.1))


def test_lipschitz_of_linear_map_lies_within_singular_values():
    ds = make_synthetic_gaussian(n=50, d=2, k=2, separation=2.0, seed=0)
    matrix = torch.diag(torch.tensor([3.0, 1.0], dtype=torch.float64))
    estimate = estimate_lipschitz(lambda x: x.to(torch.float64) @ matrix, ds, 64, ThreatModel.pgd10(0.1))
    assert estimate.upper <= 3.0 + 1e-9
    assert estimate.lower >= 1.0 - 1e-9
    assert estimate.pairs_used + estimate.pairs_skipped == 64


def test_lipschitz_of_identity_and_constant_maps():
    ds = make_synthetic_gaussian(n=30, d=3, k=2, separation=2.0, seed=1)
    identity = estimate_lipschitz(lambda x: x, ds, 20, ThreatModel.fgsm(0.1))
    assert identity.upper == pytest.approx(1.0, abs=1e-12)
    assert identity.lower == pytest.approx(1.0, abs=1e-12)

    constant = estimate_lipschitz(lambda x: torch.zeros(x.shape[0], 2, dtype=torch.float64), ds, 20, ThreatModel.fgsm(0.1))
    assert constant.upper == 0.0
    assert constant.lower == 0.0

    with pytest.raises(TheoryError):
        estimate_lipschitz(lambda x: x, ds, 0, ThreatModel.fgsm(0.1))


def test_witness_reconstruction_and_cross_entropy():
    report = proposition1_witness(n=100, d=2, delta=1e-3)
    assert report.epsilon == pytest.approx(0.1)
    assert report.clean_recon == 0.0
    assert report.adv_recon <= 2 / 100
    assert report.adv_recon <= report.recon_bound
    assert abs(report.clean_ce - (-math.log(1 - 1e-3))) < 1e-9
    assert report.clean_ce == pytest.approx(1.0005e-3, rel=1e-4)
    assert report.adv_ce >= -math.log(1e-3) - 1e-9
    assert report.adv_ce == pytest.approx(6.9078, abs=1e-4)
    assert report.gap >= report.gap_bound - 1e-9


def test_witness_in_two_norm():
    report = proposition1_witness(n=16, d=3, epsilon=0.2, delta=0.01, p="2")
    assert report.clean_recon == 0.0
    assert report.adv_recon <= 0.2**2 + 1e-12
    assert report.gap >= math.log(0.99 / 0.01) - 1e-9


def test_witness_gap_vanishes_near_half():
    report = proposition1_witness(n=25, d=2, delta=0.4999)
    assert 0.0 <= report.gap < 1e-3


@pytest.mark.parametrize("delta", [0.0, 0.5, 0.7])
def test_witness_rejects_invalid_delta(delta):
    with pytest.raises(InvalidWitnessParameterError):
        proposition1_witness(n=10, d=2, delta=delta)
