import math

import numpy as np
import pytest
import torch

from cropd.attacks import ThreatModel
from cropd.losses import (
    BatchTooSmallError,
    ContrastiveBatch,
    EmptyNegativesError,
    InvalidLabelError,
    LossError,
    ZeroVectorError,
    arae_objective,
    arae_terms,
    batch_contrastive_loss,
    contrastive_item_loss,
    cosine_sim,
    cropd_objective,
    cross_entropy,
    reconstruction_loss,
)
from cropd.models import Autoencoder, AutoencoderSpec
from cropd.oracles import finite_diff_grad, naive_contrastive


def t(*values):
    return torch.tensor(values, dtype=torch.float64)


def small_autoencoder(seed: int = 0) -> Autoencoder:
    spec = AutoencoderSpec(
        input_shape=(4,), encoder_widths=(6,), decoder_widths=(6,), latent_dim=3, projector_hidden=8, projector_out=4
    )
    return Autoencoder.build(spec, seed=seed)


def test_cosine_similarity_values():
    u = t(0.3, -1.2, 2.0)
    assert cosine_sim(u, u).item() == pytest.approx(1.0)
    assert cosine_sim(t(1.0, 0.0), t(0.0, 1.0)).item() == 0.0
    assert cosine_sim(t(1.0, 1.0), t(1.0, 0.0)).item() == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    v = t(-0.5, 0.4, 1.0)
    assert cosine_sim(u, v).item() == pytest.approx(cosine_sim(v, u).item(), abs=1e-15)
    assert cosine_sim(3.0 * u, 0.2 * v).item() == pytest.approx(cosine_sim(u, v).item(), abs=1e-12)


def test_cosine_similarity_rejects_zero_vector():
    with pytest.raises(ZeroVectorError):
        cosine_sim(t(0.0, 0.0), t(1.0, 0.0))


def test_item_loss_hand_value():
    loss = contrastive_item_loss(t(1.0, 0.0), t(1.0, 0.0), [t(0.0, 1.0), t(-1.0, 0.0)], tau=1.0)
    assert loss.item() == pytest.approx(-1 + math.log(1 + math.exp(-1)), abs=1e-12)
    assert loss.item() == pytest.approx(-0.68673, abs=1e-5)


def test_item_loss_high_temperature_tends_to_log_count():
    generator = torch.Generator().manual_seed(3)
    negatives = torch.randn(5, 3, generator=generator, dtype=torch.float64)
    loss = contrastive_item_loss(t(1.0, 2.0, 0.5), t(-1.0, 0.3, 0.2), negatives, tau=1e6)
    assert loss.item() == pytest.approx(math.log(5), abs=1e-5)


def test_item_loss_degenerate_embedding():
    anchor = t(0.6, 0.8)
    loss = contrastive_item_loss(anchor, anchor, anchor.repeat(7, 1), tau=1.0)
    assert loss.item() == pytest.approx(math.log(7), abs=1e-12)


def test_item_loss_errors():
    with pytest.raises(EmptyNegativesError):
        contrastive_item_loss(t(1.0, 0.0), t(1.0, 0.0), [], tau=1.0)
    with pytest.raises(EmptyNegativesError):
        contrastive_item_loss(t(1.0, 0.0), t(1.0, 0.0), torch.empty(0, 2, dtype=torch.float64), tau=1.0)
    with pytest.raises(LossError):
        contrastive_item_loss(t(1.0, 0.0), t(1.0, 0.0), [t(0.0, 1.0)], tau=0.0)


def test_batch_loss_matches_loop_on_orthonormal_rows():
    eye = torch.eye(4, dtype=torch.float64)
    anchors, positives = eye[:2], eye[2:]
    value = batch_contrastive_loss(ContrastiveBatch(anchors, positives, temperature=0.5)).item()
    assert abs(value - naive_contrastive(anchors.numpy(), positives.numpy(), 0.5)) < 1e-10


def test_batch_loss_matches_loop_on_random_batches(unit_rows_batch):
    for seed in range(100):
        m = 2 + seed % 6
        anchors = unit_rows_batch(m, 5, seed=2 * seed)
        positives = unit_rows_batch(m, 5, seed=2 * seed + 1)
        tau = 0.1 + 0.05 * (seed % 10)
        value = batch_contrastive_loss(ContrastiveBatch(anchors, positives, temperature=tau)).item()
        assert abs(value - naive_contrastive(anchors.numpy(), positives.numpy(), tau)) < 1e-8


def test_batch_loss_equals_mean_of_item_losses(unit_rows_batch):
    anchors = unit_rows_batch(4, 3, seed=10)
    positives = unit_rows_batch(4, 3, seed=11)
    rows = torch.cat([anchors, positives])
    items = []
    for i in range(4):
        keep = [j for j in range(8) if j not in (i, i + 4)]
        items.append(contrastive_item_loss(anchors[i], positives[i], rows[keep], tau=0.5))
    expected = torch.stack(items).mean().item()
    assert batch_contrastive_loss(ContrastiveBatch(anchors, positives)).item() == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("m", [2, 3, 8])
def test_batch_loss_identical_rows(m):
    rows = t(0.0, 1.0, 0.0).repeat(m, 1)
    value = batch_contrastive_loss(ContrastiveBatch(rows, rows.clone(), temperature=0.5)).item()
    assert value == pytest.approx(math.log(2 * m - 2), abs=1e-12)


def test_batch_loss_is_permutation_invariant(unit_rows_batch):
    anchors = unit_rows_batch(6, 4, seed=20)
    positives = unit_rows_batch(6, 4, seed=21)
    order = torch.tensor([3, 0, 5, 1, 4, 2])
    original = batch_contrastive_loss(ContrastiveBatch(anchors, positives)).item()
    permuted = batch_contrastive_loss(ContrastiveBatch(anchors[order], positives[order])).item()
    assert abs(original - permuted) < 1e-12


def test_contrastive_batch_validation(unit_rows_batch):
    rows = unit_rows_batch(3, 2)
    with pytest.raises(BatchTooSmallError):
        ContrastiveBatch(rows[:1], rows[:1])
    with pytest.raises(LossError):
        ContrastiveBatch(2 * rows, rows)
    with pytest.raises(LossError):
        ContrastiveBatch(rows, rows[:2])
    with pytest.raises(LossError):
        ContrastiveBatch(rows, rows, temperature=-1.0)


def test_reconstruction_of_identity_autoencoder_is_zero():
    X = torch.randn(10, 4, dtype=torch.float64)
    assert reconstruction_loss(Autoencoder.identity(4), X).item() == 0.0


def test_reconstruction_with_zero_decoder_is_mean_square():
    ae = Autoencoder.identity(3)
    with torch.no_grad():
        ae.decoder[0].weight.zero_()
    X = t(1.0, 2.0, 2.0).repeat(2, 1)
    X[1] = t(0.0, 3.0, 4.0)
    assert reconstruction_loss(ae, X).item() == pytest.approx((9.0 + 25.0) / 2)


def test_reconstruction_rejects_empty_batch():
    with pytest.raises(LossError):
        reconstruction_loss(Autoencoder.identity(3), torch.empty(0, 3, dtype=torch.float64))


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    return float(np.abs(analytic - numeric).max() / max(np.abs(numeric).max(), 1e-12))


def input_gradient_error(fn, x: torch.Tensor) -> float:
    """Max relative error of autograd against central differences of fn at x."""
    x_var = x.clone().requires_grad_(True)
    (analytic,) = torch.autograd.grad(fn(x_var), x_var)

    def value(array: np.ndarray) -> float:
        with torch.no_grad():
            return fn(torch.from_numpy(array)).item()

    return relative_error(analytic.numpy(), finite_diff_grad(value, x.numpy()))


def parameter_gradient_error(loss_of, ae: Autoencoder) -> float:
    """Same comparison over the first layer of the encoder, decoder and projector."""
    params = [ae.encoder[0].weight, ae.decoder[0].weight, ae.projector[0].weight]
    analytic = torch.autograd.grad(loss_of(), params)
    errors = []
    for param, grad in zip(params, analytic):
        saved = param.detach().clone()

        def value(array: np.ndarray) -> float:
            with torch.no_grad():
                param.copy_(torch.from_numpy(array))
            return loss_of().item()

        numeric = finite_diff_grad(value, saved.numpy())
        with torch.no_grad():
            param.copy_(saved)
        errors.append(relative_error(grad.numpy(), numeric))
    return max(errors)


def seeded_randn(seed: int, *shape: int) -> torch.Tensor:
    return torch.randn(*shape, dtype=torch.float64, generator=torch.Generator().manual_seed(seed))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_reconstruction_gradient_matches_finite_differences(seed):
    ae = small_autoencoder(seed)
    assert input_gradient_error(lambda x: reconstruction_loss(ae, x), seeded_randn(seed, 3, 4)) < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_item_loss_gradient_matches_finite_differences(seed):
    vectors = seeded_randn(seed, 5, 3)
    positive, negatives = vectors[1], vectors[2:]
    error = input_gradient_error(lambda a: contrastive_item_loss(a, positive, negatives, tau=0.5), vectors[0])
    assert error < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_batch_loss_gradient_matches_finite_differences(seed):
    positives = torch.nn.functional.normalize(seeded_randn(seed + 10, 4, 3), dim=1)

    def loss(raw_anchors: torch.Tensor) -> torch.Tensor:
        anchors = raw_anchors / raw_anchors.norm(dim=1, keepdim=True)
        return batch_contrastive_loss(ContrastiveBatch(anchors, positives, 0.5))

    assert input_gradient_error(loss, seeded_randn(seed, 4, 3)) < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cross_entropy_gradient_matches_finite_differences(seed):
    labels = torch.tensor([0, 2, 1, 2])
    assert input_gradient_error(lambda logits: cross_entropy(logits, labels), seeded_randn(seed, 4, 3)) < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cropd_objective_gradient_matches_finite_differences(seed):
    ae = small_autoencoder(seed)
    X = seeded_randn(seed, 6, 4)
    tm = ThreatModel.fgsm(1e-6)
    assert parameter_gradient_error(lambda: cropd_objective(ae, X, 1.0, tm, tau=0.5)[0], ae) < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_arae_objective_gradient_matches_finite_differences(seed):
    ae = small_autoencoder(seed)
    X = seeded_randn(seed, 6, 4)
    tm = ThreatModel.fgsm(1e-6)
    assert parameter_gradient_error(lambda: arae_objective(ae, X, 0.5, tm), ae) < 1e-4


def test_cross_entropy_values():
    assert cross_entropy(torch.zeros(4, 2, dtype=torch.float64), torch.tensor([0, 1, 1, 0])).item() == pytest.approx(
        math.log(2), abs=1e-12
    )
    assert cross_entropy(t(50.0, 0.0).reshape(1, 2), torch.tensor([0])).item() < 1e-9
    logits = torch.log(t(0.999, 0.001)).reshape(1, 2)
    assert cross_entropy(logits, torch.tensor([0])).item() == pytest.approx(-math.log(0.999), rel=1e-9)


def test_cross_entropy_is_stable_for_large_logits():
    value = cross_entropy(t(1e4, 0.0, -1e4).reshape(1, 3), torch.tensor([1])).item()
    assert value == pytest.approx(1e4)


def test_cross_entropy_rejects_bad_labels():
    with pytest.raises(InvalidLabelError):
        cross_entropy(torch.zeros(2, 3), torch.tensor([0, 3]))
    with pytest.raises(InvalidLabelError):
        cross_entropy(torch.zeros(2, 3), torch.tensor([0, -1]))
    with pytest.raises(InvalidLabelError):
        cross_entropy(torch.zeros(2, 3), torch.tensor([0]))


def test_cropd_objective_without_contrastive_term_is_reconstruction():
    ae = small_autoencoder()
    X = torch.randn(8, 4, dtype=torch.float64)
    total, terms = cropd_objective(ae, X, 0.0, ThreatModel.fgsm(0.1))
    assert abs(total.item() - reconstruction_loss(ae, X).item()) < 1e-12
    assert terms["contrastive"] is None


def test_cropd_objective_with_vanishing_budget_uses_clean_pairs():
    ae = small_autoencoder(seed=1)
    X = torch.randn(8, 4, dtype=torch.float64, generator=torch.Generator().manual_seed(5))
    total, terms = cropd_objective(ae, X, 1.0, ThreatModel.fgsm(1e-12), tau=0.5)
    embeddings = ae.embed(X).detach()
    clean = batch_contrastive_loss(ContrastiveBatch(embeddings, embeddings, 0.5)).item()
    assert abs(terms["contrastive"] - clean) < 1e-6
    assert terms["total"] == pytest.approx(terms["reconstruction"] + terms["contrastive"], abs=1e-12)
    assert terms["degenerate_rows"] == 0

    total.backward()
    assert ae.encoder[0].weight.grad is not None
    assert ae.projector[0].weight.grad is not None


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_cropd_objective_accepts_preset_weights(lam):
    total, terms = cropd_objective(small_autoencoder(), torch.randn(6, 4, dtype=torch.float64), lam, ThreatModel.fgsm(0.1))
    assert math.isfinite(total.item())
    assert terms["contrastive"] is not None


def test_cropd_objective_errors():
    ae = small_autoencoder()
    with pytest.raises(BatchTooSmallError):
        cropd_objective(ae, torch.randn(1, 4, dtype=torch.float64), 1.0, ThreatModel.fgsm(0.1))
    with pytest.raises(LossError):
        cropd_objective(ae, torch.randn(4, 4, dtype=torch.float64), -1.0, ThreatModel.fgsm(0.1))


def test_arae_objective_reduces_to_reconstruction():
    ae = small_autoencoder()
    X = torch.randn(5, 4, dtype=torch.float64)
    assert abs(arae_objective(ae, X, 0.0, ThreatModel.fgsm(0.1)).item() - reconstruction_loss(ae, X).item()) < 1e-12


def test_arae_adversarial_term_of_identity_autoencoder_is_bounded():
    eps, d = 0.1, 4
    X = torch.randn(6, d, dtype=torch.float64)
    total, terms = arae_terms(Autoencoder.identity(d), X, 0.5, ThreatModel.fgsm(eps))
    assert terms["reconstruction"] == 0.0
    assert terms["adversarial_reconstruction"] <= eps**2 * d + 1e-12
    assert total.item() == pytest.approx(0.5 * terms["adversarial_reconstruction"])


def test_arae_adversarial_term_dominates_clean_term():
    ae = small_autoencoder(seed=2)
    X = torch.randn(6, 4, dtype=torch.float64, generator=torch.Generator().manual_seed(9))
    _, terms = arae_terms(ae, X, 1.0, ThreatModel.fgsm(0.05))
    assert terms["adversarial_reconstruction"] >= terms["reconstruction"] - 1e-12
