"""Empirical check of the adversarial cross-entropy bound."""

import logging
import math
from typing import Optional

import torch

from cropd.attacks.gradient_attacks import pgd
from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import LabeledDataset
from cropd.evaluation.pipeline import Pipeline, pipeline_forward
from cropd.losses.classification import cross_entropy
from cropd.losses.contrastive import batch_contrastive_loss
from cropd.losses.loss_types import DEFAULT_TEMPERATURE, ContrastiveBatch
from cropd.theory.embeddings import contrastive_attack_objective, embedding_fn, unit_rows
from cropd.theory.exceptions import TheoryError
from cropd.theory.lipschitz import estimate_lipschitz
from cropd.theory.theory_types import BoundMeasurement, BoundReport
from cropd.utils.seeding import torch_generator
from cropd.utils.serialization import finite_or_none

logger = logging.getLogger(__name__)

M_HEADROOM = 1.1
HOLDS_RTOL = 1e-9
# Contrastive loss needs negatives, so every chunk holds at least two inputs.
MIN_CHUNK = 2


def _per_sample_ce(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    return torch.logsumexp(logits, dim=1) - logits.gather(1, labels.unsqueeze(1)).squeeze(1)


def _holds(lhs: float, clean_ce: float, kappa: float, lcon: float) -> bool:
    rhs = clean_ce + kappa * lcon
    return lhs <= rhs + HOLDS_RTOL * max(1.0, abs(rhs))


class _SplitStats:
    def __init__(self) -> None:
        self.clean_ce: list[torch.Tensor] = []
        self.adv_ce: list[torch.Tensor] = []
        self.lcon_weighted = 0.0
        self.count = 0
        self.similarities: list[torch.Tensor] = []
        self.negative_mass: list[torch.Tensor] = []

    def measurement(self) -> BoundMeasurement:
        return BoundMeasurement(
            lhs=float(torch.cat(self.adv_ce).mean()),
            clean_ce=float(torch.cat(self.clean_ce).mean()),
            lcon=self.lcon_weighted / self.count,
            n=self.count,
        )


def _measure(pipe: Pipeline, ds: LabeledDataset, tm: ThreatModel, tau: float, batch_size: int) -> _SplitStats:
    embed = embedding_fn(pipe.autoencoder, "projector")
    stats = _SplitStats()
    chunks = max(1, len(ds) // max(batch_size, MIN_CHUNK))
    for index in torch.tensor_split(torch.arange(len(ds)), chunks):
        x, y = ds.inputs[index], ds.labels[index]
        with torch.no_grad():
            stats.clean_ce.append(_per_sample_ce(pipeline_forward(pipe, x), y))
        x_adv = pgd(lambda x_prime: cross_entropy(pipeline_forward(pipe, x_prime), y), x, tm)
        with torch.no_grad():
            stats.adv_ce.append(_per_sample_ce(pipeline_forward(pipe, x_adv), y))
            anchors = embed(x)

        x_con = pgd(contrastive_attack_objective(embed, anchors, tau), x, tm)
        with torch.no_grad():
            a = unit_rows(anchors)
            positives = unit_rows(embed(x_con))
            lcon = batch_contrastive_loss(ContrastiveBatch(a, positives, tau))
            stats.lcon_weighted += float(lcon) * x.shape[0]
            stats.count += x.shape[0]

            m = a.shape[0]
            sims = a @ torch.cat([a, positives]).T
            excluded = torch.zeros_like(sims, dtype=torch.bool)
            excluded[torch.arange(m), torch.arange(m)] = True
            excluded[torch.arange(m), torch.arange(m) + m] = True
            stats.similarities.append((a * positives).sum(dim=1))
            stats.negative_mass.append(sims.exp().masked_fill(excluded, 0.0).sum(dim=1))
    return stats


def _analytic_constants(
    similarities: torch.Tensor, negative_mass: torch.Tensor, M: float, C: Optional[float]
) -> dict[str, Optional[float]]:
    """Empirical proxies of the closed-form constants, using observed similarities."""
    t = similarities
    below_one = t[t < 1 - 1e-12]
    c_sqrt = float((1 - below_one).sqrt().max()) if below_one.numel() else None
    c_log = float(1 / (torch.log1p(torch.exp(-t)) / torch.exp(-t)).min())
    log_product = negative_mass.log() - t
    c_m = float((torch.log1p(torch.exp(-t)) / log_product).max()) if bool((log_product > 0).all()) else None

    m_c = None
    if C is not None and M < 700:
        m_c = finite_or_none(C * math.exp(M))
    factors = [m_c, c_sqrt, c_log, c_m]
    kappa = math.sqrt(2) * math.prod(factors) if all(f is not None for f in factors) else None
    return {
        "C": C,
        "M": M,
        "M_C": m_c,
        "C_sqrt": c_sqrt,
        "C_log": c_log,
        "C_M": c_m,
        "kappa_analytic": finite_or_none(kappa) if kappa is not None else None,
    }


def _lipschitz_constants(pipe: Pipeline, ds: LabeledDataset, tm: ThreatModel, pairs: int, seed: int) -> dict[str, Optional[float]]:
    ae = pipe.autoencoder
    if ae is None:
        return {"L_en": 1.0, "l_en": 1.0, "L_rec": 1.0, "L_de_z": 1.0}
    encoder = estimate_lipschitz(ae.encode, ds, pairs, tm, seed)
    reconstruction = estimate_lipschitz(ae, ds, pairs, tm, seed)
    l_en = encoder.lower
    L_rec = reconstruction.upper
    L_de_z = L_rec / l_en if L_rec is not None and l_en else None
    return {"L_en": encoder.upper, "l_en": l_en, "L_rec": L_rec, "L_de_z": finite_or_none(L_de_z) if L_de_z else None}


def check_theorem_bound(
    pipe: Pipeline,
    ds: LabeledDataset,
    tm: ThreatModel,
    kappa: Optional[float] = None,
    seed: int = 0,
    tau: float = DEFAULT_TEMPERATURE,
    batch_size: int = 256,
    lipschitz_pairs: int = 64,
) -> BoundReport:
    """
    Compare adversarial cross-entropy with clean CE + kappa * contrastive loss.

    The dataset is split into calibration and held-out halves by `seed`. All
    three quantities use the same threat model: the left side is the mean CE
    after PGD through the whole pipeline, the contrastive loss pairs clean
    embeddings with PGD-attacked views. Without `kappa`, the smallest kappa
    making the bound hold on the calibration half is fitted and then tested on
    the held-out half.

    Raises:
        TheoryError: If either half would have fewer than two samples
    """
    if len(ds) < 4:
        raise TheoryError("check_theorem_bound needs at least four samples")
    if kappa is not None and kappa < 0:
        raise TheoryError(f"kappa must be non-negative, got {kappa}")

    order = torch.randperm(len(ds), generator=torch_generator(seed))
    half = len(ds) // 2
    calibration_stats = _measure(pipe, ds.subset(order[:half]), tm, tau, batch_size)
    held_out_stats = _measure(pipe, ds.subset(order[half:]), tm, tau, batch_size)
    calibration = calibration_stats.measurement()
    held_out = held_out_stats.measurement()

    degenerate = False
    if kappa is None:
        if calibration.lcon > 0:
            kappa_value = max(0.0, (calibration.lhs - calibration.clean_ce) / calibration.lcon)
        else:
            logger.warning("Calibration contrastive loss %.4g is not positive; kappa not fitted", calibration.lcon)
            degenerate = True
            kappa_value = 0.0
    else:
        kappa_value = float(kappa)

    all_ce = torch.cat([*calibration_stats.clean_ce, *calibration_stats.adv_ce, *held_out_stats.clean_ce, *held_out_stats.adv_ce])
    M_hat = M_HEADROOM * float(all_ce.max())

    lipschitz = _lipschitz_constants(pipe, ds, tm, lipschitz_pairs, seed)
    constants = _analytic_constants(
        torch.cat([*calibration_stats.similarities, *held_out_stats.similarities]),
        torch.cat([*calibration_stats.negative_mass, *held_out_stats.negative_mass]),
        M_hat,
        lipschitz["L_de_z"],
    )
    lipschitz["M_C"] = constants["M_C"]

    return BoundReport(
        lhs=held_out.lhs,
        clean_ce=held_out.clean_ce,
        lcon=held_out.lcon,
        kappa_fitted=kappa_value,
        holds_at_kappa=_holds(held_out.lhs, held_out.clean_ce, kappa_value, held_out.lcon),
        M_hat=M_hat,
        lipschitz=lipschitz,
        calibration=calibration,
        holds_on_calibration=_holds(calibration.lhs, calibration.clean_ce, kappa_value, calibration.lcon),
        kappa_supplied=kappa is not None,
        degenerate=degenerate,
        constants=constants,
    )
