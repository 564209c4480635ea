import logging
from typing import Callable

import torch

from cropd.attacks.gradient_attacks import gradient_step, project_onto_ball
from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import LabeledDataset
from cropd.theory.exceptions import TheoryError
from cropd.theory.theory_types import LipschitzEstimate
from cropd.utils.seeding import torch_generator

logger = logging.getLogger(__name__)


def _flat64(t: torch.Tensor) -> torch.Tensor:
    return t.reshape(t.shape[0], -1).to(torch.float64)


def _perturbed_partners(
    fn: Callable[[torch.Tensor], torch.Tensor], x: torch.Tensor, tm: ThreatModel, generator: torch.Generator
) -> torch.Tensor:
    """Points of A(x) reached by PGD on |fn(x') - fn(x)|^2 from a random start."""
    noise = torch.rand(x.shape, generator=generator, dtype=torch.float64).to(x.dtype) * 2 - 1
    if tm.p == "2":
        noise = noise / noise.reshape(x.shape[0], -1).norm(dim=1).clamp_min(1e-12).reshape(-1, *([1] * (x.dim() - 1)))
    start = project_onto_ball(x + 0.5 * tm.epsilon * noise, x, tm)
    with torch.no_grad():
        target = fn(x).detach()

    def distance(x_prime: torch.Tensor) -> torch.Tensor:
        return (fn(x_prime) - target).pow(2).sum()

    x_adv = start
    for _ in range(tm.steps):
        x_adv = gradient_step(distance, x_adv, x, tm.step_size, tm)
    return x_adv.detach()


def estimate_lipschitz(
    fn: Callable[[torch.Tensor], torch.Tensor],
    ds: LabeledDataset,
    pair_budget: int,
    tm: ThreatModel,
    seed: int = 0,
) -> LipschitzEstimate:
    """
    Sampled extremes of |fn(a) - fn(b)| / |a - b| in the 2-norm.

    Half of the budget draws random pairs of dataset inputs; the rest pairs
    inputs with adversarially perturbed copies inside A(x). The sampled maximum
    lower-bounds the true Lipschitz constant. Coincident pairs are skipped.

    Raises:
        TheoryError: If pair_budget < 1
    """
    if pair_budget < 1:
        raise TheoryError(f"pair_budget must be at least 1, got {pair_budget}")
    generator = torch_generator(seed)
    n = len(ds)

    random_pairs = pair_budget // 2 if n >= 2 else 0
    perturbed_pairs = pair_budget - random_pairs

    first = torch.randint(0, n, (random_pairs,), generator=generator)
    second = torch.randint(0, n, (random_pairs,), generator=generator)
    anchors = ds.inputs[torch.randint(0, n, (perturbed_pairs,), generator=generator)]

    left = [ds.inputs[first], anchors]
    right = [ds.inputs[second], _perturbed_partners(fn, anchors, tm, generator)]
    a = torch.cat(left)
    b = torch.cat(right)

    with torch.no_grad():
        numerator = (_flat64(fn(a)) - _flat64(fn(b))).norm(dim=1)
    denominator = (_flat64(a) - _flat64(b)).norm(dim=1)
    usable = denominator > 0
    skipped = int((~usable).sum())
    if skipped:
        logger.warning("Skipped %d coincident pairs", skipped)

    if not usable.any():
        return LipschitzEstimate(upper=None, lower=None, pairs_used=0, pairs_skipped=skipped)
    ratios = numerator[usable] / denominator[usable]
    return LipschitzEstimate(
        upper=float(ratios.max()),
        lower=float(ratios.min()),
        pairs_used=int(usable.sum()),
        pairs_skipped=skipped,
    )
