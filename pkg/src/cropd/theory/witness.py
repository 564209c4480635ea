"""Counterexample: perfect reconstruction does not imply robust classification."""

import math
from typing import Optional

import torch

from cropd.attacks.threat_model import Norm
from cropd.data.synthetic import make_separated_discrete
from cropd.losses.reconstruction import reconstruction_loss, squared_error
from cropd.models.autoencoder import Autoencoder
from cropd.theory.exceptions import InvalidWitnessParameterError
from cropd.theory.theory_types import WitnessReport


class BrittleLookupClassifier:
    """
    Classifier that is confident on training points and wrong next to them.

    For the nearest stored point x_i (in the given norm) within `radius`:
    p(y_i | x_i) = 1 - delta at the centre and p(y_i | x) = delta anywhere else
    in the ball. Outside every ball all classes are equally likely.
    """

    def __init__(self, points: torch.Tensor, labels: torch.Tensor, delta: float, radius: float, p: Norm, num_classes: int = 2) -> None:
        self.points = points.reshape(points.shape[0], -1).to(torch.float64)
        self.labels = labels
        self.delta = delta
        self.radius = radius
        self.p = p
        self.num_classes = num_classes

    def _distances(self, x: torch.Tensor) -> torch.Tensor:
        diff = x.reshape(x.shape[0], 1, -1).to(torch.float64) - self.points.unsqueeze(0)
        if self.p == "inf":
            return diff.abs().amax(dim=2)
        return diff.norm(dim=2)

    def probabilities(self, x: torch.Tensor) -> torch.Tensor:
        distances = self._distances(x)
        nearest_distance, nearest = distances.min(dim=1)
        k = self.num_classes
        probs = torch.full((x.shape[0], k), 1.0 / k, dtype=torch.float64)
        for row, (dist, i) in enumerate(zip(nearest_distance.tolist(), nearest.tolist())):
            if dist > self.radius:
                continue
            true_prob = 1.0 - self.delta if dist == 0 else self.delta
            probs[row] = (1.0 - true_prob) / (k - 1)
            probs[row, self.labels[i]] = true_prob
        return probs

    def cross_entropy(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """Per-sample -log p(y | x)."""
        probs = self.probabilities(x)
        return -probs.gather(1, y.long().unsqueeze(1)).squeeze(1).log()


def proposition1_witness(
    n: int,
    d: int,
    epsilon: Optional[float] = None,
    delta: float = 1e-3,
    p: Norm = "inf",
    seed: int = 0,
) -> WitnessReport:
    """
    Build the separated dataset, the identity auto-encoder and the brittle
    classifier, then measure clean/adversarial reconstruction and cross-entropy.

    Each attacked point sits at half the radius from its centre: along the
    all-ones direction for p=inf, along the first axis for p=2. Every
    non-centre point of the ball is a worst case for the brittle classifier.

    Args:
        n: Number of points
        d: Dimension
        epsilon: Attack radius; defaults to 1/sqrt(n)
        delta: Confidence parameter in (0, 1/2)
        p: Norm of the threat model
        seed: Point-placement seed

    Raises:
        InvalidWitnessParameterError: For delta outside (0, 1/2) or a non-positive epsilon
    """
    if not 0 < delta < 0.5:
        raise InvalidWitnessParameterError(f"delta must lie in (0, 1/2), got {delta}")
    if n < 2 or d < 1:
        raise InvalidWitnessParameterError(f"Need n >= 2 and d >= 1, got n={n}, d={d}")
    epsilon = 1.0 / math.sqrt(n) if epsilon is None else float(epsilon)
    if not epsilon > 0:
        raise InvalidWitnessParameterError(f"epsilon must be positive, got {epsilon}")

    ds = make_separated_discrete(n, d, epsilon, seed)
    x = ds.inputs.to(torch.float64)
    ae = Autoencoder.identity(d).freeze()

    direction = torch.zeros(d, dtype=torch.float64)
    if p == "inf":
        direction[:] = 1.0
    else:
        direction[0] = 1.0
    x_adv = x + 0.5 * epsilon * direction

    classifier = BrittleLookupClassifier(x, ds.labels, delta, epsilon, p, ds.num_classes)
    with torch.no_grad():
        clean_recon = float(reconstruction_loss(ae, x))
        adv_recon = float(squared_error(ae(x_adv), x))
        clean_ce = float(classifier.cross_entropy(ae(x), ds.labels).mean())
        adv_ce = float(classifier.cross_entropy(ae(x_adv), ds.labels).mean())

    return WitnessReport(
        n=n,
        d=d,
        epsilon=epsilon,
        delta=delta,
        p=p,
        clean_recon=clean_recon,
        adv_recon=adv_recon,
        recon_bound=epsilon**2 * d if p == "inf" else epsilon**2,
        clean_ce=clean_ce,
        adv_ce=adv_ce,
        gap=adv_ce - clean_ce,
        gap_bound=math.log((1 - delta) / delta),
        gamma=adv_ce,
    )
