"""White-box evaluation of pipelines."""

import logging
from typing import Sequence

import torch

from cropd.attacks.gradient_attacks import run_attack, within_budget
from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import LabeledDataset
from cropd.evaluation.bootstrap import DEFAULT_REPEATS, bootstrap_ci
from cropd.evaluation.evaluation_types import EvalResult
from cropd.evaluation.exceptions import EvaluationError, PipelineShapeError
from cropd.evaluation.pipeline import Pipeline, pipeline_forward
from cropd.losses.classification import cross_entropy
from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.head import LinearHead
from cropd.models.model_types import PipelineVariant

logger = logging.getLogger(__name__)


def _set_eval(pipe: Pipeline) -> None:
    pipe.head.eval()
    pipe.foundation.eval()
    if pipe.autoencoder is not None:
        pipe.autoencoder.eval()


def _predict(pipe: Pipeline, x: torch.Tensor) -> torch.Tensor:
    with torch.no_grad():
        return pipeline_forward(pipe, x).argmax(dim=1)


def evaluate(
    pipe: Pipeline,
    ds: LabeledDataset,
    attacks: Sequence[ThreatModel],
    batch_size: int = 256,
    bootstrap_repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
) -> EvalResult:
    """
    Clean accuracy plus robust accuracy under each attack.

    Every test point is attacked with the full-pipeline cross-entropy of its
    true label as the objective, so gradients pass through the pre-processor,
    the frozen backbone and the head. Adversarial inputs are re-checked against
    their budget afterwards; failures are counted in `budget_violations`.

    Args:
        pipe: Pipeline under test
        ds: Test split
        attacks: Threat models; robust accuracies are keyed by their names
        batch_size: Evaluation batch size
        bootstrap_repeats: Resamples for each confidence interval
        seed: Bootstrap seed

    Returns:
        EvalResult: Accuracies, per-sample correctness and intervals
    """
    names = [tm.name for tm in attacks]
    if len(set(names)) != len(names):
        raise EvaluationError(f"Attack names must be unique, got {names}")
    _set_eval(pipe)

    correct: dict[str, list[torch.Tensor]] = {"clean": [], **{name: [] for name in names}}
    violations = {name: 0 for name in names}

    for start in range(0, len(ds), batch_size):
        x = ds.inputs[start : start + batch_size]
        y = ds.labels[start : start + batch_size]
        correct["clean"].append(_predict(pipe, x) == y)

        for tm in attacks:
            x_adv = run_attack(lambda x_prime: cross_entropy(pipeline_forward(pipe, x_prime), y), x, tm)
            violations[tm.name] += int((~within_budget(x_adv, x, tm)).sum())
            correct[tm.name].append(_predict(pipe, x_adv) == y)

    per_sample = {name: torch.cat(parts).numpy().astype(bool) for name, parts in correct.items()}
    ci = {}
    for name, vector in per_sample.items():
        _, lo, hi = bootstrap_ci(vector, repeats=bootstrap_repeats, seed=seed)
        ci[name] = (lo, hi)

    for name, count in violations.items():
        if count:
            logger.warning("Attack %s produced %d out-of-budget samples", name, count)

    return EvalResult(
        clean_acc=float(per_sample["clean"].mean()),
        robust_acc={name: float(per_sample[name].mean()) for name in names},
        per_sample_correct=per_sample,
        ci=ci,
        attack_budget=attacks[0] if attacks else None,
        attacks=list(attacks),
        budget_violations=violations,
    )


def transfer_evaluate(
    preproc: Autoencoder,
    target_ds: LabeledDataset,
    foundation: FeatureBackbone,
    head: LinearHead,
    attacks: Sequence[ThreatModel],
    variant: PipelineVariant = PipelineVariant.CROPD,
    **kwargs,
) -> EvalResult:
    """
    Evaluate a source-trained pre-processor transplanted in front of a
    backbone and head trained on the target dataset.

    Raises:
        PipelineShapeError: If the auto-encoder's input shape differs from the target samples
    """
    if preproc.spec.input_shape != target_ds.sample_shape:
        raise PipelineShapeError(
            f"Pre-processor was trained on {preproc.spec.input_shape} inputs, target samples are {target_ds.sample_shape}"
        )
    pipe = Pipeline(variant=variant, foundation=foundation, head=head, autoencoder=preproc)
    return evaluate(pipe, target_ds, attacks, **kwargs)
