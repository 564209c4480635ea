import logging
from typing import Optional

from cropd.data.dataset_types import LabeledDataset
from cropd.losses.classification import cross_entropy
from cropd.models.backbone import FeatureBackbone
from cropd.models.head import LinearHead
from cropd.models.model_types import BackboneSpec, HeadSpec
from cropd.training.history import TrainHistory
from cropd.training.trainer import Trainer
from cropd.training.training_types import StepOutput, TrainConfig

logger = logging.getLogger(__name__)


def pretrain_foundation(
    spec: BackboneSpec,
    ds: LabeledDataset,
    cfg: TrainConfig,
    history: Optional[TrainHistory] = None,
    debug: bool = False,
) -> FeatureBackbone:
    """
    Clean supervised pre-training of the feature backbone, then freeze it.

    A temporary linear head is trained jointly and discarded. Random and
    identity backbones skip training and are frozen as built.

    Args:
        spec: Backbone architecture
        ds: Pre-training split (clean data only)
        cfg: Optimizer settings; cfg.seed also seeds the weights
        history: Optional history receiving one record per epoch
        debug: Verbose per-epoch logging

    Returns:
        FeatureBackbone: Frozen backbone

    Raises:
        TrainingDivergedError: If the loss becomes NaN
    """
    backbone = FeatureBackbone.build(spec, cfg.seed)
    if spec.kind != "trained":
        logger.info("Backbone kind '%s' needs no pre-training", spec.kind)
        return backbone.freeze()

    head = LinearHead.build(HeadSpec(backbone.feature_dim, ds.num_classes, dtype=spec.dtype), cfg.seed + 1)
    backbone.train()

    def step(index, epoch, step_no):
        logits = head(backbone(ds.inputs[index]))
        loss = cross_entropy(logits, ds.labels[index])
        return StepOutput(loss=loss, terms={"total": loss.item(), "cross_entropy": loss.item()})

    parameters = [*backbone.trainable_parameters(), *head.trainable_parameters()]
    Trainer(cfg, "pretrain", debug=debug).fit(parameters, len(ds), step, history)
    backbone.forward_calls = 0
    return backbone.freeze()
