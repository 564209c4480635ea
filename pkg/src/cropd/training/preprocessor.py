import logging
from typing import Optional

from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import AugmentationPolicy, LabeledDataset
from cropd.losses.loss_types import DEFAULT_TEMPERATURE
from cropd.models.autoencoder import Autoencoder
from cropd.models.model_types import AutoencoderSpec, PipelineVariant
from cropd.training.history import TrainHistory
from cropd.training.trainer import Trainer
from cropd.training.training_types import StepOutput, TrainConfig
from cropd.training.variant_registry import variant_registry

logger = logging.getLogger(__name__)


def train_preprocessor(
    spec: AutoencoderSpec,
    ds: LabeledDataset,
    variant: PipelineVariant,
    lambda_or_gamma: float,
    tm: ThreatModel,
    cfg: TrainConfig,
    tau: float = DEFAULT_TEMPERATURE,
    aug: Optional[AugmentationPolicy] = None,
    history: Optional[TrainHistory] = None,
    debug: bool = False,
) -> tuple[Autoencoder, TrainHistory]:
    """
    Train a pre-processing auto-encoder with the variant's objective.

    Only `ds.inputs` is read: labels are ignored and no foundation model is
    involved. Vanilla uses the reconstruction loss, CRoPD adds lambda times the
    FGSM adversarial contrastive loss, ARAE adds gamma times the adversarial
    reconstruction loss.

    Returns:
        tuple: (frozen Autoencoder, TrainHistory)

    Raises:
        UnsupportedVariantError: For the Identity variant
        TrainingDivergedError: If the loss becomes NaN
    """
    objective = variant_registry.get_objective(PipelineVariant(variant))
    ae = Autoencoder.build(spec, cfg.seed)
    ae.train()
    inputs = ds.inputs

    def step(index, epoch, step_no):
        aug_seed = cfg.seed * 1_000_003 + epoch * 10_007 + step_no
        loss, terms = objective(ae, inputs[index], lambda_or_gamma, tm, tau, aug, aug_seed)
        return StepOutput(loss=loss, terms=dict(terms))

    history = Trainer(cfg, f"train-preproc[{PipelineVariant(variant).value}]", debug=debug).fit(
        ae.trainable_parameters(), len(ds), step, history
    )
    logger.info("Pre-processor %s trained for %d epochs", PipelineVariant(variant).value, len(history))
    return ae.freeze(), history
