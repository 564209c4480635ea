import logging
from typing import Optional

from cropd.attacks.gradient_attacks import pgd
from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import LabeledDataset
from cropd.evaluation.pipeline import Pipeline, pipeline_forward
from cropd.losses.classification import cross_entropy
from cropd.models.head import LinearHead
from cropd.training.exceptions import TrainingError, UnfrozenComponentError
from cropd.training.history import TrainHistory
from cropd.training.trainer import Trainer
from cropd.training.training_types import HeadMode, StepOutput, TrainConfig

logger = logging.getLogger(__name__)


def train_head(
    pipe: Pipeline,
    ds: LabeledDataset,
    mode: HeadMode,
    tm: ThreatModel,
    cfg: TrainConfig,
    history: Optional[TrainHistory] = None,
    debug: bool = False,
) -> LinearHead:
    """
    Fit the pipeline's linear head with every upstream component frozen.

    Clean mode minimizes cross-entropy on pre-processed inputs. Robust mode
    attacks each batch with PGD-10 (step 0.007, radius and norm from `tm`)
    through the whole pipeline and trains on the natural and adversarial
    batches in equal parts.

    Returns:
        LinearHead: The pipeline's head, trained in place

    Raises:
        UnfrozenComponentError: If the auto-encoder or backbone is trainable
    """
    if pipe.foundation.trainable or (pipe.autoencoder is not None and pipe.autoencoder.trainable):
        raise UnfrozenComponentError("train_head requires a frozen pre-processor and backbone")
    if mode not in ("clean", "robust"):
        raise TrainingError(f"Unknown head mode '{mode}'")

    attack = ThreatModel.robust_head(tm.epsilon, p=tm.p, clamp_range=tm.clamp_range)
    head = pipe.head
    head.train()

    def step(index, epoch, step_no):
        x, y = ds.inputs[index], ds.labels[index]
        natural = cross_entropy(pipeline_forward(pipe, x), y)
        if mode == "clean":
            return StepOutput(loss=natural, terms={"total": natural.item(), "natural_ce": natural.item()})

        x_adv = pgd(lambda x_prime: cross_entropy(pipeline_forward(pipe, x_prime), y), x, attack)
        adversarial = cross_entropy(pipeline_forward(pipe, x_adv), y)
        loss = 0.5 * (natural + adversarial)
        return StepOutput(
            loss=loss,
            terms={"total": loss.item(), "natural_ce": natural.item(), "adversarial_ce": adversarial.item()},
            forward_batches=2,
        )

    Trainer(cfg, f"train-head[{mode}]", debug=debug).fit(head.trainable_parameters(), len(ds), step, history)
    head.eval()
    return head
