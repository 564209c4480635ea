import logging
import math
import time
from typing import Any, Callable, Optional

import torch

from cropd.training.exceptions import TrainingDivergedError
from cropd.training.history import TrainHistory
from cropd.training.schedules import build_optimizer, build_scheduler
from cropd.training.training_types import EpochRecord, StepOutput, TrainConfig
from cropd.data.batching import batch_indices
from cropd.utils.seeding import seeded

StepFn = Callable[[torch.Tensor, int, int], StepOutput]


class Trainer:
    """Mini-batch loop shared by every training stage.

    The caller supplies a step function mapping (sample indices, epoch, step)
    to a StepOutput; the trainer owns batching, the AdamW optimizer, the
    per-epoch schedule, NaN detection and the history.
    """

    def __init__(self, cfg: TrainConfig, stage: str, debug: bool = False) -> None:
        self.cfg = cfg
        self.stage = stage
        self._debug = debug
        self._logger = logging.getLogger(__name__)

    def fit(
        self,
        parameters: list[torch.nn.Parameter],
        num_samples: int,
        step_fn: StepFn,
        history: Optional[TrainHistory] = None,
    ) -> TrainHistory:
        """
        Run `cfg.epochs` epochs over `num_samples` samples.

        Args:
            parameters: Tensors the optimizer may update
            num_samples: Dataset size
            step_fn: Forward pass of one batch
            history: Optional history to append to

        Returns:
            TrainHistory: One record per completed epoch

        Raises:
            TrainingDivergedError: If a step produces a NaN or infinite loss
        """
        history = history if history is not None else TrainHistory(self.stage)
        with seeded(self.cfg.seed):
            optimizer = build_optimizer(parameters, self.cfg)
            scheduler = build_scheduler(optimizer, self.cfg)

            for epoch in range(self.cfg.epochs):
                started = time.perf_counter()
                batch_size = self.cfg.batch_size_at(epoch)
                learning_rate = optimizer.param_groups[0]["lr"]
                batches = batch_indices(num_samples, batch_size, shuffle_seed=self.cfg.seed * 100_003 + epoch)

                sums: dict[str, float] = {}
                seen: dict[str, int] = {}
                grad_norm_sum = 0.0
                forward_batches = 0
                for step, index in enumerate(batches):
                    optimizer.zero_grad(set_to_none=True)
                    out = step_fn(index, epoch, step)
                    if not torch.isfinite(out.loss).all():
                        self._logger.warning(
                            "%s diverged at epoch %d step %d (loss=%s)", self.stage, epoch, step, out.loss.item()
                        )
                        raise TrainingDivergedError(
                            f"{self.stage}: loss became {out.loss.item()} at epoch {epoch}, step {step}; terms={out.terms}"
                        )
                    out.loss.backward()
                    grad_norm_sum += _grad_norm(parameters)
                    optimizer.step()

                    forward_batches += out.forward_batches
                    for name, value in out.terms.items():
                        if value is not None:
                            sums[name] = sums.get(name, 0.0) + value
                            seen[name] = seen.get(name, 0) + 1

                scheduler.step()
                record = EpochRecord(
                    epoch=epoch,
                    learning_rate=learning_rate,
                    batch_size=batch_size,
                    steps=len(batches),
                    terms={name: (sums[name] / seen[name] if name in seen else None) for name in _term_names(sums, out)},
                    grad_norm=grad_norm_sum / len(batches),
                    wall_clock_sec=time.perf_counter() - started,
                    forward_batches=forward_batches,
                    samples=num_samples,
                )
                history.add_record(record)
                self._debug_log(f"{self.stage} epoch {epoch}", record.terms)

        return history

    def _debug_log(self, message: str, data: Optional[Any] = None) -> None:
        """Log debug information if debug mode is enabled

        Args:
            message: Debug message to log
            data: Optional data to include in debug output
        """
        if self._debug:
            if data:
                self._logger.debug(f"{message}: {data}")
            else:
                self._logger.debug(message)


def _grad_norm(parameters: list[torch.nn.Parameter]) -> float:
    total = 0.0
    for p in parameters:
        if p.grad is not None:
            total += p.grad.detach().pow(2).sum().item()
    return math.sqrt(total)


def _term_names(sums: dict[str, float], last: StepOutput) -> list[str]:
    """Every term reported in the epoch, keeping terms that were always None."""
    return list(dict.fromkeys([*last.terms.keys(), *sums.keys()]))
