"""Experiment result records and their on-disk form."""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
import shortuuid

from cropd import __version__
from cropd.evaluation.evaluation_types import EvalResult
from cropd.runner.artifact_store import read_json, write_json
from cropd.runner.exceptions import RunnerError
from cropd.utils.serialization import sha256_hex

RESULTS_JSON = "results.json"
RESULTS_CSV = "results.csv"
CSV_COLUMNS = ["variant", "lambda", "attack", "acc", "ci_lo", "ci_hi", "seed"]


@dataclass
class SeedRun:
    """
    Outputs of the full pipeline for one seed.

    `histories` maps a training stage to its history.csv; `stage_status` maps
    every stage that ran to "done" or "cached".
    """

    seed: int
    eval_result: EvalResult
    stage_keys: dict[str, Optional[str]]
    eta: Optional[dict[str, Any]] = None
    bound: Optional[dict[str, Any]] = None
    histories: dict[str, str] = field(default_factory=dict)
    foundation_queries_during_preprocessing: int = 0
    stage_status: dict[str, str] = field(default_factory=dict)

    def content(self) -> dict[str, Any]:
        """Fields that depend only on the configuration and the seed."""
        return {
            "seed": self.seed,
            "eval": self.eval_result.to_dict(),
            "stage_keys": self.stage_keys,
            "eta": self.eta,
            "bound": self.bound,
            "foundation_queries_during_preprocessing": self.foundation_queries_during_preprocessing,
        }

    def to_dict(self) -> dict[str, Any]:
        return {**self.content(), "histories": dict(self.histories), "stage_status": dict(self.stage_status)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SeedRun":
        return cls(
            seed=int(data["seed"]),
            eval_result=EvalResult.from_dict(data["eval"]),
            stage_keys=dict(data["stage_keys"]),
            eta=data.get("eta"),
            bound=data.get("bound"),
            histories=dict(data.get("histories", {})),
            foundation_queries_during_preprocessing=int(data.get("foundation_queries_during_preprocessing", 0)),
            stage_status=dict(data.get("stage_status", {})),
        )


@dataclass
class ResultsRecord:
    """Everything one `run_experiment` call produced"""

    config_hash: str
    config: dict[str, Any]
    name: str
    variant: str
    weight: float
    head_mode: str
    seeds: list[SeedRun]
    output_dir: str = ""
    wall_clock_sec: float = 0.0
    tool_version: str = __version__
    run_id: str = field(default_factory=shortuuid.uuid)
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def metrics(self) -> list[str]:
        """"clean" followed by the attack names, in evaluation order."""
        if not self.seeds:
            return []
        return ["clean", *self.seeds[0].eval_result.robust_acc.keys()]

    def median_accuracy(self, metric: str) -> tuple[float, float]:
        """
        Median over seeds of accuracy and of CI half-width.

        Returns:
            tuple: (accuracy, half_width)
        """
        accuracies = [run.eval_result.accuracy(metric) for run in self.seeds]
        half_widths = [(run.eval_result.ci[metric][1] - run.eval_result.ci[metric][0]) / 2 for run in self.seeds]
        return float(np.median(accuracies)), float(np.median(half_widths))

    def content_hash(self) -> str:
        """Hash of the deterministic content, excluding ids, timing and cache status."""
        return sha256_hex(
            {
                "config_hash": self.config_hash,
                "tool_version": self.tool_version,
                "seeds": [run.content() for run in self.seeds],
            }
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "config_hash": self.config_hash,
            "config": self.config,
            "name": self.name,
            "variant": self.variant,
            "weight": self.weight,
            "head_mode": self.head_mode,
            "output_dir": self.output_dir,
            "wall_clock_sec": self.wall_clock_sec,
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "content_hash": self.content_hash(),
            "seeds": [run.to_dict() for run in self.seeds],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ResultsRecord":
        try:
            return cls(
                config_hash=data["config_hash"],
                config=data["config"],
                name=data["name"],
                variant=data["variant"],
                weight=float(data["weight"]),
                head_mode=data["head_mode"],
                seeds=[SeedRun.from_dict(run) for run in data["seeds"]],
                output_dir=data.get("output_dir", ""),
                wall_clock_sec=float(data.get("wall_clock_sec", 0.0)),
                tool_version=data.get("tool_version", __version__),
                run_id=data["run_id"],
                created_at=data["created_at"],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise RunnerError(f"Malformed results record: {str(e)}")

    def to_frame(self) -> pd.DataFrame:
        """One row per seed and metric, with the results.csv columns."""
        rows = []
        for run in self.seeds:
            for metric in ["clean", *run.eval_result.robust_acc.keys()]:
                lo, hi = run.eval_result.ci[metric]
                rows.append(
                    {
                        "variant": self.variant,
                        "lambda": self.weight,
                        "attack": metric,
                        "acc": run.eval_result.accuracy(metric),
                        "ci_lo": lo,
                        "ci_hi": hi,
                        "seed": run.seed,
                    }
                )
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def save(self, directory: str | Path) -> Path:
        """Write results.json and results.csv into `directory`."""
        target = Path(directory)
        write_json(target / RESULTS_JSON, self.to_dict())
        self.to_frame().to_csv(target / RESULTS_CSV, index=False)
        return target / RESULTS_JSON


def load_results(path: str | Path) -> ResultsRecord:
    """Read a results.json file, or the one inside a directory."""
    target = Path(path)
    if target.is_dir():
        target = target / RESULTS_JSON
    return ResultsRecord.from_dict(read_json(target))


@dataclass
class SuiteFailure:
    """A configuration of a suite that did not produce a record"""

    config_path: str
    error: str
    error_type: str
    stage: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"config_path": self.config_path, "error": self.error, "error_type": self.error_type, "stage": self.stage}
