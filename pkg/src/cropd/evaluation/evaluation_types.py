from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cropd.attacks.threat_model import ThreatModel


@dataclass
class EvalResult:
    """
    Clean and robust accuracy of one pipeline on one test split.

    `per_sample_correct` is keyed by "clean" and by attack name, each a bool
    vector indexed by dataset position; `ci` maps the same keys to bootstrap
    (lo, hi) intervals.
    """

    clean_acc: float
    robust_acc: dict[str, float]
    per_sample_correct: dict[str, np.ndarray]
    ci: dict[str, tuple[float, float]]
    attack_budget: ThreatModel | None
    attacks: list[ThreatModel] = field(default_factory=list)
    budget_violations: dict[str, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.per_sample_correct["clean"].shape[0])

    def accuracy(self, metric: str) -> float:
        """Accuracy of "clean" or of a named attack."""
        return self.clean_acc if metric == "clean" else self.robust_acc[metric]

    def to_dict(self) -> dict[str, Any]:
        return {
            "clean_acc": self.clean_acc,
            "robust_acc": dict(self.robust_acc),
            "ci": {name: [lo, hi] for name, (lo, hi) in self.ci.items()},
            "attack_budget": self.attack_budget.to_dict() if self.attack_budget else None,
            "attacks": [tm.to_dict() for tm in self.attacks],
            "budget_violations": dict(self.budget_violations),
            "n": self.n,
            "per_sample_correct": {
                name: vector.astype(int).tolist() for name, vector in self.per_sample_correct.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalResult":
        """Rebuild a result written by `to_dict`."""
        budget = data.get("attack_budget")
        return cls(
            clean_acc=float(data["clean_acc"]),
            robust_acc={name: float(value) for name, value in data["robust_acc"].items()},
            per_sample_correct={
                name: np.asarray(values, dtype=bool) for name, values in data["per_sample_correct"].items()
            },
            ci={name: (float(lo), float(hi)) for name, (lo, hi) in data["ci"].items()},
            attack_budget=ThreatModel.from_dict(budget) if budget else None,
            attacks=[ThreatModel.from_dict(tm) for tm in data.get("attacks", [])],
            budget_violations={name: int(count) for name, count in data.get("budget_violations", {}).items()},
        )
