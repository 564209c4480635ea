"""Threat model A(x): the set of permissible adversarial perturbations."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Literal, Optional

from cropd.attacks.exceptions import InvalidThreatModelError

Norm = Literal["inf", "2"]

EPS_LOW_RES = Fraction(8, 255)
EPS_HIGH_RES = Fraction(4, 255)
ROBUST_HEAD_STEP_SIZE = 0.007


@dataclass(frozen=True)
class ThreatModel:
    """
    Attack budget and step schedule.

    Attributes:
        p: Norm of the ball, "inf" or "2"
        epsilon: Radius of the ball in input units
        steps: Number of gradient steps (1 for FGSM)
        step_size: Length of each step
        clamp_range: Optional (lo, hi) box applied after every step
        name: Key under which robust accuracy is reported
    """

    p: Norm
    epsilon: float
    steps: int = 1
    step_size: Optional[float] = None
    clamp_range: Optional[tuple[float, float]] = None
    name: str = "attack"

    def __post_init__(self) -> None:
        p = str(self.p)
        if p in ("inf", "infinity", "linf"):
            p = "inf"
        if p not in ("inf", "2"):
            raise InvalidThreatModelError(f"Unsupported norm '{self.p}'; use 'inf' or '2'")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self.step_size is None:
            object.__setattr__(self, "step_size", self.epsilon)
        object.__setattr__(self, "step_size", float(self.step_size))

        if not self.epsilon > 0:
            raise InvalidThreatModelError(f"epsilon must be positive, got {self.epsilon}")
        if not self.step_size > 0:
            raise InvalidThreatModelError(f"step_size must be positive, got {self.step_size}")
        if self.steps < 1:
            raise InvalidThreatModelError(f"steps must be at least 1, got {self.steps}")
        if self.clamp_range is not None:
            lo, hi = (float(v) for v in self.clamp_range)
            if lo >= hi:
                raise InvalidThreatModelError(f"clamp_range must satisfy lo < hi, got {self.clamp_range}")
            object.__setattr__(self, "clamp_range", (lo, hi))

    @classmethod
    def fgsm(cls, epsilon: float, p: Norm = "inf", clamp_range: Optional[tuple[float, float]] = None) -> "ThreatModel":
        """Single step of length epsilon."""
        return cls(p=p, epsilon=epsilon, steps=1, step_size=epsilon, clamp_range=clamp_range, name="fgsm")

    @classmethod
    def pgd10(cls, epsilon: float, p: Norm = "inf", clamp_range: Optional[tuple[float, float]] = None) -> "ThreatModel":
        """Ten steps of epsilon/5."""
        return cls(p=p, epsilon=epsilon, steps=10, step_size=epsilon / 5, clamp_range=clamp_range, name="pgd10")

    @classmethod
    def pgd20(cls, epsilon: float, p: Norm = "inf", clamp_range: Optional[tuple[float, float]] = None) -> "ThreatModel":
        """Twenty steps of epsilon/10."""
        return cls(p=p, epsilon=epsilon, steps=20, step_size=epsilon / 10, clamp_range=clamp_range, name="pgd20")

    @classmethod
    def robust_head(cls, epsilon: float, p: Norm = "inf", clamp_range: Optional[tuple[float, float]] = None) -> "ThreatModel":
        """PGD-10 with the fixed 0.007 step used for robust head training."""
        return cls(
            p=p,
            epsilon=epsilon,
            steps=10,
            step_size=ROBUST_HEAD_STEP_SIZE,
            clamp_range=clamp_range,
            name="robust_head",
        )

    @classmethod
    def preset(cls, name: str, epsilon: float, p: Norm = "inf", clamp_range: Optional[tuple[float, float]] = None) -> "ThreatModel":
        """Build a named preset: fgsm, pgd10, pgd20 or robust_head."""
        factories = {
            "fgsm": cls.fgsm,
            "pgd10": cls.pgd10,
            "pgd20": cls.pgd20,
            "robust_head": cls.robust_head,
        }
        if name not in factories:
            raise InvalidThreatModelError(f"Unknown attack preset '{name}'")
        return factories[name](epsilon, p=p, clamp_range=clamp_range)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "p": self.p,
            "epsilon": self.epsilon,
            "steps": self.steps,
            "step_size": self.step_size,
            "clamp_range": list(self.clamp_range) if self.clamp_range else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ThreatModel":
        clamp = data.get("clamp_range")
        return cls(
            p=data["p"],
            epsilon=data["epsilon"],
            steps=data.get("steps", 1),
            step_size=data.get("step_size"),
            clamp_range=tuple(clamp) if clamp else None,
            name=data.get("name", "attack"),
        )
