from dataclasses import asdict, dataclass, field
from typing import Any, Literal, Optional

EmbeddingSpace = Literal["projector", "latent"]


@dataclass(frozen=True)
class EtaReport:
    """
    Empirical robustness margin of an encoder.

    eta1 is the largest clean-to-adversarial embedding distance of one input;
    eta2 the smallest cross-class distance over clean-clean and clean-adversarial
    pairs. The robust regime needs eta2 > eta1.
    `pairs_visited` counts the distances actually taken: one per input for
    eta1, one per unordered cross-class clean pair and one per ordered
    cross-class clean-adversarial pair.
    """

    eta1: float
    eta2: float
    margin_ok: bool
    sample_count: int
    pairs_visited: int
    space: EmbeddingSpace = "projector"
    subsampled: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Largest and smallest sampled |fn(a) - fn(b)| / |a - b|"""

    upper: Optional[float]
    lower: Optional[float]
    pairs_used: int
    pairs_skipped: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BoundMeasurement:
    """Left side, clean loss and contrastive loss on one split"""

    lhs: float
    clean_ce: float
    lcon: float
    n: int


@dataclass
class BoundReport:
    """
    Empirical check of adversarial CE <= clean CE + kappa * contrastive loss.

    `lhs`, `clean_ce` and `lcon` are measured on the held-out half; the
    calibration half fits kappa (unless supplied). `degenerate` is set when the
    calibration contrastive loss is not positive, in which case no ratio is
    formed and kappa_fitted is 0.
    """

    lhs: float
    clean_ce: float
    lcon: float
    kappa_fitted: float
    holds_at_kappa: bool
    M_hat: float
    lipschitz: dict[str, Optional[float]]
    calibration: BoundMeasurement
    holds_on_calibration: bool
    kappa_supplied: bool = False
    degenerate: bool = False
    constants: dict[str, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class WitnessReport:
    """Measured losses of the brittle-classifier counterexample"""

    n: int
    d: int
    epsilon: float
    delta: float
    p: str
    clean_recon: float
    adv_recon: float
    recon_bound: float
    clean_ce: float
    adv_ce: float
    gap: float
    gap_bound: float
    gamma: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
