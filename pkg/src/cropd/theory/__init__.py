from cropd.theory.theory_types import (
    EtaReport,
    LipschitzEstimate,
    BoundMeasurement,
    BoundReport,
    WitnessReport,
    EmbeddingSpace,
)
from cropd.theory.eta import estimate_eta
from cropd.theory.bound import check_theorem_bound
from cropd.theory.lipschitz import estimate_lipschitz
from cropd.theory.witness import proposition1_witness, BrittleLookupClassifier
from cropd.theory.exceptions import TheoryError, SingleClassError, InvalidWitnessParameterError

__all__ = [
    "EtaReport",
    "LipschitzEstimate",
    "BoundMeasurement",
    "BoundReport",
    "WitnessReport",
    "EmbeddingSpace",
    "estimate_eta",
    "check_theorem_bound",
    "estimate_lipschitz",
    "proposition1_witness",
    "BrittleLookupClassifier",
    "TheoryError",
    "SingleClassError",
    "InvalidWitnessParameterError",
]
