from cropd.attacks.threat_model import ThreatModel, EPS_LOW_RES, EPS_HIGH_RES, ROBUST_HEAD_STEP_SIZE
from cropd.attacks.gradient_attacks import (
    project_onto_ball,
    fgsm,
    pgd,
    gradient_step,
    run_attack,
    perturbation_norms,
    within_budget,
)
from cropd.attacks.exceptions import AttackError, InvalidThreatModelError

__all__ = [
    "ThreatModel",
    "EPS_LOW_RES",
    "EPS_HIGH_RES",
    "ROBUST_HEAD_STEP_SIZE",
    "project_onto_ball",
    "fgsm",
    "pgd",
    "gradient_step",
    "run_attack",
    "perturbation_norms",
    "within_budget",
    "AttackError",
    "InvalidThreatModelError",
]
