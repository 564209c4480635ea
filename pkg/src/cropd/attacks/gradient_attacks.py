import logging
from typing import Callable

import torch

from cropd.attacks.exceptions import AttackError
from cropd.attacks.threat_model import ThreatModel

logger = logging.getLogger(__name__)

LossFn = Callable[[torch.Tensor], torch.Tensor]

FEASIBILITY_TOL = 1e-6


def _rows(t: torch.Tensor) -> torch.Tensor:
    """View a batch as (batch, features); tensors of rank <= 1 are one sample."""
    if t.dim() <= 1:
        return t.reshape(1, -1)
    return t.reshape(t.shape[0], -1)


def _row_norms(t: torch.Tensor) -> torch.Tensor:
    """Per-sample 2-norms broadcastable against `t`."""
    norms = _rows(t).norm(dim=1)
    if t.dim() <= 1:
        return norms.reshape(())
    return norms.reshape(-1, *([1] * (t.dim() - 1)))


def perturbation_norms(x_adv: torch.Tensor, x: torch.Tensor, p: str) -> torch.Tensor:
    """Per-sample p-norm of x_adv - x."""
    delta = _rows(x_adv - x)
    if p == "inf":
        return delta.abs().amax(dim=1)
    return delta.norm(dim=1)


def within_budget(x_adv: torch.Tensor, x: torch.Tensor, tm: ThreatModel, tol: float = FEASIBILITY_TOL) -> torch.Tensor:
    """Per-sample feasibility of x_adv under `tm`, including the clamp box."""
    ok = perturbation_norms(x_adv, x, tm.p) <= tm.epsilon + tol
    if tm.clamp_range is not None:
        lo, hi = tm.clamp_range
        rows = _rows(x_adv)
        ok = ok & (rows >= lo - tol).all(dim=1) & (rows <= hi + tol).all(dim=1)
    return ok


def project_onto_ball(x_adv: torch.Tensor, x: torch.Tensor, tm: ThreatModel) -> torch.Tensor:
    """
    Project x_adv onto the epsilon-ball around x, then into the clamp box.

    Entries that are already feasible are returned bit-for-bit.

    Raises:
        AttackError: If x_adv and x differ in shape
    """
    if x_adv.shape != x.shape:
        raise AttackError(f"Shape mismatch: x_adv {tuple(x_adv.shape)} vs x {tuple(x.shape)}")

    delta = x_adv - x
    if tm.p == "inf":
        inside = delta.abs() <= tm.epsilon
        projected = torch.where(inside, x_adv, x + delta.clamp(-tm.epsilon, tm.epsilon))
    else:
        norms = _row_norms(delta)
        inside = norms <= tm.epsilon
        scale = tm.epsilon / torch.where(inside, torch.ones_like(norms), norms)
        projected = torch.where(inside, x_adv, x + delta * scale)

    if tm.clamp_range is not None:
        projected = projected.clamp(*tm.clamp_range)
    return projected


def _input_gradient(loss_of: LossFn, x: torch.Tensor) -> torch.Tensor:
    x_var = x.detach().clone().requires_grad_(True)
    with torch.enable_grad():
        value = loss_of(x_var)
        if not value.requires_grad:
            return torch.zeros_like(x)
        (grad,) = torch.autograd.grad(value, x_var, allow_unused=True)
    if grad is None:
        return torch.zeros_like(x)
    return grad.detach()


def gradient_step(loss_of: LossFn, x_cur: torch.Tensor, x: torch.Tensor, step_size: float, tm: ThreatModel) -> torch.Tensor:
    """One ascent step from x_cur, projected onto the ball around x."""
    grad = _input_gradient(loss_of, x_cur)
    if tm.p == "inf":
        direction = grad.sign()
    else:
        norms = _row_norms(grad)
        direction = grad / torch.where(norms == 0, torch.ones_like(norms), norms)
    return project_onto_ball(x_cur + step_size * direction, x, tm)


def fgsm(loss_of: LossFn, x: torch.Tensor, tm: ThreatModel) -> torch.Tensor:
    """
    Fast gradient sign method.

    Args:
        loss_of: Differentiable map from an input batch to a scalar to maximize
        x: Clean inputs
        tm: Threat model; only p, epsilon and clamp_range are used

    Returns:
        torch.Tensor: x + epsilon * sign(grad) for p=inf, or along the unit
            gradient for p=2, projected into A(x). A zero gradient leaves x unchanged.
    """
    x = x.detach()
    return gradient_step(loss_of, x, x, tm.epsilon, tm).detach()


def pgd(loss_of: LossFn, x: torch.Tensor, tm: ThreatModel) -> torch.Tensor:
    """
    Projected gradient ascent starting at x (no random start).

    Runs `tm.steps` steps of length `tm.step_size`, projecting after each.
    Only feasibility of the result is guaranteed.
    """
    x = x.detach()
    x_adv = x
    for _ in range(tm.steps):
        x_adv = gradient_step(loss_of, x_adv, x, tm.step_size, tm)
    return x_adv.detach()


def run_attack(loss_of: LossFn, x: torch.Tensor, tm: ThreatModel) -> torch.Tensor:
    """Dispatch to fgsm for single-step models and pgd otherwise."""
    if tm.steps == 1 and tm.step_size == tm.epsilon:
        return fgsm(loss_of, x, tm)
    return pgd(loss_of, x, tm)
