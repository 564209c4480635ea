from typing import Callable

import torch

from cropd.models.base_model import TensorModel
from cropd.models.model_types import GradCheckReport
from cropd.utils.seeding import torch_generator


def _relative_error(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    scale = max(analytic.abs().max().item(), numeric.abs().max().item())
    if scale == 0:
        return 0.0
    return (analytic - numeric).abs().max().item() / scale


def _coordinates(numel: int, max_coords: int | None, generator: torch.Generator) -> list[int]:
    if max_coords is None or numel <= max_coords:
        return list(range(numel))
    return torch.randperm(numel, generator=generator)[:max_coords].tolist()


def grad_check(
    model: TensorModel,
    x: torch.Tensor,
    scalarizer: Callable[[torch.Tensor], torch.Tensor],
    tol: float,
    step: float = 1e-3,
    max_coords: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare autograd gradients of scalarizer(model(x)) with central differences.

    Both the parameters and the input are checked. `max_coords` caps the number
    of coordinates per tensor (sampled with `seed`). Inputs sitting on ReLU
    kinks can fail spuriously; perturb them before checking. The check never
    raises on disagreement: the report's `passed` is max error < tol, so
    tol=0 always fails.

    Returns:
        GradCheckReport: Max relative errors for parameters and input
    """
    was_training = model.training
    model.eval()
    params = list(model.parameters())
    saved_flags = [p.requires_grad for p in params]
    generator = torch_generator(seed)

    try:
        for p in params:
            p.requires_grad_(True)
        x_var = model.cast_input(x).detach().clone().requires_grad_(True)
        value = scalarizer(model(x_var))
        grads = torch.autograd.grad(value, [x_var, *params], allow_unused=True)
        analytic = [torch.zeros_like(t) if g is None else g for t, g in zip([x_var, *params], grads)]

        def evaluate(inp: torch.Tensor) -> float:
            return float(scalarizer(model(inp)).item())

        checked = 0
        with torch.no_grad():
            x_plain = x_var.detach().clone()
            x_flat = x_plain.view(-1)
            numeric_x = torch.zeros_like(x_flat)
            input_coords = _coordinates(x_flat.numel(), max_coords, generator)
            for i in input_coords:
                original = x_flat[i].item()
                x_flat[i] = original + step
                upper = evaluate(x_plain)
                x_flat[i] = original - step
                lower = evaluate(x_plain)
                x_flat[i] = original
                numeric_x[i] = (upper - lower) / (2 * step)
                checked += 1
            input_err = _relative_error(analytic[0].view(-1)[input_coords], numeric_x[input_coords])

            param_errors = []
            for p, grad in zip(params, analytic[1:]):
                flat = p.data.view(-1)
                coords = _coordinates(flat.numel(), max_coords, generator)
                numeric = torch.zeros(len(coords), dtype=flat.dtype)
                for j, i in enumerate(coords):
                    original = flat[i].item()
                    flat[i] = original + step
                    upper = evaluate(x_plain)
                    flat[i] = original - step
                    lower = evaluate(x_plain)
                    flat[i] = original
                    numeric[j] = (upper - lower) / (2 * step)
                    checked += 1
                param_errors.append((grad.view(-1)[coords], numeric))

        if param_errors:
            param_err = _relative_error(
                torch.cat([a for a, _ in param_errors]), torch.cat([n for _, n in param_errors])
            )
        else:
            param_err = 0.0
    finally:
        for p, flag in zip(params, saved_flags):
            p.requires_grad_(flag)
        model.train(was_training)

    return GradCheckReport(
        max_rel_err_params=param_err,
        max_rel_err_input=input_err,
        coordinates_checked=checked,
        tol=tol,
    )
