"""Contrastive view augmentation for vector and image-like batches."""

import math

import torch
import torch.nn.functional as F

from cropd.data.dataset_types import AugmentationPolicy
from cropd.data.exceptions import InvalidDatasetParameterError
from cropd.utils.seeding import torch_generator


def augment(x: torch.Tensor, policy: AugmentationPolicy, seed: int) -> torch.Tensor:
    """
    Apply the policy to a batch, deterministically given `seed`.

    Image-like batches (n, c, h, w) get resized crops, horizontal flips, colour
    jitter and grayscale, then are clamped to [0, 1]. Vector batches (n, d) get
    the analogous window crop, feature-order flip, scale jitter and mean fill.

    Args:
        x: Batch of inputs
        policy: Augmentation settings; a disabled policy returns `x` itself
        seed: Seed for every random draw

    Returns:
        torch.Tensor: Augmented batch with the shape of `x`
    """
    if not torch.isfinite(x).all():
        raise InvalidDatasetParameterError("augment requires finite inputs")
    if not policy.enabled:
        return x

    generator = torch_generator(seed)
    if x.dim() == 4:
        return _augment_images(x, policy, generator)
    if x.dim() == 2:
        return _augment_vectors(x, policy, generator)
    raise InvalidDatasetParameterError(f"Cannot augment tensor of shape {tuple(x.shape)}")


def _draw(n: int, generator: torch.Generator, dtype: torch.dtype) -> torch.Tensor:
    return torch.rand(n, generator=generator, dtype=torch.float64).to(dtype)


def _augment_images(x: torch.Tensor, policy: AugmentationPolicy, generator: torch.Generator) -> torch.Tensor:
    n, c, h, w = x.shape
    out = x

    if policy.crop_fraction < 1.0:
        crops = []
        for i in range(n):
            scale = policy.crop_fraction + (1.0 - policy.crop_fraction) * _draw(1, generator, torch.float64).item()
            ch = max(1, min(h, round(h * math.sqrt(scale))))
            cw = max(1, min(w, round(w * math.sqrt(scale))))
            top = int(torch.randint(0, h - ch + 1, (1,), generator=generator).item())
            left = int(torch.randint(0, w - cw + 1, (1,), generator=generator).item())
            patch = out[i : i + 1, :, top : top + ch, left : left + cw]
            crops.append(F.interpolate(patch, size=(h, w), mode="bilinear", align_corners=False))
        out = torch.cat(crops, dim=0)

    if policy.flip_prob > 0:
        flip = (_draw(n, generator, torch.float64) < policy.flip_prob).view(n, 1, 1, 1)
        out = torch.where(flip, out.flip(-1), out)

    if policy.jitter_strength > 0:
        s = policy.jitter_strength
        apply = (_draw(n, generator, torch.float64) < policy.jitter_prob).to(out.dtype).view(n, 1, 1, 1)
        brightness = (1 - s + 2 * s * _draw(n, generator, out.dtype)).view(n, 1, 1, 1)
        contrast = (1 - s + 2 * s * _draw(n, generator, out.dtype)).view(n, 1, 1, 1)
        saturation = (1 - s + 2 * s * _draw(n, generator, out.dtype)).view(n, 1, 1, 1)
        jittered = out * brightness
        mean = jittered.mean(dim=(1, 2, 3), keepdim=True)
        jittered = (jittered - mean) * contrast + mean
        gray = jittered.mean(dim=1, keepdim=True)
        jittered = (jittered - gray) * saturation + gray
        out = apply * jittered + (1 - apply) * out

    if policy.grayscale_prob > 0:
        gray_mask = (_draw(n, generator, torch.float64) < policy.grayscale_prob).view(n, 1, 1, 1)
        out = torch.where(gray_mask, out.mean(dim=1, keepdim=True).expand(-1, c, -1, -1), out)

    return out.clamp(0.0, 1.0)


def _augment_vectors(x: torch.Tensor, policy: AugmentationPolicy, generator: torch.Generator) -> torch.Tensor:
    n, d = x.shape
    out = x

    if policy.crop_fraction < 1.0:
        width = max(1, math.ceil(policy.crop_fraction * d))
        starts = torch.randint(0, d - width + 1, (n,), generator=generator)
        positions = torch.arange(d).unsqueeze(0)
        keep = (positions >= starts.unsqueeze(1)) & (positions < (starts + width).unsqueeze(1))
        out = out * keep.to(out.dtype)

    if policy.flip_prob > 0:
        flip = (_draw(n, generator, torch.float64) < policy.flip_prob).view(n, 1)
        out = torch.where(flip, out.flip(-1), out)

    if policy.jitter_strength > 0:
        s = policy.jitter_strength
        apply = (_draw(n, generator, torch.float64) < policy.jitter_prob).to(out.dtype).view(n, 1)
        scale = (1 - s + 2 * s * _draw(n, generator, out.dtype)).view(n, 1)
        noise = torch.randn(n, d, generator=generator, dtype=torch.float64).to(out.dtype)
        out = apply * (out * scale + 0.1 * s * noise) + (1 - apply) * out

    if policy.grayscale_prob > 0:
        fill = (_draw(n, generator, torch.float64) < policy.grayscale_prob).view(n, 1)
        out = torch.where(fill, out.mean(dim=1, keepdim=True).expand(-1, d), out)

    return out
