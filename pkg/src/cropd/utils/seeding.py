"""Seed plumbing shared by data generation, model construction and training."""

from contextlib import contextmanager
from typing import Generator

import torch


@contextmanager
def seeded(seed: int) -> Generator[None, None, None]:
    """Run a block with the global torch RNG forked and seeded.

    Module constructors draw their initial weights from the global generator,
    so building a model inside this block makes it a pure function of `seed`
    without disturbing the caller's RNG state.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def torch_generator(seed: int) -> torch.Generator:
    """Return a CPU generator seeded with `seed`."""
    generator = torch.Generator()
    generator.manual_seed(int(seed))
    return generator
