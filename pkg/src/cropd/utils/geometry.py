"""Exact pairwise distance helpers."""

import torch


def pairwise_distances(a: torch.Tensor, b: torch.Tensor, chunk_size: int = 256) -> torch.Tensor:
    """Euclidean distances between the rows of `a` and `b` in float64.

    Differences are formed explicitly (no Gram-matrix expansion), so the
    result is exact up to rounding of the final square root.
    """
    a = a.reshape(a.shape[0], -1).to(torch.float64)
    b = b.reshape(b.shape[0], -1).to(torch.float64)
    rows = []
    for start in range(0, a.shape[0], chunk_size):
        block = a[start : start + chunk_size]
        rows.append((block[:, None, :] - b[None, :, :]).pow(2).sum(-1).sqrt())
    return torch.cat(rows, dim=0)
