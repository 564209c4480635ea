import torch

from cropd.losses.exceptions import LossError
from cropd.models.autoencoder import Autoencoder


def squared_error(reconstruction: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of per-sample squared L2 distances."""
    diff = (reconstruction - target.to(reconstruction.dtype)).reshape(target.shape[0], -1)
    return diff.pow(2).sum(dim=1).mean()


def reconstruction_loss(ae: Autoencoder, X: torch.Tensor) -> torch.Tensor:
    """
    Batch mean of |f_de(f_en(x)) - x|^2.

    Raises:
        LossError: If the batch is empty
    """
    if X.shape[0] == 0:
        raise LossError("reconstruction_loss needs a non-empty batch")
    return squared_error(ae(X), X)
