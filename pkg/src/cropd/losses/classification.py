import torch

from cropd.losses.exceptions import InvalidLabelError


def cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """
    Mean of -log softmax(logits)[y].

    Args:
        logits: (batch, K) scores
        labels: (batch,) integer labels in [0, K)

    Raises:
        InvalidLabelError: If a label is out of range or the shapes disagree
    """
    if logits.dim() != 2 or labels.shape != (logits.shape[0],):
        raise InvalidLabelError(
            f"Expected (batch, K) logits and (batch,) labels, got {tuple(logits.shape)} and {tuple(labels.shape)}"
        )
    num_classes = logits.shape[1]
    labels = labels.long()
    if labels.numel() and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidLabelError(f"Labels must lie in [0, {num_classes})")
    true_logits = logits.gather(1, labels.unsqueeze(1)).squeeze(1)
    return (torch.logsumexp(logits, dim=1) - true_logits).mean()
