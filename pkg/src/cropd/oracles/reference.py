"""
Reference implementations used to check the vectorized code paths.

Everything here works on plain numpy arrays with explicit loops and shares no
code with the packages it checks.
"""

import math
from typing import Callable

import numpy as np

from cropd.data.dataset_types import LabeledDataset


def naive_contrastive(anchors, positives, tau: float) -> float:
    """
    Mean over pairs of -log[exp(sim(p_i, a_i)/tau) / sum_neg exp(sim(a_i, neg)/tau)],
    negatives being X u X_adv without the pair itself.
    """
    anchors = np.asarray(anchors, dtype=np.float64)
    positives = np.asarray(positives, dtype=np.float64)
    m = anchors.shape[0]
    if m < 2:
        raise ValueError("naive_contrastive needs at least two pairs")

    def sim(u, v):
        return float(np.dot(u, v) / (math.sqrt(np.dot(u, u)) * math.sqrt(np.dot(v, v))))

    total = 0.0
    for i in range(m):
        negatives = []
        for j in range(m):
            if j != i:
                negatives.append(anchors[j])
        for j in range(m):
            if j != i:
                negatives.append(positives[j])
        denominator = 0.0
        for neg in negatives:
            denominator += math.exp(sim(anchors[i], neg) / tau)
        numerator = math.exp(sim(positives[i], anchors[i]) / tau)
        total += -math.log(numerator / denominator)
    return total / m


def linear_linf_max(w, x, eps: float) -> tuple[np.ndarray, float]:
    """Maximizer and maximum of <w, x'> over the inf-ball of radius eps around x."""
    w = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    x_star = x + eps * np.sign(w)
    return x_star, float(np.dot(w, x) + eps * np.sum(np.abs(w)))


def finite_diff_grad(f: Callable[[np.ndarray], float], x, step: float = 1e-3) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_grad = grad.reshape(-1)
    for i in range(flat_x.size):
        original = flat_x[i]
        flat_x[i] = original + step
        upper = f(x)
        flat_x[i] = original - step
        lower = f(x)
        flat_x[i] = original
        flat_grad[i] = (upper - lower) / (2 * step)
    return grad


def logistic_regression_accuracy(
    train: LabeledDataset,
    test: LabeledDataset,
    epochs: int = 300,
    learning_rate: float = 0.5,
    l2: float = 1e-4,
) -> float:
    """Test accuracy of full-batch gradient-descent softmax regression."""
    x_train = train.inputs.reshape(len(train), -1).numpy().astype(np.float64)
    x_test = test.inputs.reshape(len(test), -1).numpy().astype(np.float64)
    mean = x_train.mean(axis=0)
    std = x_train.std(axis=0) + 1e-12
    x_train = (x_train - mean) / std
    x_test = (x_test - mean) / std

    k = max(train.num_classes, test.num_classes)
    y = np.eye(k)[train.labels.numpy()]
    weights = np.zeros((x_train.shape[1], k))
    bias = np.zeros(k)
    for _ in range(epochs):
        logits = x_train @ weights + bias
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        error = (probs - y) / x_train.shape[0]
        weights -= learning_rate * (x_train.T @ error + l2 * weights)
        bias -= learning_rate * error.sum(axis=0)
    predictions = (x_test @ weights + bias).argmax(axis=1)
    return float((predictions == test.labels.numpy()).mean())


def binomial_half_width(p: float, n: int, z: float = 1.96) -> float:
    """Normal-approximation half-width z * sqrt(p (1 - p) / n)."""
    return z * math.sqrt(p * (1 - p) / n)
