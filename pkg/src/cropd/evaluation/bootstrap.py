import numpy as np

from cropd.evaluation.exceptions import EmptyCorrectnessError, EvaluationError

DEFAULT_REPEATS = 1000
_MAX_DRAWS_PER_CHUNK = 2_000_000


def bootstrap_ci(correct: np.ndarray, repeats: int = DEFAULT_REPEATS, seed: int = 0) -> tuple[float, float, float]:
    """
    Percentile bootstrap of a correctness vector.

    Each repeat resamples the vector with replacement to its full length;
    the interval is the 2.5/97.5 percentile of the resampled means.

    Args:
        correct: 0/1 (or bool) per-sample correctness
        repeats: Number of resamples, at least 100
        seed: Seed of the resampling generator

    Returns:
        tuple: (mean, lo, hi) with lo <= mean <= hi

    Raises:
        EmptyCorrectnessError: If the vector is empty
        EvaluationError: If repeats < 100
    """
    values = np.asarray(correct, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptyCorrectnessError("bootstrap_ci needs a non-empty correctness vector")
    if repeats < 100:
        raise EvaluationError(f"repeats must be at least 100, got {repeats}")

    n = values.size
    rng = np.random.default_rng(seed)
    chunk = max(1, _MAX_DRAWS_PER_CHUNK // n)
    means = np.empty(repeats)
    for start in range(0, repeats, chunk):
        stop = min(repeats, start + chunk)
        draws = rng.integers(0, n, size=(stop - start, n))
        means[start:stop] = values[draws].mean(axis=1)

    mean = float(values.mean())
    lo, hi = np.percentile(means, [2.5, 97.5])
    return mean, min(float(lo), mean), max(float(hi), mean)
