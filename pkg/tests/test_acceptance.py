"""Desk-scale acceptance experiments; deselected unless run with `-m slow`."""

from pathlib import Path

import numpy as np
import pytest

from cropd.evaluation import bootstrap_ci
from cropd.oracles import binomial_half_width
from cropd.runner import ResultsRecord, run_experiment

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
TABLE1 = ("identity", "vanilla", "cropd", "arae")
ORDERING_SEEDS = (0, 1, 2)
BOUND_SEEDS = (0, 1, 2, 3, 4)
TOLERANCE = 0.02


@pytest.fixture(scope="module")
def output_root(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def table1(output_root) -> dict[str, ResultsRecord]:
    seeds = list(BOUND_SEEDS)
    return {
        name: run_experiment(CONFIGS / "table1" / f"{name}.json", [f"output_dir={output_root}", f"seeds={seeds}"])
        for name in TABLE1
    }


def median_over(record: ResultsRecord, metric: str, seeds=ORDERING_SEEDS) -> float:
    return float(np.median([run.eval_result.accuracy(metric) for run in record.seeds if run.seed in seeds]))


def test_cropd_is_more_robust_than_vanilla(table1):
    cropd = median_over(table1["cropd"], "pgd10")
    vanilla = median_over(table1["vanilla"], "pgd10")
    assert cropd >= vanilla + 0.10


def test_stronger_attack_never_helps(table1):
    for record in table1.values():
        for run in record.seeds:
            result = run.eval_result
            assert result.accuracy("pgd20") <= result.accuracy("pgd10") + binomial_half_width(0.5, result.n)


def test_bound_holds_on_held_out_halves(table1):
    outcomes = [run.bound["holds_at_kappa"] for record in table1.values() for run in record.seeds]
    assert len(outcomes) == 20
    assert sum(outcomes) >= 19


def test_trained_cropd_encoder_has_a_margin(table1):
    margins = [run.eta["margin_ok"] for run in table1["cropd"].seeds if run.seed in ORDERING_SEEDS]
    assert sum(margins) >= 2


def test_zero_backbone_access_across_variants(table1):
    for record in table1.values():
        assert all(run.foundation_queries_during_preprocessing == 0 for run in record.seeds)


def test_lambda_trades_clean_for_robust_accuracy(output_root):
    sweep = [
        run_experiment(CONFIGS / "lambda_sweep" / f"cropd_lambda_{lam}.json", [f"output_dir={output_root}"])
        for lam in ("0", "0.1", "1", "10")
    ]
    robust = [median_over(record, "pgd10") for record in sweep]
    clean = [median_over(record, "clean") for record in sweep]
    for weaker, stronger in zip(robust, robust[1:]):
        assert stronger >= weaker - TOLERANCE
    assert clean[-1] <= clean[0] + TOLERANCE


def test_transferred_cropd_beats_transferred_vanilla(output_root):
    overrides = [f"output_dir={output_root}", "seeds=[0, 1, 2]"]
    cropd = run_experiment(CONFIGS / "transfer.json", overrides)
    vanilla = run_experiment(CONFIGS / "transfer.json", overrides + ["variant=Vanilla"])
    assert median_over(cropd, "pgd10") > median_over(vanilla, "pgd10")


def test_bootstrap_interval_coverage():
    rng = np.random.default_rng(0)
    covered = 0
    for trial in range(1000):
        correct = rng.random(1000) < 0.9
        _, lo, hi = bootstrap_ci(correct, repeats=1000, seed=trial)
        covered += lo <= 0.9 <= hi
    assert 0.92 <= covered / 1000 <= 0.98
