"""Markdown tables and plot-data CSVs from result records."""

from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from cropd.models.model_types import PipelineVariant
from cropd.runner.exceptions import ReportError
from cropd.runner.results import ResultsRecord

REPORT_FILE = "report.md"
TRADEOFF_FILE = "tradeoff.csv"
BOUND_FILE = "bound.csv"

METRIC_LABELS = {
    "clean": "Natural",
    "fgsm": "FGSM",
    "pgd10": "PGD-10",
    "pgd20": "PGD-20",
    "robust_head": "PGD-10 (step 0.007)",
}
_VARIANT_ORDER = {variant.value: position for position, variant in enumerate(PipelineVariant)}


def format_cell(accuracy: float, half_width: float) -> str:
    """Accuracy with its CI half-width, e.g. "0.7346 ± 0.0196"."""
    return f"{accuracy:.4f} ± {half_width:.4f}"


def _sort_key(record: ResultsRecord) -> tuple:
    return (_VARIANT_ORDER.get(record.variant, len(_VARIANT_ORDER)), record.weight, record.head_mode, record.name, record.config_hash)


def _metrics(records: Sequence[ResultsRecord]) -> list[str]:
    metrics: list[str] = []
    for record in records:
        for metric in record.metrics():
            if metric not in metrics:
                metrics.append(metric)
    return metrics


def markdown_table(records: Sequence[ResultsRecord]) -> str:
    """One row per record (variant x weight x head mode); cells are the median over seeds."""
    ordered = sorted(records, key=_sort_key)
    metrics = _metrics(ordered)
    header = ["Variant", "λ/γ", "Head", *(METRIC_LABELS.get(m, m) for m in metrics)]
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for record in ordered:
        available = record.metrics()
        cells = [record.variant, f"{record.weight:g}", record.head_mode]
        for metric in metrics:
            cells.append(format_cell(*record.median_accuracy(metric)) if metric in available else "-")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def tradeoff_frame(records: Sequence[ResultsRecord]) -> pd.DataFrame:
    """Weight against median clean and robust accuracy, sorted by weight."""
    metrics = _metrics(records)
    rows = []
    for record in records:
        row: dict[str, Any] = {"lambda": record.weight, "variant": record.variant, "head_mode": record.head_mode}
        available = record.metrics()
        for metric in metrics:
            row[metric] = record.median_accuracy(metric)[0] if metric in available else np.nan
        rows.append(row)
    frame = pd.DataFrame(rows, columns=["lambda", "variant", "head_mode", *metrics])
    return frame.sort_values(["lambda", "variant", "head_mode"], kind="mergesort").reset_index(drop=True)


def bound_frame(records: Sequence[ResultsRecord]) -> pd.DataFrame:
    """Held-out bound sides and margin estimates per record and seed."""
    rows = []
    for record in sorted(records, key=_sort_key):
        for run in record.seeds:
            if run.bound is None:
                continue
            bound = run.bound
            eta = run.eta or {}
            rows.append(
                {
                    "variant": record.variant,
                    "lambda": record.weight,
                    "head_mode": record.head_mode,
                    "seed": run.seed,
                    "lhs": bound["lhs"],
                    "rhs": bound["clean_ce"] + bound["kappa_fitted"] * bound["lcon"],
                    "clean_ce": bound["clean_ce"],
                    "lcon": bound["lcon"],
                    "kappa": bound["kappa_fitted"],
                    "holds": bound["holds_at_kappa"],
                    "eta1": eta.get("eta1"),
                    "eta2": eta.get("eta2"),
                    "margin_ok": eta.get("margin_ok"),
                }
            )
    columns = ["variant", "lambda", "head_mode", "seed", "lhs", "rhs", "clean_ce", "lcon", "kappa", "holds", "eta1", "eta2", "margin_ok"]
    return pd.DataFrame(rows, columns=columns)


def emit_report(records: Sequence[ResultsRecord], out: str | Path) -> dict[str, Path]:
    """
    Write report.md, tradeoff.csv and bound.csv into `out`.

    Returns:
        dict: File kind ("report", "tradeoff", "bound") to path

    Raises:
        ReportError: If `records` is empty
    """
    if not records:
        raise ReportError("Cannot build a report from zero records")
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)

    paths = {
        "report": directory / REPORT_FILE,
        "tradeoff": directory / TRADEOFF_FILE,
        "bound": directory / BOUND_FILE,
    }
    seeds = sorted({run.seed for record in records for run in record.seeds})
    title = f"# Natural and robust accuracy\n\nMedian over seeds {seeds}; ± is the bootstrap 95% CI half-width.\n\n"
    paths["report"].write_text(title + markdown_table(records))
    tradeoff_frame(records).to_csv(paths["tradeoff"], index=False)
    bound_frame(records).to_csv(paths["bound"], index=False)
    return paths
