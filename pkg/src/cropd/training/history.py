from pathlib import Path
from typing import Optional

import pandas as pd

from cropd.training.training_types import EpochRecord


class TrainHistory:
    """Per-epoch training records of one stage"""

    def __init__(self, stage: str = "") -> None:
        self.stage = stage
        self._records: list[EpochRecord] = []

    def add_record(self, record: EpochRecord) -> None:
        """
        Append the record of a completed epoch

        Args:
            record: Epoch means; epochs must be appended in order
        """
        self._records.append(record)

    def get_records(self) -> list[EpochRecord]:
        """Get all epoch records"""
        return self._records

    def get_last_record(self) -> Optional[EpochRecord]:
        """Get the most recent epoch record, or None before the first epoch"""
        return self._records[-1] if self._records else None

    def __len__(self) -> int:
        return len(self._records)

    def column(self, term: str) -> list[Optional[float]]:
        """Values of one loss term across epochs"""
        return [record.terms.get(term) for record in self._records]

    def window_trend_fraction(self, term: str = "total", window: int = 10) -> float:
        """
        Share of trailing windows whose last value is <= their first value.

        Returns 1.0 when the history is shorter than one window.
        """
        values = [v for v in self.column(term) if v is not None]
        starts = range(0, len(values) - window + 1)
        if not starts:
            return 1.0
        good = sum(1 for s in starts if values[s + window - 1] <= values[s])
        return good / len(starts)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([record.to_row() for record in self._records])

    def to_csv(self, path: str | Path) -> Path:
        """Write history.csv-style output (epoch, loss terms, grad norm, ...)"""
        path = Path(path)
        self.to_frame().to_csv(path, index=False)
        return path
