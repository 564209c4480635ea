from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleReport:
    """Agreement between an implementation and a reference computation"""

    name: str
    max_abs_err: float
    max_rel_err: float
    trials: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_abs_err <= self.tol or self.max_rel_err <= self.tol

    @classmethod
    def compare(cls, name: str, actual, expected, tol: float, trials: int = 1) -> "OracleReport":
        """Build a report from paired arrays of values."""
        a = np.asarray(actual, dtype=np.float64).reshape(-1)
        e = np.asarray(expected, dtype=np.float64).reshape(-1)
        abs_err = float(np.max(np.abs(a - e))) if a.size else 0.0
        scale = max(float(np.max(np.abs(a))) if a.size else 0.0, float(np.max(np.abs(e))) if e.size else 0.0)
        rel_err = abs_err / scale if scale > 0 else 0.0
        return cls(name=name, max_abs_err=abs_err, max_rel_err=rel_err, trials=trials, tol=tol)
