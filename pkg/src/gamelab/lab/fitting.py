"""Sweep rows, log-log rate fits and the report they feed."""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.stats import linregress

from gamelab.core.artifacts import Check
from gamelab.exceptions import DegenerateFitError

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-10
MAX_RELATIVE_SE = 0.2


@dataclass(frozen=True)
class SweepRow:
    """One sweep cell: param holds the sweep coordinates named by the report."""

    param: tuple[float, ...]
    statistic: str
    mean: float
    stderr: float = 0.0
    n: int = 1

    @property
    def fit_eligible(self) -> bool:
        return self.mean > 0 and self.stderr < MAX_RELATIVE_SE * self.mean


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float
    n_used: int

    def predict(self, x: float) -> float:
        return float(np.exp(self.intercept) * x**self.slope)

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_used": self.n_used,
        }


def fit_loglog(rows: list[SweepRow], noise_floor: float = NOISE_FLOOR) -> LogLogFit:
    """Least squares of log(mean) on log(param[0]) over eligible rows.

    Rows below noise_floor or with stderr >= 20% of the mean are left out.

    Raises:
        DegenerateFitError: fewer than two usable rows
    """
    used = [r for r in rows if r.fit_eligible and r.mean > noise_floor and r.param[0] > 0]
    if len(used) < 2:
        raise DegenerateFitError(
            f"only {len(used)} of {len(rows)} rows above the noise floor {noise_floor:g}"
        )
    x = np.log([r.param[0] for r in used])
    y = np.log([r.mean for r in used])
    if np.ptp(x) == 0:
        raise DegenerateFitError("all usable rows share one sweep parameter")
    res = linregress(x, y)
    fit = LogLogFit(float(res.slope), float(res.intercept), float(res.rvalue**2), len(used))
    logger.debug(
        "log-log fit over %d rows: slope=%.4f R^2=%.4f", len(used), fit.slope, fit.r_squared
    )
    return fit


@dataclass
class SweepReport:
    """Rows sorted by sweep parameter, an optional fit and the verdict checks."""

    name: str
    param_names: tuple[str, ...]
    rows: list[SweepRow] = field(default_factory=list)
    fit: LogLogFit | None = None
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.param, r.statistic))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, value=None, threshold=None, witness=None) -> Check:
        c = Check(name, bool(passed), value, threshold, witness)
        self.checks.append(c)
        return c

    def statistic(self, name: str) -> list[SweepRow]:
        return [r for r in self.rows if r.statistic == name]

    CSV_HEADER = ["parameter", "statistic", "mean", "stderr", "n"]

    def long_rows(self) -> list[list[Any]]:
        """Plot-ready long format: parameter, statistic, mean, stderr, n."""
        out = []
        for r in self.rows:
            label = ";".join(f"{k}={v:g}" for k, v in zip(self.param_names, r.param))
            out.append([label, r.statistic, r.mean, r.stderr, r.n])
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "param_names": list(self.param_names),
            "fit": self.fit.to_dict() if self.fit else None,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
            "passed": self.passed,
        }
