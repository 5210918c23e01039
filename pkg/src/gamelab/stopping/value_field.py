"""Evaluable value fields built from solved grids.

Queries outside the grid box are clamped onto it and counted; the count is
reported next to any stopping statistic computed from the field.
"""

import logging
import threading

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from gamelab.vi.diagnostics import default_contact_tol, interpolation_error
from gamelab.vi.grid import ValueGrid

logger = logging.getLogger(__name__)


class GridField:
    """Linear interpolant in (t, x) of one array living on a ValueGrid."""

    def __init__(self, ug: ValueGrid, data: np.ndarray):
        self.grid = ug
        self._interp = RegularGridInterpolator((ug.t_nodes, *ug.axes), data, method="linear")
        self._lo = np.array([ug.t_nodes[0]] + [a[0] for a in ug.axes])
        self._hi = np.array([ug.t_nodes[-1]] + [a[-1] for a in ug.axes])
        self._lock = threading.Lock()
        self.extrapolations = 0

    def evaluate(self, t, x) -> tuple[np.ndarray, int]:
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        tb = np.broadcast_to(np.asarray(t, dtype=float), lead)
        pts = np.concatenate([tb[..., None], x], axis=-1).reshape(-1, 1 + x.shape[-1])
        clipped = np.clip(pts, self._lo, self._hi)
        outside = int(np.count_nonzero(np.any(np.abs(clipped - pts) > 1e-12, axis=1)))
        return self._interp(clipped).reshape(lead), outside

    def __call__(self, t, x) -> np.ndarray:
        values, outside = self.evaluate(t, x)
        if outside:
            with self._lock:
                self.extrapolations += outside
        return values

    def reset_count(self) -> int:
        with self._lock:
            count, self.extrapolations = self.extrapolations, 0
        return count


class ValueField(GridField):
    """Interpolated u^gamma with its interpolated obstacle."""

    def __init__(self, ug: ValueGrid):
        super().__init__(ug, ug.u)
        self.obstacle = GridField(ug, ug.g)
        self._default_tol: float | None = None

    @property
    def gamma(self) -> float:
        return self.grid.gamma

    def interpolation_error(self) -> float:
        return interpolation_error(self.grid)

    def default_tol(self) -> float:
        """Contact tolerance used when none is configured."""
        if self._default_tol is None:
            self._default_tol = default_contact_tol(self.grid)
        return self._default_tol
