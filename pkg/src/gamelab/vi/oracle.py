"""Binomial lattice dynamic programming for pure optimal stopping.

Independent reference for one-dimensional specs with constant drift and
constant diffusion: with sigma_eff = sqrt(sigma_0^2 + gamma^2) the state
moves by +/- sigma_eff sqrt(dt) with probability p = 1/2 + b sqrt(dt) / (2 sigma_eff),
and

    V_k = max(g, e^{-r dt} (p V_{k+1}^up + (1 - p) V_{k+1}^down) + h dt).

The lattice is a fixed grid padded by n_steps nodes on each side, so
values inside [-L, L] never see the truncation.
"""

import logging
from dataclasses import dataclass

import numpy as np

from gamelab.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LatticeOracle:
    times: np.ndarray
    x: np.ndarray
    values: np.ndarray
    obstacle: np.ndarray

    def _row(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9:
            raise ConfigurationError(f"time {t} was not recorded by the oracle")
        return k

    def value(self, t: float, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.x, self.values[self._row(t)])

    def exercise_boundary(self, tol: float) -> np.ndarray:
        """Largest lattice x with V - g <= tol at each recorded time (nan if none)."""
        out = np.full(self.times.shape[0], np.nan)
        for k in range(self.times.shape[0]):
            hits = np.flatnonzero(self.values[k] - self.obstacle[k] <= tol)
            if hits.size:
                out[k] = self.x[hits.max()]
        return out


def _constant_coefficients(spec, half_width: float) -> tuple[float, float]:
    probe = np.linspace(-half_width, half_width, 7)[:, None]
    b = np.asarray(spec.b(probe), dtype=float)[:, 0]
    s = np.asarray(spec.sigma(probe), dtype=float)
    a = np.sum(s[:, 0, :] ** 2, axis=1)
    if np.ptp(b) > 1e-12 or np.ptp(a) > 1e-12:
        raise ConfigurationError("lattice oracle needs constant drift and diffusion")
    return float(b[0]), float(np.sqrt(a[0]))


def lattice_oracle(
    spec,
    gamma: float = 0.0,
    n_steps: int = 2000,
    half_width: float = 3.0,
    t0: float = 0.0,
    record_times=None,
) -> LatticeOracle:
    """Stopping values on [-half_width, half_width] at the recorded times.

    Raises:
        ConfigurationError: d != 1, non-constant coefficients or p outside [0, 1]
    """
    if spec.d != 1:
        raise ConfigurationError("lattice oracle supports d = 1 only")
    b0, sigma0 = _constant_coefficients(spec, half_width)
    sigma_eff = float(np.sqrt(sigma0**2 + gamma**2))
    if sigma_eff <= 0:
        raise ConfigurationError("lattice oracle needs positive effective volatility")
    dt = (spec.T - t0) / n_steps
    step = sigma_eff * np.sqrt(dt)
    p = 0.5 + b0 * np.sqrt(dt) / (2 * sigma_eff)
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"lattice probability {p:.4g} outside [0, 1]; add steps")

    J = int(np.ceil(half_width / step)) + n_steps + 1
    x = np.arange(-J, J + 1) * step
    keep = np.abs(x) <= half_width + step
    record_times = [t0] if record_times is None else sorted(float(t) for t in record_times)
    wanted = {int(round((t - t0) / dt)): t for t in record_times}

    t_nodes = t0 + np.arange(n_steps + 1) * dt
    disc = np.exp(-spec.r * dt)
    pts = x[:, None]
    V = np.asarray(spec.g(spec.T, pts), dtype=float)
    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    if n_steps in wanted:
        rows[n_steps] = (V[keep].copy(), V[keep].copy())
    for k in range(n_steps - 1, -1, -1):
        g = np.asarray(spec.g(t_nodes[k], pts), dtype=float)
        h = np.asarray(spec.h(t_nodes[k], pts), dtype=float)
        cont = np.empty_like(V)
        cont[1:-1] = disc * (p * V[2:] + (1 - p) * V[:-2]) + h[1:-1] * dt
        cont[0], cont[-1] = g[0], g[-1]
        V = np.maximum(g, cont)
        if k in wanted:
            rows[k] = (V[keep].copy(), g[keep].copy())

    order = sorted(rows)
    logger.debug(
        "Lattice oracle: %d steps, sigma_eff=%.4g, %d nodes kept", n_steps, sigma_eff, keep.sum()
    )
    return LatticeOracle(
        times=np.array([t_nodes[k] for k in order]),
        x=x[keep],
        values=np.stack([rows[k][0] for k in order]),
        obstacle=np.stack([rows[k][1] for k in order]),
    )
