"""Expected payoff functional of the game, evaluated on discrete paths.

J = e^{-r tau} g(t+tau, X_tau) + int_0^tau e^{-rs} h(t+s, X_s) ds
    + int_[0,tau] e^{-rs} f(t+s) dnu_s

The running integral uses the trapezoid rule. The Stieltjes integral is
taken over the closed interval: atoms at 0 and at tau are both charged.
"""

import logging

import numpy as np

from gamelab.exceptions import ConfigurationError, InvariantViolationError
from gamelab.model.controls import ControlPath, node_index

logger = logging.getLogger(__name__)


def _cost_weights(f, times: np.ndarray, t: float, r: float) -> np.ndarray:
    return np.exp(-r * times) * np.asarray(f(t + times), dtype=float)


def stieltjes_cost(
    f,
    control: ControlPath,
    tau: float,
    t: float = 0.0,
    r: float = 0.0,
    after: float | None = None,
) -> float:
    """int e^{-rs} f(t+s) dnu_s over [0, tau], or over (after, tau] when given.

    Atoms are charged at their node; the density part on each interval is
    integrated with the trapezoid rule on e^{-rs} f(t+s).

    Raises:
        InvariantViolationError: a negative atom or density
        ConfigurationError: tau or after off the grid
    """
    if np.any(control.atoms < 0) or np.any(control.density < 0):
        raise InvariantViolationError("negative control increment in Stieltjes sum")
    times = control.times
    k = node_index(times, tau)
    start = -1 if after is None else node_index(times, after)
    if start > k:
        raise ConfigurationError("interval start lies after its end")

    weights = _cost_weights(f, times, t, r)
    atom_part = float(np.sum(control.atoms[start + 1 : k + 1] * weights[start + 1 : k + 1]))
    lo = max(start, 0)
    if k > lo:
        trap = 0.5 * (weights[lo:k] + weights[lo + 1 : k + 1]) * control.dt
        density_part = float(np.sum(control.density[lo:k] * trap))
    else:
        density_part = 0.0
    return atom_part + density_part


def payoff_at_stops(
    spec,
    times: np.ndarray,
    values: np.ndarray,
    atoms: np.ndarray,
    density: np.ndarray,
    stop_idx: np.ndarray,
    t: float = 0.0,
) -> np.ndarray:
    """Vectorised payoff for a batch of paths stopped at per-path nodes.

    values has shape (n_paths, N+1, d); atoms (n_paths, N+1) or (N+1,);
    density (n_paths, N) or (N,); stop_idx (n_paths,).
    """
    values = np.asarray(values, dtype=float)
    n_paths = values.shape[0]
    dt = float(times[1] - times[0])
    rows = np.arange(n_paths)
    stop_idx = np.asarray(stop_idx, dtype=int)
    disc = np.exp(-spec.r * times)

    x_stop = values[rows, stop_idx]
    terminal = disc[stop_idx] * np.asarray(spec.g(t + times[stop_idx], x_stop), dtype=float)

    running = disc * np.asarray(spec.h(t + times, values), dtype=float)
    trap = np.concatenate(
        [np.zeros((n_paths, 1)), np.cumsum(0.5 * (running[:, 1:] + running[:, :-1]) * dt, axis=1)],
        axis=1,
    )
    running_part = trap[rows, stop_idx]

    weights = _cost_weights(spec.f, times, t, spec.r)
    atoms = np.broadcast_to(atoms, (n_paths, times.shape[0]))
    density = np.broadcast_to(density, (n_paths, times.shape[0] - 1))
    atom_cum = np.cumsum(atoms * weights, axis=1)
    dens_cum = np.concatenate(
        [
            np.zeros((n_paths, 1)),
            np.cumsum(density * 0.5 * (weights[1:] + weights[:-1]) * dt, axis=1),
        ],
        axis=1,
    )
    cost = atom_cum[rows, stop_idx] + dens_cum[rows, stop_idx]
    return terminal + running_part + cost


def evaluate_payoff(spec, path, control: ControlPath | None, tau: float, t: float = 0.0) -> float:
    """Payoff of one path stopped at grid time tau.

    Raises:
        ConfigurationError: tau off the grid or path/control grids misaligned
    """
    control = control if control is not None else path.control
    if control.times.shape != path.times.shape or not np.allclose(control.times, path.times):
        raise ConfigurationError("path and control grids do not align")
    k = node_index(path.times, tau)
    if np.any(control.atoms < 0):
        raise InvariantViolationError("negative atom in control")
    value = payoff_at_stops(
        spec,
        path.times,
        path.values[None],
        control.atoms,
        control.density,
        np.array([k]),
        t,
    )
    return float(value[0])
