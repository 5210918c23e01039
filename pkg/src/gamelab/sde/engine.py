"""Euler-Maruyama simulation of the controlled SDE and its perturbed companions.

Per step s -> s + dt, for every gamma sharing one driver and one control:

    X_{s+dt-} = X_s + b(X_s) dt + sigma(X_s) dW + gamma dW~ + n dnu^c
    X_{s+dt}  = X_{s+dt-} + n dnu^atom

An atom at s = 0 acts before the first step. Feedback families choose
their atoms from the left limit of the base (gamma = 0) path; the realised
control is then applied to every companion so the coupled paths share one
ControlPath.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, TypeVar

import numpy as np
from tqdm import tqdm

from gamelab.concurrency import run_cells
from gamelab.exceptions import ConfigurationError, GridMismatchError, NumericError
from gamelab.model.controls import ControlFamily, ControlPath
from gamelab.sde.driver import BrownianDriver, driver_block
from gamelab.sde.paths import CadlagPath, CoupledSample, sup_distance

logger = logging.getLogger(__name__)

R = TypeVar("R")

RECORD_BUDGET = 4_000_000
DEFAULT_BLOCK = 2000


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    n: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n}


def mc_estimate(samples: Any) -> MomentEstimate:
    """Sample mean with its standard error (ddof=1)."""
    arr = np.asarray(samples, dtype=float).reshape(-1)
    if arr.size < 2:
        raise ConfigurationError(f"need at least 2 samples, got {arr.size}")
    return MomentEstimate(float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size)), arr.size)


@dataclass(frozen=True, eq=False)
class PathBlock:
    """Simulation output for a block of paths.

    gammas[0] is always the base gamma = 0. values/pre_values have shape
    (G, n, N+1, d) and are None when the block was run without recording;
    sup_dist (G, n) always holds the running sup of |X^gamma - X| over both limits.
    """

    times: np.ndarray
    gammas: tuple[float, ...]
    path_indices: np.ndarray
    directions: np.ndarray
    density: np.ndarray
    atoms: np.ndarray
    sup_dist: np.ndarray
    values: np.ndarray | None = None
    pre_values: np.ndarray | None = None

    def gamma_index(self, gamma: float) -> int:
        return self.gammas.index(float(gamma))

    def control(self, row: int, tagged_opt: bool = False) -> ControlPath:
        return ControlPath(
            self.times, self.directions, self.density, self.atoms[row].copy(), tagged_opt
        )

    def path(self, row: int, gamma: float = 0.0, tagged_opt: bool = False) -> CadlagPath:
        if self.values is None or self.pre_values is None:
            raise ConfigurationError("block was simulated without recording paths")
        g = self.gamma_index(gamma)
        return CadlagPath(
            self.times,
            self.values[g, row].copy(),
            self.pre_values[g, row].copy(),
            self.atoms[row] > 0,
            self.control(row, tagged_opt),
            float(gamma),
        )


def _gamma_axis(gammas: Sequence[float]) -> tuple[float, ...]:
    out = [0.0]
    for g in gammas:
        g = float(g)
        if not 0.0 <= g < 1.0:
            raise ConfigurationError(f"gamma must lie in [0, 1), got {g}")
        if g not in out:
            out.append(g)
    return tuple(out)


def _resolve_control(control: Any, times: np.ndarray, d: int) -> ControlFamily | ControlPath:
    if isinstance(control, ControlFamily):
        return control if control.is_feedback else control.open_loop(times, d)
    if isinstance(control, ControlPath):
        if control.times.shape != times.shape or not np.allclose(control.times, times):
            raise GridMismatchError("control grid does not match the simulation grid")
        if control.d != d:
            raise GridMismatchError(f"control acts in dimension {control.d}, state has {d}")
        return control
    raise ConfigurationError(f"unsupported control {type(control).__name__}")


def _integrate(
    spec,
    control: ControlFamily | ControlPath,
    x0: np.ndarray,
    gammas: tuple[float, ...],
    times: np.ndarray,
    dW: np.ndarray,
    dWt: np.ndarray,
    record: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, Any, Any]:
    n, N, _ = dW.shape
    d = spec.d
    G = len(gammas)
    dt = float(times[1] - times[0])
    g_axis = np.asarray(gammas)[:, None, None]

    feedback = isinstance(control, ControlFamily)
    if feedback:
        n_dir = control.unit_direction(d)
        directions = np.broadcast_to(n_dir, (N + 1, d)).copy()
        density = np.zeros(N)
        atoms = np.zeros((n, N + 1))
        fired = control.initial_state(n)
    else:
        directions = control.directions
        density = control.density
        atoms = np.broadcast_to(control.atoms, (n, N + 1)).copy()

    X = np.broadcast_to(np.asarray(x0, dtype=float).reshape(-1, d), (G, n, d)).copy()
    values = np.empty((G, n, N + 1, d)) if record else None
    pre_values = np.empty((G, n, N + 1, d)) if record else None
    sup = np.zeros((G, n))

    def apply_atoms(k: int, x_pre: np.ndarray) -> np.ndarray:
        if feedback:
            atoms[:, k] = control.feedback_atoms(x_pre[0], fired)
        atom = atoms[:, k]
        if np.any(atom > 0):
            return x_pre + atom[None, :, None] * directions[k]
        return x_pre

    if record:
        pre_values[:, :, 0] = X
    X = apply_atoms(0, X)
    if record:
        values[:, :, 0] = X

    for k in range(1, N + 1):
        drift = spec.b(X)
        sig = spec.sigma(X)
        if not (np.all(np.isfinite(drift)) and np.all(np.isfinite(sig))):
            raise NumericError(f"non-finite coefficient at grid node {k - 1}", node=k - 1)
        x_pre = X + drift * dt + np.einsum("gnij,nj->gni", sig, dW[:, k - 1]) + g_axis * dWt[
            None, :, k - 1
        ]
        if density[k - 1] != 0.0:
            x_pre = x_pre + density[k - 1] * dt * directions[k]
        if not np.all(np.isfinite(x_pre)):
            raise NumericError(f"non-finite state at grid node {k}", node=k)
        X = apply_atoms(k, x_pre)
        np.maximum(sup, np.linalg.norm(x_pre - x_pre[0], axis=-1), out=sup)
        np.maximum(sup, np.linalg.norm(X - X[0], axis=-1), out=sup)
        if record:
            pre_values[:, :, k] = x_pre
            values[:, :, k] = X

    return directions, density, atoms, sup, values, pre_values


def time_grid(horizon: float, n_steps: int) -> np.ndarray:
    if n_steps < 1 or horizon <= 0:
        raise ConfigurationError("time grid needs n_steps >= 1 and a positive horizon")
    return np.linspace(0.0, horizon, n_steps + 1)


def simulate_controlled(
    spec, control: Any, driver: BrownianDriver, gamma: float, x0: Any
) -> CadlagPath:
    """One path of the controlled SDE (gamma = 0) or of its perturbation.

    Raises:
        GridMismatchError: control and driver grids differ
        NumericError: a coefficient evaluated non-finite
    """
    times = np.arange(driver.n_steps + 1) * driver.dt
    if isinstance(control, ControlPath):
        if control.times.shape != times.shape or not np.isclose(control.dt, driver.dt):
            raise GridMismatchError("control grid does not match the driver grid")
        times = control.times
    control = _resolve_control(control, times, spec.d)
    gammas = _gamma_axis([gamma])
    directions, density, atoms, _, values, pre = _integrate(
        spec, control, x0, gammas, times, driver.dW[None], driver.dWtilde[None], record=True
    )
    g = gammas.index(float(gamma))
    realised = ControlPath(
        times, directions, density, atoms[0],
        getattr(control, "tagged_opt", False),
    )
    return CadlagPath(times, values[g, 0], pre[g, 0], atoms[0] > 0, realised, float(gamma))


def simulate_coupled(
    spec,
    control: Any,
    seed: int,
    gammas: Sequence[float],
    x0: Any,
    n_steps: int = 1000,
    t0: float = 0.0,
    path_index: int = 0,
) -> CoupledSample:
    """Base path and one companion per gamma on a shared driver.

    Raises:
        ConfigurationError: empty gamma list or gamma outside [0, 1)
    """
    if not gammas:
        raise ConfigurationError("gammas must be nonempty")
    if isinstance(control, ControlPath):
        times = control.times
        n_steps = times.shape[0] - 1
    else:
        times = time_grid(spec.T - t0, n_steps)
    dt = float(times[1] - times[0])
    driver = BrownianDriver.generate(seed, n_steps, dt, spec.d, spec.d_prime, path_index)
    resolved = _resolve_control(control, times, spec.d)
    axis = _gamma_axis(gammas)
    directions, density, atoms, _, values, pre = _integrate(
        spec, resolved, x0, axis, times, driver.dW[None], driver.dWtilde[None], record=True
    )
    tagged = getattr(resolved, "tagged_opt", False)
    realised = ControlPath(times, directions, density, atoms[0], tagged)
    flags = atoms[0] > 0
    base = CadlagPath(times, values[0, 0], pre[0, 0], flags, realised, 0.0)
    perturbed = {}
    for gamma in gammas:
        gamma = float(gamma)
        if gamma == 0.0:
            perturbed[gamma] = base
        else:
            g = axis.index(gamma)
            perturbed[gamma] = CadlagPath(times, values[g, 0], pre[g, 0], flags, realised, gamma)
    return CoupledSample(base, perturbed, int(seed), driver)


def simulate_block(
    spec,
    control: Any,
    seed: int,
    gammas: Sequence[float],
    x0: Any,
    times: np.ndarray,
    path_indices: np.ndarray,
    record: bool = True,
) -> PathBlock:
    """Simulate a block of paths with per-path driver substreams."""
    dt = float(times[1] - times[0])
    n_steps = times.shape[0] - 1
    dW, dWt = driver_block(seed, path_indices, n_steps, dt, spec.d, spec.d_prime)
    resolved = _resolve_control(control, times, spec.d)
    axis = _gamma_axis(gammas)
    directions, density, atoms, sup, values, pre = _integrate(
        spec, resolved, x0, axis, times, dW, dWt, record
    )
    return PathBlock(
        times, axis, np.asarray(path_indices), directions, density, atoms, sup, values, pre
    )


def map_path_blocks(
    fn: Callable[[PathBlock], R],
    spec,
    control: Any,
    seed: int,
    gammas: Sequence[float],
    x0: Any,
    n_paths: int,
    n_steps: int,
    t0: float = 0.0,
    record: bool = True,
    block_size: int | None = None,
    threads: int | None = None,
    progress: bool = False,
    desc: str = "paths",
) -> list[R]:
    """Simulate n_paths in blocks and apply fn to each block, in path order.

    Results do not depend on the thread count: every path draws from its
    own substream and blocks are aggregated in submission order.
    """
    if n_paths < 1:
        raise ConfigurationError("n_paths must be positive")
    times = time_grid(spec.T - t0, n_steps)
    n_gammas = len(_gamma_axis(gammas))
    if block_size is None:
        block_size = DEFAULT_BLOCK
        if record:
            per_path = n_gammas * (n_steps + 1) * spec.d
            block_size = max(1, min(DEFAULT_BLOCK, RECORD_BUDGET // per_path))
    starts = range(0, n_paths, block_size)
    cells = [np.arange(s, min(s + block_size, n_paths)) for s in starts]
    logger.debug(
        "Simulating %d paths x %d steps in %d blocks (%d gammas)",
        n_paths, n_steps, len(cells), n_gammas,
    )

    def run(indices: np.ndarray) -> tuple[int, R]:
        block = simulate_block(spec, control, seed, gammas, x0, times, indices, record)
        return len(indices), fn(block)

    with tqdm(total=n_paths, desc=desc, disable=not progress, leave=False) as bar:
        results = run_cells(run, cells, threads=threads, on_done=lambda r: bar.update(r[0]))
    return [r for _, r in results]


def coupled_sup_distances(
    spec,
    control: Any,
    seed: int,
    gammas: Sequence[float],
    x0: Any,
    n_paths: int,
    n_steps: int,
    t0: float = 0.0,
    threads: int | None = None,
    progress: bool = False,
) -> np.ndarray:
    """sup_s |X^gamma_s - X_s| for every path and gamma, shape (n_paths, len(gammas))."""
    cols = [float(g) for g in gammas]

    def collect(block: PathBlock) -> np.ndarray:
        return np.stack([block.sup_dist[block.gamma_index(g)] for g in cols], axis=1)

    parts = map_path_blocks(
        collect, spec, control, seed, cols, x0, n_paths, n_steps, t0,
        record=False, threads=threads, progress=progress, desc="coupling",
    )
    return np.concatenate(parts, axis=0)


def moment_estimate(
    samples: Sequence[CoupledSample], gamma: float, p: float = 1.0, statistic: str = "sup_distance"
) -> MomentEstimate:
    """Monte Carlo mean and standard error of a per-sample statistic.

    statistic: sup_distance (sup |X^gamma - X|^p) or terminal_norm (|X^gamma_T|^p).

    Raises:
        ConfigurationError: fewer than two samples or unknown statistic
    """
    if len(samples) < 2:
        raise ConfigurationError("moment_estimate needs at least two samples")
    gamma = float(gamma)
    if statistic == "sup_distance":
        stats = [sup_distance(s.base, s.perturbed[gamma], p) for s in samples]
    elif statistic == "terminal_norm":
        stats = [float(np.linalg.norm(s.perturbed[gamma].values[-1]) ** p) for s in samples]
    else:
        raise ConfigurationError(f"unknown statistic {statistic!r}")
    return mc_estimate(stats)
