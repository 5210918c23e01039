"""Brownian drivers with counter-based substreams.

Each path owns two independent streams derived from
(master seed, path index, tag) with numpy's SeedSequence spawn keys, so a
path's increments do not depend on which worker generates it or in which
order.
"""

from dataclasses import dataclass

import numpy as np

STREAM_W = 0
STREAM_W_TILDE = 1


def _stream(seed: int, path_index: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path_index), int(tag)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class BrownianDriver:
    """Increments of W (d') and of the independent perturbation W~ (d)."""

    seed: int
    n_steps: int
    dt: float
    dW: np.ndarray
    dWtilde: np.ndarray
    path_index: int = 0

    @classmethod
    def generate(
        cls, seed: int, n_steps: int, dt: float, d: int, d_prime: int, path_index: int = 0
    ) -> "BrownianDriver":
        scale = np.sqrt(dt)
        dW = _stream(seed, path_index, STREAM_W).standard_normal((n_steps, d_prime)) * scale
        dWt = _stream(seed, path_index, STREAM_W_TILDE).standard_normal((n_steps, d)) * scale
        return cls(seed, n_steps, dt, dW, dWt, path_index)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def table(self) -> tuple[list[str], list[list[float]]]:
        """Audit rows: s, dW_1..dW_d', dWtilde_1..dWtilde_d (increment ending at s)."""
        d_prime = self.dW.shape[1]
        d = self.dWtilde.shape[1]
        header = (
            ["s"]
            + [f"dW_{i + 1}" for i in range(d_prime)]
            + [f"dWtilde_{i + 1}" for i in range(d)]
        )
        s = self.times[1:]
        data = np.column_stack([s, self.dW, self.dWtilde])
        return header, data.tolist()


def driver_block(
    seed: int, path_indices: np.ndarray, n_steps: int, dt: float, d: int, d_prime: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked increments for a block of paths: (n, N, d') and (n, N, d)."""
    n = len(path_indices)
    dW = np.empty((n, n_steps, d_prime))
    dWt = np.empty((n, n_steps, d))
    scale = np.sqrt(dt)
    for row, index in enumerate(path_indices):
        dW[row] = _stream(seed, index, STREAM_W).standard_normal((n_steps, d_prime))
        dWt[row] = _stream(seed, index, STREAM_W_TILDE).standard_normal((n_steps, d))
    dW *= scale
    dWt *= scale
    return dW, dWt
