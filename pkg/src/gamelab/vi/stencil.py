"""Monotone finite-difference stencils on uniform 1-d and 2-d grids.

The generator L^gamma u = b . grad u + 1/2 tr(a_gamma D^2 u) is discretised
with upwind drift and, in 2-d, the seven-point cross-derivative stencil
whose diagonal follows the sign of a_12. Assembly verifies that every
off-diagonal weight is nonnegative.

The gradient norm uses the upwind (Godunov) form
    N_i(u) = sqrt(sum_k max(D^-_k u, -D^+_k u, 0)^2)
which is nondecreasing in u_i and nonincreasing in its neighbours.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from gamelab.exceptions import ConfigurationError, NumericError

logger = logging.getLogger(__name__)

MONOTONE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Stencil:
    """Grid geometry plus the assembled generator matrix (interior rows only)."""

    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    strides: tuple[int, ...]
    interior: np.ndarray
    boundary: np.ndarray
    generator: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[self.interior] = True
        return mask

    # -- gradient -----------------------------------------------------------

    def gradient_norm(
        self, u: np.ndarray
    ) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
        """Upwind gradient norm at interior nodes (zero on the boundary).

        Returns the norm over all nodes and, per axis, the selected branch
        (0: backward, 1: forward, 2: none) and its magnitude at interior nodes.
        """
        idx = self.interior
        total = np.zeros(idx.shape[0])
        parts = []
        for s, h in zip(self.strides, self.spacing):
            back = (u[idx] - u[idx - s]) / h
            fwd = (u[idx + s] - u[idx]) / h
            cand = np.stack([back, -fwd, np.zeros_like(back)])
            choice = np.argmax(cand, axis=0)
            mag = cand[choice, np.arange(idx.shape[0])]
            total += mag**2
            parts.append((choice, mag))
        norm = np.zeros(self.n_nodes)
        norm[idx] = np.sqrt(total)
        return norm, parts

    def gradient_jacobian(
        self,
        norm: np.ndarray,
        parts: list[tuple[np.ndarray, np.ndarray]],
        rows: np.ndarray,
        weight: float,
    ) -> sp.csr_matrix:
        """weight * dN/du for the interior rows selected by the boolean mask rows."""
        idx = self.interior
        sel = rows[idx] & (norm[idx] > 0)
        r_list, c_list, v_list = [], [], []
        nodes = idx[sel]
        n_sel = norm[nodes]
        for (choice, mag), s, h in zip(parts, self.strides, self.spacing):
            ch = choice[sel]
            coef = weight * mag[sel] / (n_sel * h)
            live = ch != 2
            r_list.append(nodes[live])
            c_list.append(nodes[live])
            v_list.append(coef[live])
            nb = np.where(ch == 0, nodes - s, nodes + s)
            r_list.append(nodes[live])
            c_list.append(nb[live])
            v_list.append(-coef[live])
        if not r_list:
            return sp.csr_matrix((self.n_nodes, self.n_nodes))
        return sp.csr_matrix(
            (np.concatenate(v_list), (np.concatenate(r_list), np.concatenate(c_list))),
            shape=(self.n_nodes, self.n_nodes),
        )

    def centered_gradient(self, u_grid: np.ndarray) -> np.ndarray:
        """Centered differences (one-sided on the edges), shape (*shape, d)."""
        grads = np.gradient(u_grid, *self.spacing)
        if len(self.shape) == 1:
            grads = [grads]
        return np.stack(grads, axis=-1)


def _flat_geometry(shape: tuple[int, ...]) -> tuple[tuple[int, ...], np.ndarray, np.ndarray]:
    strides = tuple(int(np.prod(shape[k + 1 :])) for k in range(len(shape)))
    inner = np.ones(shape, dtype=bool)
    for k in range(len(shape)):
        sl = [slice(None)] * len(shape)
        sl[k] = 0
        inner[tuple(sl)] = False
        sl[k] = -1
        inner[tuple(sl)] = False
    flat = inner.reshape(-1)
    return strides, np.flatnonzero(flat), np.flatnonzero(~flat)


def assemble(spec, gamma: float, axes: tuple[np.ndarray, ...]) -> Stencil:
    """Assemble L^gamma with a_gamma = sigma sigma^T + gamma^2 I.

    Raises:
        ConfigurationError: an off-diagonal weight is negative (scheme not monotone)
        NumericError: a coefficient evaluated non-finite
    """
    shape = tuple(a.shape[0] for a in axes)
    d = len(shape)
    spacing = tuple(float(a[1] - a[0]) for a in axes)
    strides, interior, boundary = _flat_geometry(shape)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)[interior]

    b = np.asarray(spec.b(pts), dtype=float)
    a = spec.a_gamma(pts, gamma)
    finite = np.isfinite(b).all(axis=1) & np.isfinite(a).all(axis=(1, 2))
    if not finite.all():
        bad = int(interior[np.argmin(finite)])
        raise NumericError(f"non-finite coefficient at grid node {bad}", node=bad)

    offsets: list[tuple[int, np.ndarray]] = []
    cross = np.zeros(pts.shape[0])
    if d == 2:
        a12 = a[:, 0, 1]
        cross = np.abs(a12) / (2 * spacing[0] * spacing[1])
        pos = np.maximum(a12, 0.0) / (2 * spacing[0] * spacing[1])
        neg = np.maximum(-a12, 0.0) / (2 * spacing[0] * spacing[1])
        s0, s1 = strides
        offsets += [(s0 + s1, pos), (-s0 - s1, pos), (s0 - s1, neg), (-s0 + s1, neg)]
    for k in range(d):
        h = spacing[k]
        diff = 0.5 * a[:, k, k] / h**2 - cross
        offsets.append((strides[k], diff + np.maximum(b[:, k], 0.0) / h))
        offsets.append((-strides[k], diff + np.maximum(-b[:, k], 0.0) / h))

    for off, w in offsets:
        if np.any(w < -MONOTONE_TOL):
            i = int(np.argmin(w))
            raise ConfigurationError(
                f"stencil not monotone at node {pts[i].tolist()} (weight {w[i]:.3g}); "
                "refine the grid or increase gamma",
                field_path="grid",
            )

    rows = np.concatenate([interior] * (len(offsets) + 1))
    cols = np.concatenate([interior + off for off, _ in offsets] + [interior])
    diag = -np.sum([w for _, w in offsets], axis=0)
    vals = np.concatenate([w for _, w in offsets] + [diag])
    n = int(np.prod(shape))
    generator = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    logger.debug("Assembled generator on %s grid (gamma=%g, nnz=%d)", shape, gamma, generator.nnz)
    return Stencil(shape, spacing, strides, interior, boundary, generator)
