"""Post-solve diagnostics of a ValueGrid.

Residuals are measured with the same discrete operator the solver uses:
    A = (u^{n+1} - u^n)/dt + L^gamma u^n - r u^n + h^n
    B = g - u
    C = f - N(u)
and both forms min{max{A,B},C} and max{min{A,C},B} are reported. Summaries
skip the terminal slice and the lateral boundary layer.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from gamelab.vi.grid import GRADIENT_ACTIVE, STOP, ValueGrid
from gamelab.vi.stencil import Stencil, assemble

logger = logging.getLogger(__name__)


@dataclass
class ResidualReport:
    residual: np.ndarray
    minmax: np.ndarray
    maxmin: np.ndarray
    summary: dict = field(default_factory=dict)


@dataclass
class GradientReport:
    max_ratio: float
    threshold: float
    passed: bool
    active_nodes: int
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _flat(ug: ValueGrid, arr: np.ndarray) -> np.ndarray:
    return arr.reshape(arr.shape[0], -1)


def residual_components(ug: ValueGrid, spec, stencil: Stencil) -> tuple[np.ndarray, ...]:
    """A, B, C over all (time, node) pairs; the terminal slice is left at zero."""
    U = _flat(ug, ug.u)
    G = _flat(ug, ug.g)
    M = U.shape[0] - 1
    pts = ug.points()
    dt = ug.dt
    A = np.zeros_like(U)
    C = np.zeros_like(U)
    LU = (stencil.generator @ U[:M].T).T
    for n in range(M):
        h = np.asarray(spec.h(ug.t_nodes[n], pts), dtype=float)
        A[n] = (U[n + 1] - U[n]) / dt + LU[n] - spec.r * U[n] + h
        norm, _ = stencil.gradient_norm(U[n])
        C[n] = ug.f[n] - norm
    B = G - U
    return A, B, C


def summary_mask(ug: ValueGrid) -> np.ndarray:
    """(time, node) pairs used in summaries: interior, outside the boundary layer, t < T."""
    mask = np.zeros((ug.t_nodes.shape[0], int(np.prod(ug.shape))), dtype=bool)
    mask[:-1] = ug.interior_mask().reshape(-1)
    return mask


def _summarise(values: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    sample = values[mask]
    if sample.size == 0:
        return 0.0, 0.0
    return float(sample.max()), float(np.percentile(sample, 99))


def vi_residual(ug: ValueGrid, spec, gamma: float | None = None) -> ResidualReport:
    """Per-node residual of both forms of the variational inequality."""
    gamma = ug.gamma if gamma is None else gamma
    stencil = assemble(spec, gamma, ug.axes)
    A, B, C = residual_components(ug, spec, stencil)
    minmax = np.abs(np.minimum(np.maximum(A, B), C))
    maxmin = np.abs(np.maximum(np.minimum(A, C), B))
    interior = stencil.interior_mask
    minmax[:, ~interior] = 0.0
    maxmin[:, ~interior] = 0.0
    minmax[-1] = 0.0
    maxmin[-1] = 0.0
    residual = np.maximum(minmax, maxmin)

    mask = summary_mask(ug)
    mm_max, mm_p99 = _summarise(minmax, mask)
    xm_max, xm_p99 = _summarise(maxmin, mask)
    summary = {
        "minmax_max": mm_max,
        "minmax_p99": mm_p99,
        "maxmin_max": xm_max,
        "maxmin_p99": xm_p99,
        "max": max(mm_max, xm_max),
        "p99": max(mm_p99, xm_p99),
    }
    logger.debug("Residual summary (gamma=%g): %s", gamma, summary)
    shape = ug.u.shape
    return ResidualReport(
        residual.reshape(shape), minmax.reshape(shape), maxmin.reshape(shape), summary
    )


def label_regions(
    ug: ValueGrid, stencil: Stencil, contact_tol: float, grad_tol: float
) -> np.ndarray:
    """stop where u - g <= contact_tol, gradient_active where N(u) >= f (1 - grad_tol)."""
    U = _flat(ug, ug.u)
    labels = np.zeros(U.shape, dtype=np.int8)
    for n in range(U.shape[0]):
        norm, _ = stencil.gradient_norm(U[n])
        labels[n, norm >= ug.f[n] * (1 - grad_tol)] = GRADIENT_ACTIVE
    labels[(U - _flat(ug, ug.g)) <= contact_tol] = STOP
    labels[-1] = STOP
    return labels.reshape(ug.u.shape)


def gradient_bound_check(ug: ValueGrid, f=None, grad_tol: float = 0.02) -> GradientReport:
    """max |grad u| / f(t) over interior nodes against 1 + grad_tol."""
    fs = ug.f if f is None else np.asarray(f(ug.t_nodes), dtype=float)
    size = np.linalg.norm(ug.grad, axis=-1)
    ratio = size / fs.reshape((-1,) + (1,) * ug.d)
    ratio = np.where(ug.interior_mask()[None], ratio, 0.0)
    k = int(np.argmax(ratio))
    n, *node = np.unravel_index(k, ratio.shape)
    value = float(ratio.reshape(-1)[k])
    threshold = 1.0 + grad_tol
    witness = {
        "t": float(ug.t_nodes[n]),
        "x": [float(ug.axes[i][j]) for i, j in enumerate(node)],
    }
    return GradientReport(
        max_ratio=value,
        threshold=threshold,
        passed=value <= threshold,
        active_nodes=int(np.sum(ug.regions == GRADIENT_ACTIVE)),
        witness=witness,
    )


def interpolation_error(ug: ValueGrid) -> float:
    """max |second difference| / 8 over interior nodes, in t and in every x axis."""
    u = ug.u
    inside = ug.interior_mask()
    worst = 0.0
    for axis in range(u.ndim):
        if u.shape[axis] < 3:
            continue
        second = np.abs(np.diff(u, n=2, axis=axis)) / 8.0
        if axis == 0:
            mask = np.broadcast_to(inside, second.shape)
        else:
            sl = [slice(None)] * (u.ndim - 1)
            sl[axis - 1] = slice(1, -1)
            mask = np.broadcast_to(inside[tuple(sl)], second.shape)
        if np.any(mask):
            worst = max(worst, float(second[mask].max()))
    return worst


def default_contact_tol(ug: ValueGrid) -> float:
    return 2.0 * interpolation_error(ug)


def extract_contact_set(ug: ValueGrid, tol: float) -> np.ndarray:
    """Nodes with u - g <= tol; the terminal slice is always included."""
    mask = (ug.u - ug.g) <= tol
    mask[-1] = True
    return mask


def contact_boundary(ug: ValueGrid, tol: float) -> np.ndarray:
    """1-d only: largest x in the contact set at each time (nan if empty)."""
    mask = extract_contact_set(ug, tol)
    axis = ug.axes[0]
    out = np.full(ug.t_nodes.shape[0], np.nan)
    for n in range(mask.shape[0]):
        hits = np.flatnonzero(mask[n])
        if hits.size:
            out[n] = axis[hits.max()]
    return out


def obstacle_gap(ug: ValueGrid) -> float:
    """min (u - g) over the grid; negative values mean dominance is violated."""
    return float(np.min(ug.u - ug.g))


def asymmetry(ug: ValueGrid) -> float:
    """max |u(t, x) - u(t, -x)| (grids are symmetric about the origin)."""
    flipped = ug.u[(slice(None),) + (slice(None, None, -1),) * ug.d]
    return float(np.max(np.abs(ug.u - flipped)))
