"""Penalised backward solver for the gradient-constrained double-obstacle problem.

At each time level the implicit step solves, at interior nodes,

    (1 + r dt) u - dt L^gamma u - dt/eps1 (g - u)^+ + dt/eps2 (N(u) - f)^+
        = u^{n+1} + dt h

with u = g on the lateral boundary, by semismooth Newton with step
halving. Every stage of the penalty schedule runs a full backward sweep;
the grid returned is the one from the last stage.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from tqdm import tqdm

from gamelab.exceptions import ConfigurationError, NumericError, SolverError
from gamelab.vi.diagnostics import default_contact_tol, label_regions, vi_residual
from gamelab.vi.grid import GridParams, PenaltySchedule, ValueGrid
from gamelab.vi.stencil import Stencil, assemble

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30


@dataclass
class _Step:
    """Operators shared by every Newton solve of one sweep."""

    stencil: Stencil
    A: sp.csr_matrix
    interior: np.ndarray
    dt: float
    eps_obstacle: float
    eps_gradient: float

    def residual(self, u, rhs, g, f):
        norm, parts = self.stencil.gradient_norm(u)
        F = self.A @ u - rhs
        F -= self.interior * (self.dt / self.eps_obstacle) * np.maximum(g - u, 0.0)
        F += self.interior * (self.dt / self.eps_gradient) * np.maximum(norm - f, 0.0)
        return F, norm, parts

    def jacobian(self, u, g, f, norm, parts):
        obstacle = self.interior & (g > u)
        J = self.A + sp.diags(obstacle * (self.dt / self.eps_obstacle))
        active = self.interior & (norm > f)
        if np.any(active):
            J = J + self.stencil.gradient_jacobian(
                norm, parts, active, self.dt / self.eps_gradient
            )
        return sp.csr_matrix(J)


def _newton(step: _Step, u_next, g, h, f, tol: float, max_iter: int, level: int):
    interior = step.interior
    rhs = np.where(interior, u_next + step.dt * h, g)
    u = np.where(interior, np.maximum(u_next, g), g)
    F, norm, parts = step.residual(u, rhs, g, f)
    for it in range(1, max_iter + 1):
        J = step.jacobian(u, g, f, norm, parts)
        delta = spsolve(J, -F)
        if not np.all(np.isfinite(delta)):
            node = int(np.argmax(~np.isfinite(delta)))
            raise NumericError(f"non-finite Newton update at time level {level}", node=node)
        base = np.max(np.abs(F))
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            trial = u + lam * delta
            F_trial, norm_t, parts_t = step.residual(trial, rhs, g, f)
            if np.max(np.abs(F_trial)) <= base:
                break
            lam *= 0.5
        u, F, norm, parts = trial, F_trial, norm_t, parts_t
        if lam * np.max(np.abs(delta)) <= tol * (1.0 + np.max(np.abs(u))):
            return u, it
    worst = int(np.argmax(np.abs(F)))
    raise SolverError(
        f"Newton did not converge at time level {level} after {max_iter} iterations",
        node=(level, worst),
        residual=float(np.abs(F[worst])),
    )


def _sweep(spec, stencil: Stencil, t_nodes, G, H, F_cost, eps1, eps2, schedule, progress):
    M = t_nodes.shape[0] - 1
    dt = float(t_nodes[1] - t_nodes[0])
    interior = stencil.interior_mask
    diag = np.where(interior, 1.0 + spec.r * dt, 1.0)
    A = sp.csr_matrix(sp.diags(diag) - dt * stencil.generator)
    step = _Step(stencil, A, interior, dt, eps1, eps2)

    U = np.empty_like(G)
    U[M] = G[M]
    iterations = []
    levels = range(M - 1, -1, -1)
    for n in tqdm(levels, desc=f"eps={eps1:g}", disable=not progress, leave=False):
        U[n], its = _newton(
            step, U[n + 1], G[n], H[n], F_cost[n], schedule.newton_tol, schedule.max_outer, n
        )
        iterations.append(its)
    return U, iterations


def solve_vi(
    spec,
    gamma: float,
    params: GridParams,
    schedule: PenaltySchedule | None = None,
    contact_tol: float | None = None,
    grad_tol: float = 0.02,
    progress: bool = False,
) -> ValueGrid:
    """Solve for u^gamma on the grid by penalisation.

    Raises:
        ConfigurationError: gamma <= 0, dimension mismatch or non-monotone stencil
        SolverError: Newton non-convergence, carrying (time level, node)
        NumericError: non-finite coefficient or payoff
    """
    schedule = schedule or PenaltySchedule()
    if gamma <= 0:
        raise ConfigurationError("gamma must be positive for the non-degenerate problem")
    if params.d != spec.d:
        raise ConfigurationError(
            f"grid dimension {params.d} does not match state dimension {spec.d}",
            field_path="grid.d",
        )

    t_nodes = params.time_nodes(spec.T)
    axes = params.axes()
    stencil = assemble(spec, gamma, axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)

    G = np.stack([np.asarray(spec.g(t, pts), dtype=float) for t in t_nodes])
    H = np.stack([np.asarray(spec.h(t, pts), dtype=float) for t in t_nodes])
    F_cost = np.asarray(spec.f(t_nodes), dtype=float)
    for name, arr in (("g", G), ("h", H)):
        if not np.all(np.isfinite(arr)):
            n, i = np.unravel_index(int(np.argmax(~np.isfinite(arr))), arr.shape)
            raise NumericError(f"{name} is non-finite at time level {n}", node=(int(n), int(i)))

    logger.info(
        "Solving VI: gamma=%g, grid %d x %s, %d penalty stages",
        gamma, params.n_time, stencil.shape, len(schedule.stages),
    )
    shape = (t_nodes.shape[0],) + stencil.shape
    stage_summaries = []
    ug = None
    for stage, (eps1, eps2) in enumerate(schedule.stages):
        U, iterations = _sweep(
            spec, stencil, t_nodes, G, H, F_cost, eps1, eps2, schedule, progress
        )
        u = U.reshape(shape)
        grad = np.stack([stencil.centered_gradient(u[n]) for n in range(shape[0])])
        ug = ValueGrid(
            t_nodes=t_nodes,
            axes=axes,
            u=u,
            g=G.reshape(shape),
            f=F_cost,
            grad=grad,
            residual=np.zeros(shape),
            regions=np.zeros(shape, dtype=np.int8),
            gamma=float(gamma),
            params=params,
            schedule=schedule,
        )
        report = vi_residual(ug, spec, gamma)
        ug.residual = report.residual
        stage_summaries.append(
            {
                "stage": stage,
                "eps_obstacle": eps1,
                "eps_gradient": eps2,
                "newton_total": int(sum(iterations)),
                "newton_max": int(max(iterations)),
                **report.summary,
            }
        )
        logger.debug("Stage %d summary: %s", stage, stage_summaries[-1])

    if contact_tol is None:
        contact_tol = default_contact_tol(ug)
    ug.regions = label_regions(ug, stencil, contact_tol, grad_tol)
    ug.stage_summaries = stage_summaries
    ug.summary = dict(stage_summaries[-1])
    ug.summary["obstacle_gap"] = float(np.min(ug.u - ug.g))
    ug.summary["contact_tol"] = float(contact_tol)
    return ug
