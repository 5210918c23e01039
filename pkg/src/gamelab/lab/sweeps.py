"""Sweeps over the perturbation size gamma and over mollification trebles."""

import logging
from collections.abc import Sequence
from typing import Any

import numpy as np

from gamelab.concurrency import run_cells
from gamelab.exceptions import (
    ConfigurationError,
    DegenerateFitError,
    GridMismatchError,
    InsufficientSweepPointsError,
)
from gamelab.lab.fitting import NOISE_FLOOR, SweepReport, SweepRow, fit_loglog
from gamelab.lab.mollify import MollifiedPayoffs, mollify_payoffs
from gamelab.sde.engine import coupled_sup_distances, mc_estimate
from gamelab.vi.grid import GridParams, PenaltySchedule, ValueGrid
from gamelab.vi.solver import solve_vi

logger = logging.getLogger(__name__)

MIN_GAMMAS = 5
MIN_PATHS = 1000
MIN_RATE_POINTS = 3
ENVELOPE_MARGIN = 1.1
REFERENCES = ("cauchy", "payoff")


def _check_gammas(gammas: Sequence[float], minimum: int, field_path: str) -> list[float]:
    values = [float(g) for g in gammas]
    if len(set(values)) < minimum:
        raise InsufficientSweepPointsError(
            f"need at least {minimum} distinct gamma values, got {len(set(values))}",
            field_path=field_path,
        )
    if any(not 0.0 < g < 1.0 for g in values):
        raise ConfigurationError("gamma values must lie in (0, 1)", field_path=field_path)
    return values


# =============================================================================
# Coupling rate
# =============================================================================

def report_from_distances(
    distances: np.ndarray,
    gammas: Sequence[float],
    p: float = 1.0,
    slope_band: tuple[float, float] = (0.9, 1.1),
    min_r2: float = 0.95,
    name: str = "sweep-gamma",
) -> SweepReport:
    """SweepReport of E[sup |X^gamma - X|^p] from per-path sup distances (n_paths, G).

    Raises:
        DegenerateFitError: every statistic below the noise floor
    """
    stat = f"sup_distance_p{p:g}"
    rows = []
    for col, gamma in enumerate(gammas):
        est = mc_estimate(distances[:, col] ** p)
        rows.append(SweepRow((float(gamma),), stat, est.mean, est.stderr, est.n))
    report = SweepReport(name, ("gamma",), rows)
    report.fit = fit_loglog(report.rows)
    lo, hi = slope_band[0] * p, slope_band[1] * p
    report.check(f"slope_p{p:g}", lo <= report.fit.slope <= hi, report.fit.slope, [lo, hi])
    report.check(f"r_squared_p{p:g}", report.fit.r_squared >= min_r2, report.fit.r_squared, min_r2)
    return report


def gamma_sweep(
    spec,
    control: Any,
    gammas: Sequence[float],
    n_paths: int,
    p: float = 1.0,
    seed: int = 0,
    x0: Any = 0.0,
    n_steps: int = 1000,
    t0: float = 0.0,
    min_r2: float = 0.95,
    threads: int | None = None,
    progress: bool = False,
) -> SweepReport:
    """Coupling estimate E[sup |X^gamma - X|^p] across gammas, fitted on log-log axes.

    Raises:
        InsufficientSweepPointsError: fewer than five gammas
        ConfigurationError: fewer than 1000 paths
        DegenerateFitError: all statistics below the noise floor
    """
    return gamma_sweeps(
        spec, control, gammas, n_paths, [p], seed, x0, n_steps, t0, min_r2, threads, progress
    )[0]


def gamma_sweeps(
    spec,
    control: Any,
    gammas: Sequence[float],
    n_paths: int,
    ps: Sequence[float] = (1.0,),
    seed: int = 0,
    x0: Any = 0.0,
    n_steps: int = 1000,
    t0: float = 0.0,
    min_r2: float = 0.95,
    threads: int | None = None,
    progress: bool = False,
) -> list[SweepReport]:
    """One report per moment order p, all from the same coupled paths."""
    gammas = _check_gammas(gammas, MIN_GAMMAS, "simulation.gammas")
    if n_paths < MIN_PATHS:
        raise ConfigurationError(
            f"gamma_sweep needs at least {MIN_PATHS} paths", field_path="simulation.n_paths"
        )
    distances = coupled_sup_distances(
        spec, control, seed, gammas, x0, n_paths, n_steps, t0, threads=threads, progress=progress
    )
    reports = []
    for p in ps:
        report = report_from_distances(distances, gammas, p, min_r2=min_r2)
        logger.info(
            "gamma sweep p=%g: slope %.4f, R^2 %.4f", p, report.fit.slope, report.fit.r_squared
        )
        reports.append(report)
    return reports


# =============================================================================
# Value rate
# =============================================================================

def solve_many(
    spec,
    gammas: Sequence[float],
    params: GridParams,
    schedule: PenaltySchedule | None = None,
    contact_tol: float | None = None,
    grad_tol: float = 0.02,
    threads: int | None = None,
) -> dict[float, ValueGrid]:
    """Solve u^gamma for every gamma on one shared grid."""
    unique = sorted({float(g) for g in gammas}, reverse=True)
    grids = run_cells(
        lambda g: solve_vi(spec, g, params, schedule, contact_tol, grad_tol), unique, threads
    )
    return dict(zip(unique, grids))


def _compact_sup(diff: np.ndarray, ug: ValueGrid, weight: np.ndarray) -> float:
    inside = ug.interior_mask()
    values = np.abs(diff) / weight
    return float(np.max(values[:, inside]))


def value_rate_study(
    spec,
    gammas: Sequence[float],
    params: GridParams,
    schedule: PenaltySchedule | None = None,
    reference: str = "cauchy",
    min_slope: float = 0.8,
    min_r2: float = 0.95,
    noise_floor: float = NOISE_FLOOR,
    grids: dict[float, ValueGrid] | None = None,
    threads: int | None = None,
) -> tuple[SweepReport, dict[float, ValueGrid]]:
    """Rate of u^gamma -> v from solved grids.

    reference="cauchy": D(gamma) = sup |u^gamma - u^{gamma/2}| over the interior compact.
    reference="payoff": D(gamma) = sup |u^gamma - g| for specs where v = g.
    For quadratic-growth profiles the differences are divided by (1+|x|^2)^beta.

    Raises:
        InsufficientSweepPointsError: fewer than three gammas
        GridMismatchError: grids of different geometry
    """
    if reference not in REFERENCES:
        raise ConfigurationError(f"unknown reference {reference!r}", field_path="study.reference")
    gammas = sorted(_check_gammas(gammas, MIN_RATE_POINTS, "simulation.gammas"), reverse=True)
    needed = set(gammas)
    if reference == "cauchy":
        needed |= {g / 2 for g in gammas}
    grids = dict(grids or {})
    missing = sorted(needed - set(grids), reverse=True)
    if missing:
        grids.update(solve_many(spec, missing, params, schedule, threads=threads))

    first = grids[gammas[0]]
    for g in needed:
        if not grids[g].same_geometry(first):
            raise GridMismatchError(f"grid for gamma={g:g} differs from gamma={gammas[0]:g}")
    weight = spec.profile.growth_weight(first.points()).reshape(first.shape)

    stat = "cauchy_difference" if reference == "cauchy" else "payoff_gap"
    rows = []
    for g in gammas:
        other = grids[g / 2].u if reference == "cauchy" else grids[g].g
        value = _compact_sup(grids[g].u - other, grids[g], weight)
        rows.append(SweepRow((g,), stat, value, 0.0, int(np.prod(grids[g].u.shape))))
    report = SweepReport("study-rate", ("gamma",), rows)
    if spec.profile.quadratic:
        report.notes.append(f"differences weighted by (1+|x|^2)^{spec.profile.beta:g}")

    if all(r.mean <= noise_floor for r in report.rows):
        report.notes.append("degenerate: below noise floor")
        report.check("degenerate", True, max(r.mean for r in report.rows), noise_floor)
        return report, grids
    try:
        report.fit = fit_loglog(report.rows, noise_floor)
    except DegenerateFitError as e:
        report.notes.append(f"degenerate: {e}")
        report.check("degenerate", True, max(r.mean for r in report.rows), noise_floor)
        return report, grids

    large = report.rows[len(report.rows) // 2 :]
    C = max(r.mean / r.param[0] for r in large)
    worst = max(r.mean / (C * r.param[0]) for r in report.rows)
    report.check("slope", report.fit.slope >= min_slope, report.fit.slope, min_slope)
    report.check("r_squared", report.fit.r_squared >= min_r2, report.fit.r_squared, min_r2)
    report.check(
        "linear_envelope", worst <= ENVELOPE_MARGIN, worst, ENVELOPE_MARGIN,
        witness={"fitted_C": C},
    )
    return report, grids


# =============================================================================
# Mollification
# =============================================================================

def mollify_sweep(
    spec,
    js: Sequence[int],
    ks: Sequence[float],
    ms: Sequence[float],
    grad_tol: float = 1e-3,
    error_factor: float = 0.6,
    solve: tuple[GridParams, PenaltySchedule | None, float] | None = None,
    threads: int | None = None,
) -> tuple[SweepReport, list[MollifiedPayoffs]]:
    """Sweep (j, k, m) nested j innermost, then k, then m.

    With solve=(params, schedule, gamma) every treble is also solved and
    sup |u_jkm - u| over the interior compact is recorded.
    """
    js = sorted(int(j) for j in js)
    if not js or not ks or not ms:
        raise ConfigurationError("js, ks and ms must be nonempty", field_path="mollify")
    trebles = [(j, float(k), float(m)) for m in ms for k in ks for j in js]
    payoffs = run_cells(
        lambda c: mollify_payoffs(spec, c[0], c[1], c[2], grad_tol), trebles, threads
    )

    rows = []
    for mp in payoffs:
        key = (float(mp.j), mp.k, mp.m)
        n_nodes = len(mp.g.nodes)
        rows.append(SweepRow(key, "sup_error_g", mp.sup_error(spec), 0.0, n_nodes))
        rows.append(SweepRow(key, "grad_ratio", mp.gradient_max() / mp.f_min, 0.0, n_nodes))

    if solve is not None:
        params, schedule, gamma = solve
        base = solve_vi(spec, gamma, params, schedule)
        grids = run_cells(
            lambda mp: solve_vi(mp.spec_for(spec), gamma, params, schedule), payoffs, threads
        )
        inside = base.interior_mask()
        for mp, ug in zip(payoffs, grids):
            gap = float(np.max(np.abs(ug.u - base.u)[:, inside]))
            rows.append(SweepRow((float(mp.j), mp.k, mp.m), "value_gap", gap, 0.0, ug.u.size))

    report = SweepReport("sweep-mollify", ("j", "k", "m"), rows)
    by_cell = {(mp.j, mp.k, mp.m): mp for mp in payoffs}
    j_max = js[-1]

    bad_order, bad_final = [], []
    for m in ms:
        for k in ks:
            errors = [by_cell[(j, float(k), float(m))].sup_error(spec) for j in js]
            if any(b > a + 1e-9 for a, b in zip(errors, errors[1:])):
                bad_order.append({"k": k, "m": m, "errors": errors})
            if errors[-1] > error_factor / j_max:
                bad_final.append({"k": k, "m": m, "error": errors[-1]})
    report.check("sup_error_nonincreasing", not bad_order, len(bad_order), 0, bad_order or None)
    report.check(
        "final_sup_error", not bad_final,
        max(by_cell[(j_max, float(k), float(m))].sup_error(spec) for m in ms for k in ks),
        error_factor / j_max, bad_final or None,
    )
    ratios = [r for r in report.rows if r.statistic == "grad_ratio"]
    worst = max(ratios, key=lambda r: r.mean)
    report.check("gradient_bound", worst.mean <= 1.0 + grad_tol, worst.mean, 1.0 + grad_tol,
                 {"j": worst.param[0], "k": worst.param[1], "m": worst.param[2]})
    report.check(
        "kernel_mass",
        all(abs(mp.kernel_mass - 1.0) <= 1e-6 for mp in payoffs),
        max(abs(mp.kernel_mass - 1.0) for mp in payoffs),
        1e-6,
    )

    if len(ms) > 1:
        report.check(*_truncation_monotone(payoffs, js, ks, sorted(ms)))

    last = [r for r in report.rows if r.statistic == "sup_error_g"
            and r.param[1] == float(ks[-1]) and r.param[2] == float(ms[-1])]
    try:
        report.fit = fit_loglog(last)
    except DegenerateFitError:
        report.notes.append("sup error too small to fit against j")
    return report, payoffs


def _truncation_monotone(payoffs, js, ks, ms) -> tuple[str, bool, float, float]:
    """g_jk(m') >= g_jkm for m < m' where both cutoffs are identically one."""
    by_cell = {(mp.j, mp.k, mp.m): mp for mp in payoffs}
    worst = 0.0
    for j in js:
        for k in ks:
            for lo, hi in zip(ms, ms[1:]):
                a, b = by_cell[(j, float(k), float(lo))], by_cell[(j, float(k), float(hi))]
                radius = min(a.inner_radius, b.inner_radius)
                inside = np.abs(a.x) <= radius
                drop = np.asarray(a.g.values)[inside] - np.asarray(b.g.values)[inside]
                if drop.size:
                    worst = max(worst, float(drop.max()))
    return "truncation_monotone", worst <= 1e-9, worst, 1e-9
