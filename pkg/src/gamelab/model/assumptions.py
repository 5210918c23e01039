"""Sampled checks of the standing assumptions of a GameSpec.

Constants are estimated by maximising quotients over finite point sets, so
a conforming report is evidence, not proof. Violations are reported and
never raised.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from gamelab.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
MAX_PAIR_POINTS = 400
FD_STEP = 1e-5


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    value: float
    threshold: float | None
    witness: dict = field(default_factory=dict)
    required: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AssumptionReport:
    variant: str
    n_samples: int
    checks: list[AssumptionCheck] = field(default_factory=list)

    @property
    def conforming(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def get(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n_samples": self.n_samples,
            "conforming": self.conforming,
            "checks": [c.to_dict() for c in self.checks],
        }


def _witness(point: np.ndarray, t: float | None = None, **extra: Any) -> dict:
    data: dict[str, Any] = {"x": [float(v) for v in np.atleast_1d(point)]}
    if t is not None:
        data["t"] = float(t)
    data.update({k: float(v) for k, v in extra.items()})
    return data


def _spatial_gradient(fn, t: float, x: np.ndarray) -> np.ndarray:
    """Central finite-difference gradient of fn(t, .) at points x, shape (n, d)."""
    n, d = x.shape
    grad = np.empty((n, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = FD_STEP
        grad[:, k] = (fn(t, x + e) - fn(t, x - e)) / (2 * FD_STEP)
    return grad


def _pairs(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.shape[0] > MAX_PAIR_POINTS:
        rng = np.random.default_rng(0)
        x = x[rng.choice(x.shape[0], MAX_PAIR_POINTS, replace=False)]
    i, j = np.triu_indices(x.shape[0], k=1)
    return x[i], x[j]


def _max_quotient(
    name: str, numer: np.ndarray, denom: np.ndarray, points: np.ndarray, bound: float | None,
    t: float | None = None, tol: float = 1e-9, required: bool = True,
) -> AssumptionCheck:
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(denom > 0, numer / denom, 0.0)
    k = int(np.argmax(q))
    value = float(q[k])
    passed = True if bound is None else value <= bound * (1 + tol) + tol
    return AssumptionCheck(
        name, passed, value, bound, _witness(points[k], t), required=required and bound is not None
    )


def validate_assumptions(
    spec,
    sample_points: Any,
    n_times: int = 5,
    grad_tol: float = 1e-4,
) -> AssumptionReport:
    """Estimate the assumption constants of spec over sample_points.

    Raises:
        ConfigurationError: fewer than 100 sample points or wrong dimension
    """
    x = np.asarray(sample_points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < MIN_SAMPLES:
        raise ConfigurationError(f"need at least {MIN_SAMPLES} sample points, got {x.shape[0]}")
    if x.shape[1] != spec.d:
        raise ConfigurationError(f"sample points have dimension {x.shape[1]}, expected {spec.d}")

    prof = spec.profile
    report = AssumptionReport(variant=prof.variant, n_samples=x.shape[0])
    times = np.linspace(0.0, spec.T, n_times)
    size = np.linalg.norm(x, axis=1)

    # |grad g| <= f
    best = (-1.0, x[0], 0.0)
    for t in times:
        ratio = np.linalg.norm(_spatial_gradient(spec.g, t, x), axis=1) / float(spec.f(t))
        k = int(np.argmax(ratio))
        if ratio[k] > best[0]:
            best = (float(ratio[k]), x[k], float(t))
    report.checks.append(
        AssumptionCheck(
            "gradient_ratio", best[0] <= 1 + grad_tol, best[0], 1 + grad_tol,
            _witness(best[1], best[2]),
        )
    )

    # g(t, y) + f(t)|y - x| >= g(t, x)
    xa, xb = _pairs(x)
    worst = (np.inf, xa[0], 0.0)
    for t in times:
        gap = spec.g(t, xb) + float(spec.f(t)) * np.linalg.norm(xb - xa, axis=1) - spec.g(t, xa)
        k = int(np.argmin(gap))
        if gap[k] < worst[0]:
            worst = (float(gap[k]), xa[k], float(t))
    report.checks.append(
        AssumptionCheck(
            "gradient_compatibility", worst[0] >= -grad_tol, worst[0], -grad_tol,
            _witness(worst[1], worst[2]),
        )
    )

    # Lipschitz b and sigma vs D1
    dist = np.linalg.norm(xa - xb, axis=1)
    db = np.linalg.norm(spec.b(xa) - spec.b(xb), axis=1)
    report.checks.append(_max_quotient("lipschitz_b", db, dist, xa, prof.D1))
    ds = np.sqrt(np.sum((spec.sigma(xa) - spec.sigma(xb)) ** 2, axis=(1, 2)))
    report.checks.append(_max_quotient("lipschitz_sigma", ds, dist, xa, prof.D1))

    # pairwise |g(t,x) - g(t,y)| <= f(t)|x - y|; h is only estimated
    report.checks.append(
        _payoff_quotient("lipschitz_g", spec.g, xa, xb, dist, times, spec.f, 1 + grad_tol)
    )
    if not prof.quadratic:
        report.checks.append(_payoff_quotient("lipschitz_h", spec.h, xa, xb, dist, times))

    # linear growth |b| + |sigma| <= D3 (1 + |x|)
    growth = np.linalg.norm(spec.b(x), axis=1) + np.sqrt(np.sum(spec.sigma(x) ** 2, axis=(1, 2)))
    report.checks.append(_max_quotient("linear_growth", growth, 1.0 + size, x, prof.D3))

    # sigma structure
    report.checks.append(_separable_check(spec, x, prof.sigma_structure == "separable_ia"))
    sig = np.sqrt(np.sum(spec.sigma(x) ** 2, axis=(1, 2)))
    report.checks.append(
        _max_quotient(
            "sqrt_growth_ib", sig, np.sqrt(1.0 + size), x, prof.D2,
            required=prof.sigma_structure == "sqrt_growth_ib",
        )
    )

    if prof.quadratic:
        report.checks.extend(_relaxed_growth_checks(spec, x, times))
    else:
        best = (-1.0, x[0], 0.0)
        for t in times:
            q = (spec.g(t, x) + spec.h(t, x)) / (1.0 + size**prof.beta)
            k = int(np.argmax(q))
            if q[k] > best[0]:
                best = (float(q[k]), x[k], float(t))
        report.checks.append(
            AssumptionCheck(
                "sublinear_growth", best[0] <= prof.K1 * (1 + 1e-9), best[0], prof.K1,
                _witness(best[1], best[2]),
            )
        )

    report.checks.extend(_sign_checks(spec, x, times))

    failed = [c.name for c in report.checks if c.required and not c.passed]
    if failed:
        logger.info("GameSpec %r non-conforming: %s", spec.name, ", ".join(failed))
    else:
        logger.debug("GameSpec %r conforming over %d samples", spec.name, x.shape[0])
    return report


def _payoff_quotient(
    name: str, fn, xa: np.ndarray, xb: np.ndarray, dist: np.ndarray, times: np.ndarray,
    cost=None, bound: float | None = None,
) -> AssumptionCheck:
    """Largest |fn(t, xa) - fn(t, xb)| / (scale |xa - xb|) over times, scale = cost(t) or 1."""
    best: AssumptionCheck | None = None
    for t in times:
        scale = float(cost(t)) if cost is not None else 1.0
        check = _max_quotient(
            name, np.abs(fn(t, xa) - fn(t, xb)), scale * dist, xa, bound, float(t)
        )
        if best is None or check.value > best.value:
            best = check
    return best


def _separable_check(spec, x: np.ndarray, required: bool) -> AssumptionCheck:
    """sigma_ij may depend on x_i only: perturb every other coordinate."""
    d = spec.d
    base = spec.sigma(x)
    worst, where = 0.0, x[0]
    for k in range(d):
        shifted = x.copy()
        shifted[:, k] += 0.37
        change = np.abs(spec.sigma(shifted) - base)
        rows = [i for i in range(d) if i != k]
        if not rows:
            continue
        sub = change[:, rows, :].reshape(x.shape[0], -1).max(axis=1)
        j = int(np.argmax(sub))
        if sub[j] > worst:
            worst, where = float(sub[j]), x[j]
    return AssumptionCheck(
        "separable_ia", worst <= 1e-12, worst, 0.0, _witness(where), required=required
    )


def _relaxed_growth_checks(spec, x: np.ndarray, times: np.ndarray) -> list[AssumptionCheck]:
    prof = spec.profile
    K5 = float(prof.K5)
    size = np.linalg.norm(x, axis=1)
    checks = []

    def worst_over_times(fn):
        best = (-np.inf, x[0], 0.0)
        for t in times:
            q = fn(t)
            k = int(np.argmax(q))
            if q[k] > best[0]:
                best = (float(q[k]), x[k], float(t))
        return best

    value, pt, t = worst_over_times(lambda t: spec.h(t, x) / (1.0 + size**2))
    checks.append(AssumptionCheck("quadratic_growth_h", value <= K5, value, K5, _witness(pt, t)))

    value, pt, t = worst_over_times(lambda t: spec.g(t, x) / (1.0 + size))
    checks.append(AssumptionCheck("linear_growth_g", value <= K5, value, K5, _witness(pt, t)))

    xa, xb = _pairs(x)
    dist = np.linalg.norm(xa - xb, axis=1)
    if prof.variant == "A51_lipschitz_h":
        weight = dist
        name = "lipschitz_h"
    else:
        weight = (1.0 + np.linalg.norm(xa, axis=1) + np.linalg.norm(xb, axis=1)) ** prof.beta * dist
        name = "local_lipschitz_h"
    best = (-1.0, xa[0], 0.0)
    for t in times:
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(weight > 0, np.abs(spec.h(t, xa) - spec.h(t, xb)) / weight, 0.0)
        k = int(np.argmax(q))
        if q[k] > best[0]:
            best = (float(q[k]), xa[k], float(t))
    checks.append(AssumptionCheck(name, best[0] <= K5, best[0], K5, _witness(best[1], best[2])))

    # g(t,x) - g(s,x) <= K5 (t - s) for s < t, and likewise h
    for fname in ("g", "h"):
        fn = getattr(spec, fname)
        best = (-np.inf, x[0], 0.0)
        for s, t in zip(times[:-1], times[1:]):
            q = (fn(t, x) - fn(s, x)) / (t - s)
            k = int(np.argmax(q))
            if q[k] > best[0]:
                best = (float(q[k]), x[k], float(t))
        checks.append(
            AssumptionCheck(
                f"time_increment_{fname}", best[0] <= K5, best[0], K5, _witness(best[1], best[2])
            )
        )

    # h + d_t g + L g - r g >= -K5
    worst = (np.inf, x[0], 0.0)
    dt = max(spec.T * 1e-4, 1e-6)
    for t in times:
        lo, hi = max(t - dt, 0.0), min(t + dt, spec.T)
        gt = (spec.g(hi, x) - spec.g(lo, x)) / (hi - lo)
        grad = _spatial_gradient(spec.g, t, x)
        hess_diag = np.empty_like(grad)
        g0 = spec.g(t, x)
        step = 1e-3
        for k in range(spec.d):
            e = np.zeros(spec.d)
            e[k] = step
            hess_diag[:, k] = (spec.g(t, x + e) - 2 * g0 + spec.g(t, x - e)) / step**2
        sig = spec.sigma(x)
        a_diag = np.einsum("nij,nij->ni", sig, sig)
        gen = np.sum(spec.b(x) * grad, axis=1) + 0.5 * np.sum(a_diag * hess_diag, axis=1)
        if spec.d > 1:
            a = sig @ np.swapaxes(sig, 1, 2)
            for i in range(spec.d):
                for j in range(i + 1, spec.d):
                    ei = np.zeros(spec.d)
                    ej = np.zeros(spec.d)
                    ei[i] = step
                    ej[j] = step
                    mixed = (
                        spec.g(t, x + ei + ej) - spec.g(t, x + ei - ej)
                        - spec.g(t, x - ei + ej) + spec.g(t, x - ei - ej)
                    ) / (4 * step**2)
                    gen = gen + a[:, i, j] * mixed
        lower = spec.h(t, x) + gt + gen - spec.r * g0
        k = int(np.argmin(lower))
        if lower[k] < worst[0]:
            worst = (float(lower[k]), x[k], float(t))
    checks.append(
        AssumptionCheck(
            "generator_lower_bound", worst[0] >= -K5, worst[0], -K5, _witness(worst[1], worst[2])
        )
    )
    return checks


def _sign_checks(spec, x: np.ndarray, times: np.ndarray) -> list[AssumptionCheck]:
    fs = np.asarray(spec.f(times), dtype=float)
    increase = float(np.max(np.diff(fs))) if fs.size > 1 else 0.0
    checks = [
        AssumptionCheck("f_positive", bool(np.all(fs > 0)), float(fs.min()), 0.0),
        AssumptionCheck("f_nonincreasing", increase <= 1e-12, increase, 0.0),
    ]
    for name in ("g", "h"):
        fn = getattr(spec, name)
        low = min(float(np.min(fn(t, x))) for t in times)
        checks.append(AssumptionCheck(f"{name}_nonnegative", low >= 0.0, low, 0.0))
    return checks


def sample_box(d: int, half_width: float, n: int = 400, seed: int = 0) -> np.ndarray:
    """Deterministic sample of the box [-half_width, half_width]^d including its corners."""
    rng = np.random.default_rng(seed)
    corners = np.array(np.meshgrid(*([[-half_width, half_width]] * d), indexing="ij"))
    corners = corners.reshape(d, -1).T
    inner = rng.uniform(-half_width, half_width, size=(max(n - corners.shape[0], 0), d))
    return np.vstack([corners, inner])
