"""Truncated, mollified and cut-off payoffs (f, g, h)^{j,k}_m.

g_jkm = chi_k * (zeta_j * (g ^ m)) on a 1-d lattice of step 1 / (points_per_radius * j),
with zeta_j the bump kernel of radius 1/j and chi_k a smooth step that is 1
on B_{k-w} and 0 outside B_k. The band width w starts at 1 and doubles until
|grad g_jkm| <= min f_jkm holds on the whole lattice. f is truncated by m and
smoothed in time only.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from gamelab.exceptions import ConfigurationError
from gamelab.model.fields import TabulatedCost, TabulatedPayoff

logger = logging.getLogger(__name__)

POINTS_PER_RADIUS = 10
MAX_WIDENINGS = 12


def bump_kernel(radius: float, step: float) -> np.ndarray:
    """Standard bump exp(-1 / (1 - (r/radius)^2)) sampled on the lattice, summing to 1."""
    half = int(np.floor(radius / step))
    r = np.arange(-half, half + 1) * step / radius
    inside = np.abs(r) < 1.0
    weights = np.zeros_like(r)
    weights[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    if weights.sum() <= 0:
        raise ConfigurationError(f"lattice step {step:g} cannot resolve radius {radius:g}")
    return weights / weights.sum()


def smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, slope at most 2."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class MollifiedPayoffs:
    j: int
    k: float
    m: float
    f: TabulatedCost
    g: TabulatedPayoff
    h: TabulatedPayoff
    inner_radius: float
    band_width: float
    step: float
    kernel_mass: float

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.g.nodes)

    @property
    def f_min(self) -> float:
        return float(np.min(self.f.values))

    @property
    def compact_radius(self) -> float:
        """Radius of the ball where the cutoff is 1 and the error is measured."""
        return max(min(self.k - 2.0, self.inner_radius), 0.0)

    def sup_error(self, spec, radius: float | None = None) -> float:
        """sup over B_radius of |g_jkm - g ^ m| on the lattice."""
        radius = self.compact_radius if radius is None else radius
        x = self.x
        inside = np.abs(x) <= radius + 1e-12
        exact = np.minimum(np.asarray(spec.g(0.0, x[:, None]), dtype=float), self.m)
        return float(np.max(np.abs(np.asarray(self.g.values)[inside] - exact[inside])))

    def gradient_max(self, radius: float | None = None) -> float:
        """Largest |slope| of g_jkm between lattice nodes inside B_radius (default B_{k-1})."""
        radius = self.k - 1.0 if radius is None else radius
        x = self.x
        slopes = np.abs(np.diff(self.g.values)) / self.step
        mid = 0.5 * (x[1:] + x[:-1])
        inside = np.abs(mid) <= radius
        return float(slopes[inside].max()) if np.any(inside) else 0.0

    def spec_for(self, spec):
        return replace(
            spec, f=self.f, g=self.g, h=self.h,
            name=f"{spec.name}[j={self.j},k={self.k:g},m={self.m:g}]",
        )

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "k": self.k,
            "m": self.m,
            "inner_radius": self.inner_radius,
            "band_width": self.band_width,
            "step": self.step,
            "kernel_mass": self.kernel_mass,
            "f_min": self.f_min,
            "g_max": float(np.max(self.g.values)),
        }


def _mollify_cost(f, T: float, j: int, m: float, points_per_radius: int) -> TabulatedCost:
    n_t = max(200, int(np.ceil(T * points_per_radius * j)))
    t = np.linspace(0.0, T, n_t + 1)
    kernel = bump_kernel(1.0 / j, T / n_t)
    pad = kernel.shape[0] // 2
    capped = np.minimum(np.asarray(f(t), dtype=float), m)
    smooth = fftconvolve(np.pad(capped, pad, mode="edge"), kernel, mode="valid")
    floor = 0.5 * float(capped.min())
    values = np.minimum.accumulate(np.maximum(smooth, floor))
    return TabulatedCost(tuple(t.tolist()), tuple(values.tolist()))


def mollify_payoffs(
    spec,
    j: int,
    k: float,
    m: float,
    grad_tol: float = 1e-3,
    points_per_radius: int = POINTS_PER_RADIUS,
) -> MollifiedPayoffs:
    """Build (f, g, h)^{j,k}_m for a one-dimensional spec.

    Raises:
        ConfigurationError: j, k or m below 1, k below the mollifier radius,
            d != 1, time-dependent payoffs, or no cutoff band restoring
            |grad g| <= f
    """
    if j < 1 or k < 1:
        raise ConfigurationError(f"mollification needs j, k >= 1, got j={j}, k={k}")
    if m <= 0:
        raise ConfigurationError(f"truncation level must be positive, got m={m}")
    if k < 1.0 / j:
        raise ConfigurationError(f"cutoff radius {k} is smaller than mollifier radius {1 / j}")
    if spec.d != 1:
        raise ConfigurationError("payoff mollification lattices support d = 1 only")

    step = 1.0 / (points_per_radius * j)
    kernel = bump_kernel(1.0 / j, step)
    pad = kernel.shape[0] // 2
    n_out = int(np.ceil((k + 1.0) / step))
    x_wide = np.arange(-n_out - pad, n_out + pad + 1) * step
    x = x_wide[pad:-pad] if pad else x_wide
    pts = x_wide[:, None]

    g0 = np.asarray(spec.g(0.0, pts), dtype=float)
    h0 = np.asarray(spec.h(0.0, pts), dtype=float)
    for name, at_zero in (("g", g0), ("h", h0)):
        at_T = np.asarray(getattr(spec, name)(spec.T, pts), dtype=float)
        if not np.allclose(at_zero, at_T, atol=1e-12):
            raise ConfigurationError(f"mollification needs a time-independent {name}")

    def smoothed(values: np.ndarray) -> np.ndarray:
        out = fftconvolve(np.minimum(values, m), kernel, mode="valid")
        return np.clip(out, 0.0, None)

    g_smooth = smoothed(g0)
    h_smooth = smoothed(h0)
    f_jkm = _mollify_cost(spec.f, spec.T, j, m, points_per_radius)
    limit = float(np.min(f_jkm.values)) * (1.0 + grad_tol)

    r = np.abs(x)
    width = 1.0
    for _ in range(MAX_WIDENINGS):
        inner = k - width
        if inner < 0:
            break
        chi = smooth_step((k - r) / width)
        g_cut = chi * g_smooth
        worst = float(np.max(np.abs(np.diff(g_cut))) / step)
        if worst <= limit:
            logger.debug(
                "j=%d k=%g m=%g: band [%g, %g], max slope %.6g <= %.6g",
                j, k, m, inner, k, worst, limit,
            )
            nodes = tuple(x.tolist())
            return MollifiedPayoffs(
                j=int(j),
                k=float(k),
                m=float(m),
                f=f_jkm,
                g=TabulatedPayoff(nodes, tuple(g_cut.tolist())),
                h=TabulatedPayoff(nodes, tuple((chi * h_smooth).tolist())),
                inner_radius=float(inner),
                band_width=float(width),
                step=step,
                kernel_mass=float(kernel.sum()),
            )
        width *= 2.0
    raise ConfigurationError(
        f"no cutoff band inside B_{k:g} keeps |grad g_jkm| <= f (j={j}, m={m:g})"
    )
