"""Plug-in asymptotic variances, normal confidence intervals, rate checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.stats import norm as _normal

from .conditional import ConditioningPoint, DyadConditional, dyad_density
from .data import DyadPanel
from .errors import DegenerateDensity, NoLocalMass
from .kernels import GAUSSIAN, Bandwidths, get_kernel, roughness_constant
from .structural import estimate_g

__all__ = [
    "AsymptoticVariance",
    "RateDiagnostics",
    "sigma_F",
    "sigma_g",
    "confidence_interval",
    "rate_diagnostics",
]


def _z(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return float(_normal.ppf(0.5 * (1.0 + level)))


@dataclass(frozen=True)
class AsymptoticVariance:
    """``sigma / scale`` approximates the sampling variance of ``estimate``.

    ``scale`` is ``n h_x^(2d)`` with ``d`` the conditioning dimension.
    """

    sigma: float
    d: int
    scale: float
    level: float = 0.95
    estimate: float = math.nan

    @property
    def std_error(self) -> float:
        return math.sqrt(self.sigma / self.scale)

    @property
    def half_width(self) -> float:
        return _z(self.level) * self.std_error


def sigma_F(panel: DyadPanel, cond: ConditioningPoint, y: float, bw, kernel=GAUSSIAN,
            level: float = 0.95) -> AsymptoticVariance:
    """Plug-in variance of the conditional CDF estimate at ``(cond, y)``:
    ``F (1 - F) / f(w1, w2)`` times the kernel roughness over the ``2 d_W``
    conditioning coordinates."""
    bw = Bandwidths.coerce(bw)
    kern = get_kernel(kernel)
    F = DyadConditional(panel, cond, bw, kern).cdf(y)
    f = dyad_density(panel, cond, bw, kern)
    if not f >= 1e-300:
        raise NoLocalMass(f"covariate density {f!r} too small at the conditioning point")
    d = cond.dim
    sigma = F * (1.0 - F) / f * roughness_constant(2 * d, kern)
    return AsymptoticVariance(sigma, d, panel.n * bw.h_x ** (2 * d), level, F)


def sigma_g(panel: DyadPanel, x_i, x_j, e: float, regime, norm, bw, tol: float = 1e-9,
            kernel=GAUSSIAN, xbar0=None, level: float = 0.95) -> AsymptoticVariance:
    """Plug-in variance of the structural-function estimate at ``(x_i, x_j, e)``.

    Combines the reference probability ``s``, the conditional density of
    ``Y`` at the estimate, and the covariate densities at the query point
    and at the reference point, each included when its conditioning
    dimension attains the maximum ``d``.

    Raises
    ------
    DegenerateDensity
        When the conditional density at the estimate is below ``1e-12``.
    """
    bw = Bandwidths.coerce(bw)
    kern = get_kernel(kernel)
    est = estimate_g(panel, x_i, x_j, e, regime, norm, bw, tol, kern, xbar0)
    dens = DyadConditional(panel, est.query, bw, kern).pdf(est.value)
    if not dens >= 1e-12:
        raise DegenerateDensity(f"conditional density {dens!r} at g-hat={est.value!r}")
    d_q, d_r = est.query.dim, est.reference.dim
    d = max(d_q, d_r)
    bracket = 0.0
    if d_q == d:
        bracket += 1.0 / _density_or_fail(panel, est.query, bw, kern)
    if d_r == d:
        bracket += 1.0 / _density_or_fail(panel, est.reference, bw, kern)
    s = est.probability
    sigma = s * (1.0 - s) / dens ** 2 * bracket * roughness_constant(2 * d, kern)
    return AsymptoticVariance(sigma, d, panel.n * bw.h_x ** (2 * d), level, est.value)


def _density_or_fail(panel, cond, bw, kern):
    f = dyad_density(panel, cond, bw, kern)
    if not f >= 1e-300:
        raise NoLocalMass(f"covariate density {f!r} too small at the conditioning point")
    return f


def confidence_interval(estimate: float, av: AsymptoticVariance, level: float = 0.95):
    """Normal-approximation interval ``estimate -/+ z sqrt(sigma / scale)``."""
    half = _z(level) * math.sqrt(av.sigma / av.scale)
    return estimate - half, estimate + half


@dataclass(frozen=True)
class RateDiagnostics:
    """Bandwidth-rate expressions evaluated at a given ``(N, h)``.

    Only ``log_rate`` carries a pass/warn threshold; the others are
    reported for inspection.
    """

    N: int
    n: int
    log_rate: float
    var_scale: float
    bias_scale: float
    combined: float
    window_lower: float
    window_upper: float
    warnings: tuple = field(default=())

    LOG_RATE_WARN = 0.1

    @property
    def ok(self) -> bool:
        return not self.warnings

    def rows(self):
        return [
            ("N", self.N),
            ("n", self.n),
            ("log(n)/(n h^(2K+1))", self.log_rate),
            ("n h^(2 d_W)", self.var_scale),
            ("n h^(2 (d_W + s))", self.bias_scale),
            ("n h^(2 d_W) (sqrt(log(n)/(n h^(2K+1))) + h^s)^2", self.combined),
            ("N h^4", self.window_lower),
            ("N h", self.window_upper),
            ("status", "warn" if self.warnings else "pass"),
        ]


def rate_diagnostics(N: int, K: int, d_W: int, s_order: int, bw) -> RateDiagnostics:
    """Evaluate the bandwidth-rate expressions for a panel of ``N`` agents.

    Covariate powers use ``h_x``; the single outcome factor in
    ``h^(2K+1)`` uses ``h_y``. A scalar ``bw`` sets both.
    """
    if min(N, K, d_W, s_order) < 1 or N < 2:
        raise ValueError("N >= 2 and K, d_W, s_order >= 1 are required")
    bw = Bandwidths.coerce(bw)
    hx, hy = bw.h_x, bw.h_y
    n = N * (N - 1)
    log_rate = math.log(n) / (n * hx ** (2 * K) * hy)
    var_scale = n * hx ** (2 * d_W)
    bias_scale = n * hx ** (2 * (d_W + s_order))
    combined = var_scale * (math.sqrt(log_rate) + hx ** s_order) ** 2
    warnings = []
    if log_rate > RateDiagnostics.LOG_RATE_WARN:
        warnings.append(f"log(n)/(n h^(2K+1)) = {log_rate:.4g} exceeds "
                        f"{RateDiagnostics.LOG_RATE_WARN}")
    return RateDiagnostics(N, n, log_rate, var_scale, bias_scale, combined,
                           N * hx ** 4, N * hx, tuple(warnings))
