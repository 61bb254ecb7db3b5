"""Scalar kernels, their antiderivatives, product kernels and bandwidths."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "KernelSpec",
    "GAUSSIAN",
    "EPANECHNIKOV",
    "get_kernel",
    "Bandwidths",
    "k1_density",
    "k1_integrated",
    "product_kernel",
    "rule_of_thumb",
    "roughness_constant",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _gauss_pdf(u):
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _gauss_logpdf(u):
    return -0.5 * u * u - _LOG_SQRT_2PI


def _epa_pdf(u):
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def _epa_logpdf(u):
    inside = np.abs(u) < 1.0
    with np.errstate(divide="ignore"):
        return np.where(inside, np.log(0.75 * np.clip(1.0 - u * u, 0.0, None)), -np.inf)


def _epa_cdf(u):
    v = np.clip(u, -1.0, 1.0)
    return 0.5 + 0.75 * (v - v ** 3 / 3.0)


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric second-order scalar kernel.

    ``roughness1`` is ``int K(u)^2 du``; ``support`` is the half-width of
    the support (``inf`` for the Gaussian).
    """

    name: str
    roughness1: float
    support: float
    order: int = 2

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support)

    def density(self, u):
        return _PDF[self.name](np.asarray(u, dtype=float))

    def log_density(self, u):
        return _LOGPDF[self.name](np.asarray(u, dtype=float))

    def integrated(self, u):
        return _CDF[self.name](np.asarray(u, dtype=float))


GAUSSIAN = KernelSpec("gaussian", 1.0 / (2.0 * math.sqrt(math.pi)), math.inf)
EPANECHNIKOV = KernelSpec("epanechnikov", 0.6, 1.0)

_PDF = {"gaussian": _gauss_pdf, "epanechnikov": _epa_pdf}
_LOGPDF = {"gaussian": _gauss_logpdf, "epanechnikov": _epa_logpdf}
_CDF = {"gaussian": ndtr, "epanechnikov": _epa_cdf}
_KERNELS = {k.name: k for k in (GAUSSIAN, EPANECHNIKOV)}


def get_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    try:
        return _KERNELS[str(kernel).lower()]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}") from None


@dataclass(frozen=True)
class Bandwidths:
    """Covariate bandwidth ``h_x`` (shared by all coordinates of both
    agents) and outcome bandwidth ``h_y``."""

    h_x: float
    h_y: float
    source: str = "manual"

    def __post_init__(self):
        for name in ("h_x", "h_y"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def rule_of_thumb(cls, N: int, n: int | None = None) -> "Bandwidths":
        """``h_x = 1.06 N^(-1/5)``, ``h_y = 1.06 n^(-1/5)`` with ``n`` the
        dyad count (``N(N-1)`` by default)."""
        if n is None:
            n = N * (N - 1)
        return cls(rule_of_thumb(N), rule_of_thumb(n), "rule-of-thumb")

    @classmethod
    def coerce(cls, bw) -> "Bandwidths":
        if isinstance(bw, Bandwidths):
            return bw
        if np.ndim(bw) == 0:
            return cls(float(bw), float(bw))
        h_x, h_y = bw
        return cls(h_x, h_y)


def k1_density(u, kernel=GAUSSIAN):
    """Scalar kernel density ``K1(u)``."""
    out = get_kernel(kernel).density(u)
    return float(out) if np.ndim(out) == 0 else out


def k1_integrated(u, kernel=GAUSSIAN):
    """Integrated kernel ``int_{-inf}^u K1(s) ds``."""
    out = get_kernel(kernel).integrated(u)
    return float(out) if np.ndim(out) == 0 else out


def product_kernel(u, kernel=GAUSSIAN) -> float:
    """Product of ``K1`` over the coordinates of ``u`` (1 for an empty ``u``).

    A trailing axis is reduced, so ``u`` of shape ``(m, d)`` yields ``m``
    values.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u[None]
    out = np.prod(get_kernel(kernel).density(u), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def rule_of_thumb(sample_size: int) -> float:
    if sample_size < 1:
        raise ValueError(f"sample size must be >= 1, got {sample_size}")
    return 1.06 * float(sample_size) ** -0.2


def roughness_constant(d: int, kernel=GAUSSIAN) -> float:
    """``int (int K(s, t) dt)^2 ds`` over ``s`` in R^d for a product kernel,
    i.e. ``(int K1^2)^d``."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return get_kernel(kernel).roughness1 ** d
