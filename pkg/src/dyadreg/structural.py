"""Estimators of the error distribution ``F_e`` and the structural function ``g``.

Both are read off the estimated conditional distribution of ``Y_ij``:

* ``F_e(e)`` is the conditional CDF at a *reference* conditioning point
  fixed by the normalization, evaluated at ``e`` (fixed-point
  normalization) or at ``(e / ebar) * alpha`` with the ``X1`` block scaled
  by ``e / ebar`` (homogeneous normalization);
* ``g(x_i, x_j, e)`` is the quantile, at level ``F_e(e)``, of the
  conditional distribution of ``Y_ij`` given ``(x_i, x_j)``.

When ``g`` does not depend on ``X0`` only the ``X1`` block is conditioned
on; otherwise the full covariate vector is, with ``X0`` fixed at the
query values (conditional independence) or at reference values ``xbar0``
(full independence).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from .conditional import ConditioningPoint, DyadConditional
from .data import DyadPanel, Partition, SubvectorSpec
from .errors import BadProbability, BracketFailure, DyadError, SignMismatch
from .kernels import GAUSSIAN, Bandwidths, get_kernel

__all__ = [
    "Independence",
    "Regime",
    "FixedPoint",
    "Homogeneous",
    "StructuralEstimate",
    "GSliceInX",
    "GSliceInE",
    "FeSlice",
    "CurveTable",
    "error_cdf_reference",
    "estimate_error_cdf",
    "estimate_g",
    "estimate_curves",
]


class Independence(str, Enum):
    COND_X0 = "cond-x0"  # e independent of X1 given X0
    FULL = "full"        # e independent of X


@dataclass(frozen=True)
class Regime:
    independence: Independence = Independence.FULL
    g_depends_on_x0: bool = False

    def __post_init__(self):
        object.__setattr__(self, "independence", Independence(self.independence))


def _vec(v):
    a = np.atleast_1d(np.asarray(v, dtype=float)).copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FixedPoint:
    """``g(x0_i, xbar1_i, x0_j, xbar1_j, e) = e`` for all ``x0``."""

    partition: Partition
    xbar1_i: np.ndarray
    xbar1_j: np.ndarray

    def __post_init__(self):
        for name in ("xbar1_i", "xbar1_j"):
            v = _vec(getattr(self, name))
            if v.shape != (len(self.partition.x1),):
                raise ValueError(f"{name} must have length {len(self.partition.x1)}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True, eq=False)
class Homogeneous:
    """``g(x0_i, l*xbar1_i, x0_j, l*xbar1_j, l*ebar) = l*alpha`` for ``l >= 0``."""

    partition: Partition
    xbar1_i: np.ndarray
    xbar1_j: np.ndarray
    ebar: float
    alpha: float

    def __post_init__(self):
        for name in ("xbar1_i", "xbar1_j"):
            v = _vec(getattr(self, name))
            if v.shape != (len(self.partition.x1),):
                raise ValueError(f"{name} must have length {len(self.partition.x1)}")
            object.__setattr__(self, name, v)
        if float(self.ebar) == 0.0:
            raise ValueError("ebar must be nonzero")
        object.__setattr__(self, "ebar", float(self.ebar))
        object.__setattr__(self, "alpha", float(self.alpha))


Normalization = Union[FixedPoint, Homogeneous]


@dataclass(frozen=True, eq=False)
class StructuralEstimate:
    """Estimate of ``g`` at one query, with the pieces used to build it.

    ``probability`` is the reference CDF value fed to the inversion and
    ``local_mass`` the smaller kernel-weight sum of the two conditional
    distributions involved.
    """

    value: float
    x_i: np.ndarray
    x_j: np.ndarray
    e: float
    local_mass: float
    probability: float
    query: ConditioningPoint
    reference: ConditioningPoint
    reference_y: float


# -- conditioning points -------------------------------------------------------

def _uses_x0(regime: Regime, part: Partition) -> bool:
    if regime.g_depends_on_x0 and not part.x0:
        if regime.independence is Independence.COND_X0:
            raise ValueError("conditional independence on X0 with g depending on X0 "
                             "needs a nonempty X0 block")
        return False
    return regime.g_depends_on_x0


def _default_xbar0(panel: DyadPanel, part: Partition):
    m = panel.X[:, list(part.x0)].mean(axis=0)
    return m, m


def _check_partition(panel, norm):
    if norm.partition.K != panel.K:
        raise ValueError(f"partition covers K={norm.partition.K}, panel has K={panel.K}")


def _reference(panel, e, regime, norm, x0_pair):
    """Reference conditioning point and outcome argument for ``F_e(e)``."""
    part = norm.partition
    _check_partition(panel, norm)
    if isinstance(norm, Homogeneous):
        lam = e / norm.ebar
        if not lam > 0:
            raise SignMismatch(f"e={e} and ebar={norm.ebar} must share a sign")
        c_i, c_j, y_arg = lam * norm.xbar1_i, lam * norm.xbar1_j, lam * norm.alpha
    else:
        c_i, c_j, y_arg = norm.xbar1_i, norm.xbar1_j, float(e)
    if not _uses_x0(regime, part):
        return ConditioningPoint(SubvectorSpec(part.x1), c_i, c_j), y_arg
    if x0_pair is None:
        if regime.independence is Independence.COND_X0:
            raise ValueError("x0_pair is required under conditional independence on X0")
        x0_pair = _default_xbar0(panel, part)
    x0_i, x0_j = (np.atleast_1d(np.asarray(v, dtype=float)) for v in x0_pair)
    if x0_i.shape != (len(part.x0),) or x0_j.shape != (len(part.x0),):
        raise ValueError(f"x0 values must have length {len(part.x0)}")
    w1, w2 = np.empty(panel.K), np.empty(panel.K)
    w1[list(part.x0)], w2[list(part.x0)] = x0_i, x0_j
    w1[list(part.x1)], w2[list(part.x1)] = c_i, c_j
    return ConditioningPoint(SubvectorSpec.full(panel.K), w1, w2), y_arg


def _query(panel, x_i, x_j, regime, part):
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    x_j = np.atleast_1d(np.asarray(x_j, dtype=float))
    if x_i.shape != (panel.K,) or x_j.shape != (panel.K,):
        raise ValueError(f"x_i, x_j must have length K={panel.K}")
    if _uses_x0(regime, part):
        return ConditioningPoint(SubvectorSpec.full(panel.K), x_i, x_j)
    idx = list(part.x1)
    return ConditioningPoint(SubvectorSpec(part.x1), x_i[idx], x_j[idx])


class _Evaluator:
    """Shares conditional distributions across queries on one panel."""

    def __init__(self, panel, bw, kernel, tol):
        self.panel = panel
        self.bw = Bandwidths.coerce(bw)
        self.kernel = get_kernel(kernel)
        self.tol = tol
        self._cache = {}

    def conditional(self, cond: ConditioningPoint) -> DyadConditional:
        key = (cond.spec.indices, cond.w1.tobytes(), cond.w2.tobytes())
        dist = self._cache.get(key)
        if dist is None:
            if len(self._cache) > 256:
                self._cache.clear()
            dist = self._cache[key] = DyadConditional(self.panel, cond, self.bw, self.kernel,
                                                      exact=False)
        return dist

    def error_cdf(self, e, regime, norm, x0_pair=None):
        ref, y_arg = _reference(self.panel, float(e), regime, norm, x0_pair)
        dist = self.conditional(ref)
        return dist.cdf(y_arg), dist

    def g(self, x_i, x_j, e, regime, norm, xbar0=None) -> StructuralEstimate:
        part = norm.partition
        _check_partition(self.panel, norm)
        q = _query(self.panel, x_i, x_j, regime, part)
        x0_pair = None
        if _uses_x0(regime, part):
            idx = list(part.x0)
            if regime.independence is Independence.COND_X0:
                x0_pair = (np.asarray(x_i, float)[idx], np.asarray(x_j, float)[idx])
            else:
                x0_pair = xbar0
        ref, y_arg = _reference(self.panel, float(e), regime, norm, x0_pair)
        ref_dist = self.conditional(ref)
        s = ref_dist.cdf(y_arg)
        q_dist = self.conditional(q)
        try:
            value = q_dist.ppf(s, self.tol)
        except BadProbability:
            raise BracketFailure(
                f"reference probability {s!r} at e={e} leaves (0, 1); quantile unbounded"
            ) from None
        return StructuralEstimate(
            value=value, x_i=_vec(x_i), x_j=_vec(x_j), e=float(e),
            local_mass=min(ref_dist.local_mass, q_dist.local_mass),
            probability=s, query=q, reference=ref, reference_y=y_arg)


def error_cdf_reference(panel: DyadPanel, e: float, regime: Regime, norm: Normalization,
                        x0_pair=None):
    """Conditioning point and outcome argument at which the conditional
    CDF of ``Y`` equals ``F_e(e)``."""
    return _reference(panel, float(e), regime, norm, x0_pair)


def estimate_error_cdf(panel: DyadPanel, e: float, regime: Regime, norm: Normalization,
                       x0_pair=None, bw=None, kernel=GAUSSIAN) -> float:
    """Estimated ``F_e(e)`` (conditional on ``x0_pair`` where applicable).

    Parameters
    ----------
    x0_pair : (x0_i, x0_j), optional
        ``X0`` values to condition on when ``g`` depends on ``X0``. Under
        conditional independence they are required; under full
        independence they act as the reference ``xbar0`` and default to
        the sample mean of the ``X0`` columns.
    """
    return _Evaluator(panel, _need_bw(bw), kernel, None).error_cdf(e, regime, norm, x0_pair)[0]


def estimate_g(panel: DyadPanel, x_i, x_j, e: float, regime: Regime, norm: Normalization,
               bw=None, tol: float = 1e-9, kernel=GAUSSIAN, xbar0=None) -> StructuralEstimate:
    """Estimated ``g(x_i, x_j, e)``.

    Under conditional independence the ``X0`` blocks of the query supply
    the ``X0`` conditioning values; under full independence ``xbar0``
    (default: sample mean of the ``X0`` columns) does.
    """
    return _Evaluator(panel, _need_bw(bw), kernel, tol).g(x_i, x_j, e, regime, norm, xbar0)


def _need_bw(bw):
    if bw is None:
        raise ValueError("bandwidths are required")
    return bw


# -- batch evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class GSliceInX:
    """``x -> g(x_i(x), x_j, e)`` where ``x`` replaces coordinate ``coord`` of ``x_i``."""

    x_j: tuple
    e: float
    x_i: Optional[tuple] = None
    coord: int = 0


@dataclass(frozen=True)
class GSliceInE:
    """``e -> g(x_i, x_j, e)``."""

    x_i: tuple
    x_j: tuple


@dataclass(frozen=True)
class FeSlice:
    """``e -> F_e(e)``."""

    x0_pair: Optional[tuple] = None


@dataclass(eq=False)
class CurveTable:
    """Pointwise estimates along a grid; failed points hold NaN and a reason."""

    point: np.ndarray
    estimate: np.ndarray
    local_mass: np.ndarray
    reason: list = field(default_factory=list)

    @property
    def missing(self) -> int:
        return int(np.sum(np.isnan(self.estimate)))


def estimate_curves(panel: DyadPanel, slice_, grid, regime: Regime, norm: Normalization,
                    bw, tol: float = 1e-9, kernel=GAUSSIAN, xbar0=None) -> CurveTable:
    """Evaluate ``g`` or ``F_e`` along ``grid``; per-point failures are
    recorded rather than raised."""
    grid = np.asarray(grid, dtype=float)
    ev = _Evaluator(panel, bw, kernel, tol)
    est = np.full(grid.shape, np.nan)
    mass = np.full(grid.shape, np.nan)
    reasons = [""] * grid.size
    for k, t in enumerate(grid.tolist()):
        try:
            if isinstance(slice_, FeSlice):
                v, dist = ev.error_cdf(t, regime, norm, slice_.x0_pair)
                est[k], mass[k] = v, dist.local_mass
                continue
            if isinstance(slice_, GSliceInX):
                x_i = np.zeros(panel.K) if slice_.x_i is None else np.array(slice_.x_i, float)
                x_i[slice_.coord] = t
                r = ev.g(x_i, slice_.x_j, slice_.e, regime, norm, xbar0)
            elif isinstance(slice_, GSliceInE):
                r = ev.g(slice_.x_i, slice_.x_j, t, regime, norm, xbar0)
            else:
                raise TypeError(f"unknown slice {slice_!r}")
            est[k], mass[k] = r.value, r.local_mass
        except DyadError as err:
            reasons[k] = type(err).__name__
    return CurveTable(grid, est, mass, reasons)
