"""Kernel estimates of the distribution of ``Y_ij`` given dyad covariates.

The conditional CDF at ``(w1, w2)`` is a weighted average of integrated
kernels ``k1((y - Y_ij) / h_y)`` with y-free weights
``K2((w1 - W_i) / h_x, (w2 - W_j) / h_x)``. Because the weights do not
depend on ``y``, :class:`DyadConditional` computes them once and then
evaluates, differentiates and inverts the CDF cheaply.

With ``exact=True`` (the default for the module-level functions) sums use
:func:`math.fsum`, which is exactly rounded and hence independent of
summation order. Batch evaluation and the root finder use numpy's pairwise
sum over the panel's canonical dyad order instead, which is deterministic
and label-free but roughly a hundred times cheaper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .data import DyadPanel, SubvectorSpec
from .errors import BadProbability, BracketFailure, NoLocalMass
from .kernels import GAUSSIAN, Bandwidths, get_kernel

__all__ = [
    "ConditioningPoint",
    "CdfCurve",
    "DyadConditional",
    "joint_density",
    "dyad_density",
    "conditional_cdf",
    "conditional_pdf",
    "invert_cdf",
    "cdf_curve",
]

MAX_EXPANSIONS = 60


def _fsum(a) -> float:
    return math.fsum(a.tolist())


def _npsum(a) -> float:
    return float(np.sum(a))


@dataclass(frozen=True, eq=False)
class ConditioningPoint:
    """Values ``w1`` (sender) and ``w2`` (receiver) of the subvector ``spec``."""

    spec: SubvectorSpec
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        w1 = np.atleast_1d(np.asarray(self.w1, dtype=float)).copy()
        w2 = np.atleast_1d(np.asarray(self.w2, dtype=float)).copy()
        d = self.spec.dim
        if w1.shape != (d,) or w2.shape != (d,):
            raise ValueError(f"w1, w2 must have length {d}, got {w1.shape}, {w2.shape}")
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            raise ValueError("conditioning values must be finite")
        w1.setflags(write=False)
        w2.setflags(write=False)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    @classmethod
    def full(cls, x1, x2) -> "ConditioningPoint":
        """Condition on every covariate coordinate."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        return cls(SubvectorSpec.full(x1.shape[0]), x1, x2)

    @property
    def dim(self) -> int:
        return self.spec.dim

    def swapped(self) -> "ConditioningPoint":
        return ConditioningPoint(self.spec, self.w2, self.w1)


@dataclass(frozen=True, eq=False)
class CdfCurve:
    grid: np.ndarray
    values: np.ndarray


def _agent_log_weights(W, w, h_x, kern):
    return np.sum(kern.log_density((w[None, :] - W) / h_x), axis=1)


class DyadConditional:
    """Estimated conditional distribution of ``Y_ij`` given ``(W_i, W_j) = (w1, w2)``.

    Parameters
    ----------
    panel : DyadPanel
    cond : ConditioningPoint
    bw : Bandwidths or float or (h_x, h_y)
    kernel : KernelSpec or str
    exact : bool
        Exactly rounded sums (slow) instead of pairwise sums.

    Raises
    ------
    NoLocalMass
        If every dyad receives zero kernel weight.
    """

    def __init__(self, panel: DyadPanel, cond: ConditioningPoint, bw, kernel=GAUSSIAN,
                 exact: bool = True):
        cond.spec.check(panel.K)
        self.panel = panel
        self.cond = cond
        self.bw = Bandwidths.coerce(bw)
        self.kernel = get_kernel(kernel)
        W = panel.X[:, list(cond.spec.indices)]
        h_x = self.bw.h_x
        la = _agent_log_weights(W, cond.w1, h_x, self.kernel)
        lb = _agent_log_weights(W, cond.w2, h_x, self.kernel)
        logw = la[panel.i] + lb[panel.j]
        top = np.max(logw)
        if not np.isfinite(top):
            raise NoLocalMass(
                f"no dyad has positive kernel weight at w1={cond.w1.tolist()}, "
                f"w2={cond.w2.tolist()}")
        # rescaled so the largest weight is 1; ratios are unaffected
        self.log_scale = float(top)
        self.weights = np.exp(logw - top)
        self._sum = _fsum if exact else _npsum
        self._mass = self._sum(self.weights)
        self._mass_np = _npsum(self.weights)
        self.y = panel.y

    @property
    def local_mass(self) -> float:
        """Unscaled kernel-weight sum ``sum_{i != j} K2(...)``."""
        return math.exp(self.log_scale) * self._mass

    @property
    def density(self) -> float:
        """Dyad covariate density ``f(w1, w2)``: local mass over ``n h_x^(2 d_W)``."""
        n, d, h = self.panel.n, self.cond.dim, self.bw.h_x
        return math.exp(self.log_scale - 2 * d * math.log(h)) * self._mass / n

    def _z(self, y):
        return (y - self.y) / self.bw.h_y

    def _cdf1(self, y):
        return self._sum(self.weights * self.kernel.integrated(self._z(y))) / self._mass

    def _pdf1(self, y):
        num = self._sum(self.weights * self.kernel.density(self._z(y)))
        return num / (self.bw.h_y * self._mass)

    def _cdf_fast(self, y):
        return _npsum(self.weights * self.kernel.integrated(self._z(y))) / self._mass_np

    def cdf(self, y):
        """Conditional CDF at scalar or array ``y``."""
        if np.ndim(y) == 0:
            return self._cdf1(float(y))
        y = np.asarray(y, dtype=float)
        return np.array([self._cdf1(v) for v in y.ravel()]).reshape(y.shape)

    def pdf(self, y):
        """Conditional density at scalar or array ``y``."""
        if np.ndim(y) == 0:
            return self._pdf1(float(y))
        y = np.asarray(y, dtype=float)
        return np.array([self._pdf1(v) for v in y.ravel()]).reshape(y.shape)

    def bracket(self, s: float):
        """Interval ``[lo, hi]`` with ``F(lo) <= s <= F(hi)``, grown
        geometrically from the outcome range padded by ``h_y``."""
        h = self.bw.h_y
        lo, hi = float(np.min(self.y)) - h, float(np.max(self.y)) + h
        width = hi - lo
        for _ in range(MAX_EXPANSIONS + 1):
            flo, fhi = self._cdf_fast(lo), self._cdf_fast(hi)
            if flo <= s <= fhi:
                return lo, hi
            if flo > s:
                lo -= width
            if fhi < s:
                hi += width
            width *= 2.0
        raise BracketFailure(f"no bracket for s={s} after {MAX_EXPANSIONS} expansions")

    def _local_bracket(self, s):
        # the smoothed root sits within a few h_y of the weighted quantile
        # of the raw outcomes; accept this narrow bracket only if it holds
        order = self.panel.y_order
        cw = np.cumsum(self.weights[order])
        k = min(int(np.searchsorted(cw, s * cw[-1])), cw.size - 1)
        q = float(self.y[order[k]])
        pad = 8.0 * self.bw.h_y
        lo, hi = q - pad, q + pad
        if self._cdf_fast(lo) <= s <= self._cdf_fast(hi):
            return lo, hi
        return None

    def ppf(self, s: float, tol: float = 1e-9) -> float:
        """Solve ``F(y) = s`` to within ``tol`` on the probability scale.

        The root is unique for the Gaussian kernel. Under a compactly
        supported kernel the CDF can be flat at level ``s``; the midpoint of
        the flat interval is returned.
        """
        s = float(s)
        if not 0.0 < s < 1.0:
            raise BadProbability(f"probability must lie in (0, 1), got {s}")
        lo, hi = self._local_bracket(s) or self.bracket(s)
        f = lambda v: self._cdf_fast(v) - s  # noqa: E731
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            root = lo
        elif fhi == 0.0:
            root = hi
        else:
            # xtol below tol * h_y / sup K1 keeps the CDF error under tol
            root = brentq(f, lo, hi, xtol=0.25 * tol * self.bw.h_y,
                          rtol=4 * np.finfo(float).eps, maxiter=500)
        root = self._polish(root, s, tol, lo, hi)
        if self.kernel.compact:
            root = self._flat_midpoint(root)
        return root

    def _polish(self, root, s, tol, lo, hi):
        # bisection fallback; only reached if the two summation modes
        # disagree at the tolerance scale
        for _ in range(200):
            v = self._cdf1(root)
            if abs(v - s) <= tol:
                return root
            if v < s:
                lo = root
            else:
                hi = root
            root = 0.5 * (lo + hi)
        raise BracketFailure(f"inversion at s={s} did not reach tol={tol}")

    def _flat_midpoint(self, root):
        h = self.bw.h_y * self.kernel.support
        active = self.weights > 0
        ya = self.y[active]
        if np.any(np.abs(root - ya) < h):
            return root
        below = ya[ya + h <= root]
        above = ya[ya - h >= root]
        if below.size == 0 or above.size == 0:
            return root
        return 0.5 * (float(np.max(below)) + h + float(np.min(above)) - h)


def joint_density(panel: DyadPanel, y: float, x1, x2, bw, kernel=GAUSSIAN) -> float:
    """Kernel estimate of the density of ``(Y_ij, X_i, X_j)`` at ``(y, x1, x2)``."""
    bw = Bandwidths.coerce(bw)
    kern = get_kernel(kernel)
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    K = panel.K
    a = np.prod(kern.density((x1[None, :] - panel.X) / bw.h_x), axis=1)
    b = np.prod(kern.density((x2[None, :] - panel.X) / bw.h_x), axis=1)
    ky = kern.density((y - panel.y) / bw.h_y)
    total = _fsum(ky * a[panel.i] * b[panel.j])
    return total / (panel.n * bw.h_y * bw.h_x ** (2 * K))


def dyad_density(panel: DyadPanel, cond: ConditioningPoint, bw, kernel=GAUSSIAN) -> float:
    """Kernel estimate of the density of ``(W_i, W_j)`` at ``(w1, w2)``."""
    bw = Bandwidths.coerce(bw)
    kern = get_kernel(kernel)
    cond.spec.check(panel.K)
    W = panel.X[:, list(cond.spec.indices)]
    a = np.prod(kern.density((cond.w1[None, :] - W) / bw.h_x), axis=1)
    b = np.prod(kern.density((cond.w2[None, :] - W) / bw.h_x), axis=1)
    return _fsum(a[panel.i] * b[panel.j]) / (panel.n * bw.h_x ** (2 * cond.dim))


def conditional_cdf(panel, cond, y, bw, kernel=GAUSSIAN):
    return DyadConditional(panel, cond, bw, kernel).cdf(y)


def conditional_pdf(panel, cond, y, bw, kernel=GAUSSIAN):
    return DyadConditional(panel, cond, bw, kernel).pdf(y)


def invert_cdf(panel, cond, s, bw, tol=1e-9, kernel=GAUSSIAN) -> float:
    return DyadConditional(panel, cond, bw, kernel).ppf(s, tol)


def cdf_curve(panel, cond, grid, bw, kernel=GAUSSIAN) -> CdfCurve:
    grid = np.sort(np.asarray(grid, dtype=float))
    values = DyadConditional(panel, cond, bw, kernel).cdf(grid)
    # exact monotonicity already holds; accumulate to guard against misuse
    return CdfCurve(grid, np.maximum.accumulate(values))
