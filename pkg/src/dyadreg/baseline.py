"""Dyadic Nadaraya-Watson regression of ``Y_ij`` on ``(X_i, X_j)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import DyadPanel
from .errors import NoLocalMass
from .kernels import GAUSSIAN, Bandwidths, get_kernel

__all__ = ["NwEstimate", "nw_mean", "nw_curve"]


@dataclass(frozen=True)
class NwEstimate:
    value: float
    mass: float


def _log_weights(panel, x1, x2, h, kern):
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != (panel.K,) or x2.shape != (panel.K,):
        raise ValueError(f"query points must have length K={panel.K}")
    la = np.sum(kern.log_density((x1[None, :] - panel.X) / h), axis=1)
    lb = np.sum(kern.log_density((x2[None, :] - panel.X) / h), axis=1)
    return la[panel.i] + lb[panel.j]


def nw_mean(panel: DyadPanel, x1, x2, bw, kernel=GAUSSIAN) -> NwEstimate:
    """Kernel-weighted mean of the outcomes near ``(x1, x2)``.

    Weights are the product kernel over both agents' covariates with
    bandwidth ``h_x``; ``h_y`` is unused.
    """
    bw = Bandwidths.coerce(bw)
    logw = _log_weights(panel, x1, x2, bw.h_x, get_kernel(kernel))
    top = np.max(logw)
    if not np.isfinite(top):
        raise NoLocalMass("no dyad has positive kernel weight at the query point")
    w = np.exp(logw - top)
    den = math.fsum(w.tolist())
    value = math.fsum((w * panel.y).tolist()) / den
    # rounding can push a convex combination one ulp outside the data range
    value = min(max(value, float(np.min(panel.y))), float(np.max(panel.y)))
    return NwEstimate(value, math.exp(top) * den)


def nw_curve(panel: DyadPanel, grid, x2, bw, kernel=GAUSSIAN, x1=None, coord=0):
    """``nw_mean`` along ``grid`` substituted into coordinate ``coord`` of ``x1``."""
    out = np.full(len(grid), np.nan)
    for k, t in enumerate(np.asarray(grid, dtype=float).tolist()):
        q = np.zeros(panel.K) if x1 is None else np.array(x1, dtype=float)
        q[coord] = t
        try:
            out[k] = nw_mean(panel, q, x2, bw, kernel).value
        except NoLocalMass:
            pass
    return out
