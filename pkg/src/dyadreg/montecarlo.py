"""Monte Carlo study of the estimators on a homogeneous gravity-type design.

Data-generating process::

    X_i  ~ N(6, 1)        i = 1..N
    e_ij ~ N(-6, 1)       every ordered pair i != j
    Y_ij = -0.3 * X_i**2 * X_j**2 * e_ij**-3

The structural function is homogeneous of degree one in ``(x_i, x_j, e)``
and ``g(6, 6, -6) = 1.8``, which pins the homogeneous normalization.
Each replication estimates three curves: ``g(x, 5, -6)`` over ``x`` (with
the Nadaraya-Watson mean alongside), ``g(4, 5, e)`` over ``e`` and
``F_e(e)`` over ``e``.

Replication ``r`` draws from ``SeedSequence(seed, spawn_key=(r,))``, so
every replication is a pure function of ``(seed, r)`` and results do not
depend on how many workers ran them.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .baseline import nw_curve
from .data import AgentTable, DyadPanel, Partition, complete_panel, make_grid
from .errors import DyadError, Singularity
from .kernels import Bandwidths, get_kernel
from .inference import confidence_interval, sigma_F
from .structural import (FeSlice, GSliceInE, GSliceInX, Homogeneous, Independence, Regime,
                         estimate_curves, estimate_error_cdf, estimate_g, error_cdf_reference)

__all__ = [
    "StudyConfig",
    "StudyResult",
    "CoverageResult",
    "simulate_dgp",
    "true_g",
    "true_error_cdf",
    "run_study",
    "summarize",
    "write_study",
    "coverage_study",
]

SINGULARITY_GUARD = 1e-8
_GRID_KEY = 2 ** 32 - 1  # spawn key reserved for random grids


@dataclass
class StudyConfig:
    N: int = 100
    replications: int = 100
    seed: int | None = None
    grid_points: int = 100
    grid_mode: str = "equispaced"
    x_range: tuple = (4.0, 8.0)
    e_range: tuple = (-8.0, -4.0)
    fig1_xj: float = 5.0
    fig1_e: float = -6.0
    fig2_xi: float = 4.0
    fig2_xj: float = 5.0
    xbar1: float = 6.0
    ebar: float = -6.0
    alpha: float = 1.8
    coefficient: float = -0.3
    x_mean: float = 6.0
    x_sd: float = 1.0
    e_mean: float = -6.0
    e_sd: float = 1.0
    kernel: str = "gaussian"
    bandwidth_rule: str = "rot"
    h_x: float | None = None
    h_y: float | None = None
    tol: float = 1e-9

    def __post_init__(self):
        self.x_range = tuple(float(v) for v in self.x_range)
        self.e_range = tuple(float(v) for v in self.e_range)
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if self.grid_points < 1:
            raise ValueError("grids must be nonempty")
        if self.bandwidth_rule not in ("rot", "manual"):
            raise ValueError(f"bandwidth_rule must be 'rot' or 'manual', got {self.bandwidth_rule!r}")
        if self.bandwidth_rule == "manual" and (self.h_x is None or self.h_y is None):
            raise ValueError("manual bandwidths need both h_x and h_y")
        get_kernel(self.kernel)

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown study config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["x_range"], d["e_range"] = list(self.x_range), list(self.e_range)
        return d

    def bandwidths(self) -> Bandwidths:
        if self.bandwidth_rule == "manual":
            return Bandwidths(self.h_x, self.h_y, "manual")
        return Bandwidths.rule_of_thumb(self.N)

    def normalization(self) -> Homogeneous:
        return Homogeneous(Partition.all_x1(1), [self.xbar1], [self.xbar1],
                           self.ebar, self.alpha)

    def grids(self):
        if self.seed is None:
            raise ValueError("a study needs a seed")
        ss = np.random.SeedSequence(self.seed, spawn_key=(_GRID_KEY,))
        sx, se = ss.spawn(2)
        x = make_grid(*self.x_range, self.grid_points, self.grid_mode, sx)
        e = make_grid(*self.e_range, self.grid_points, self.grid_mode, se)
        return x, e


REGIME = Regime(Independence.FULL, g_depends_on_x0=False)


def replication_seed(seed: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(int(r),))


def _draw(N, seed, coefficient, x_mean, x_sd, e_mean, e_sd):
    rng = np.random.default_rng(seed)
    X = rng.normal(x_mean, x_sd, N)
    off = ~np.eye(N, dtype=bool)
    e = rng.normal(e_mean, e_sd, N * (N - 1))
    redraws = 0
    bad = np.abs(e) < SINGULARITY_GUARD
    while np.any(bad):
        redraws += int(np.sum(bad))
        e[bad] = rng.normal(e_mean, e_sd, int(np.sum(bad)))
        bad = np.abs(e) < SINGULARITY_GUARD
    E = np.zeros((N, N))
    E[off] = e
    Y = np.zeros((N, N))
    Xi, Xj = np.meshgrid(X, X, indexing="ij")
    Y[off] = coefficient * Xi[off] ** 2 * Xj[off] ** 2 * E[off] ** -3.0
    return complete_panel(AgentTable.from_array(X), Y), redraws


def simulate_dgp(N: int, seed, coefficient=-0.3, x_mean=6.0, x_sd=1.0, e_mean=-6.0,
                 e_sd=1.0, return_redraws=False):
    """Draw one complete panel of ``N`` agents.

    Errors closer to zero than ``1e-8`` are redrawn; pass
    ``return_redraws=True`` to also get the number of redraws.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    panel, redraws = _draw(N, seed, coefficient, x_mean, x_sd, e_mean, e_sd)
    return (panel, redraws) if return_redraws else panel


def true_g(x, y, e, coefficient=-0.3):
    """``coefficient * x^2 * y^2 * e^-3``."""
    e_arr = np.asarray(e, dtype=float)
    if np.any(e_arr == 0):
        raise Singularity("true g is undefined at e = 0")
    out = coefficient * np.square(x) * np.square(y) * e_arr ** -3.0
    return float(out) if np.ndim(out) == 0 else out


def true_error_cdf(e, mean=-6.0, sd=1.0):
    out = ndtr((np.asarray(e, dtype=float) - mean) / sd)
    return float(out) if np.ndim(out) == 0 else out


def _cfg_panel(cfg: StudyConfig, seed):
    return _draw(cfg.N, seed, cfg.coefficient, cfg.x_mean, cfg.x_sd, cfg.e_mean, cfg.e_sd)


def _replicate(args):
    cfg, r, x_grid, e_grid = args
    panel, redraws = _cfg_panel(cfg, replication_seed(cfg.seed, r))
    bw = cfg.bandwidths()
    norm = cfg.normalization()
    kern = get_kernel(cfg.kernel)
    fig1 = estimate_curves(panel, GSliceInX(x_j=(cfg.fig1_xj,), e=cfg.fig1_e), x_grid,
                           REGIME, norm, bw, cfg.tol, kern)
    nw = nw_curve(panel, x_grid, [cfg.fig1_xj], bw, kern)
    fig2 = estimate_curves(panel, GSliceInE(x_i=(cfg.fig2_xi,), x_j=(cfg.fig2_xj,)), e_grid,
                           REGIME, norm, bw, cfg.tol, kern)
    fig3 = estimate_curves(panel, FeSlice(), e_grid, REGIME, norm, bw, cfg.tol, kern)
    try:
        g0 = estimate_g(panel, [cfg.xbar1], [cfg.xbar1], cfg.ebar, REGIME, norm, bw,
                        cfg.tol, kern).value
        self_err = abs(g0 - cfg.alpha)
    except DyadError:
        self_err = math.nan
    return dict(g_x=fig1.estimate, nw_x=nw, g_e=fig2.estimate, fe=fig3.estimate,
                self_inversion=self_err, redraws=redraws,
                reasons=[x for c in (fig1, fig2, fig3) for x in c.reason if x])


@dataclass(eq=False)
class StudyResult:
    """Per-replication curves (rows = replications, columns = grid points)."""

    config: StudyConfig
    bandwidths: Bandwidths
    x_grid: np.ndarray
    e_grid: np.ndarray
    g_x: np.ndarray
    nw_x: np.ndarray
    g_e: np.ndarray
    fe: np.ndarray
    self_inversion: np.ndarray
    redraws: int = 0
    failures: dict = field(default_factory=dict)

    @property
    def truth_g_x(self):
        c = self.config
        return true_g(self.x_grid, c.fig1_xj, c.fig1_e, c.coefficient)

    @property
    def truth_g_e(self):
        c = self.config
        return true_g(c.fig2_xi, c.fig2_xj, self.e_grid, c.coefficient)

    @property
    def truth_fe(self):
        return true_error_cdf(self.e_grid, self.config.e_mean, self.config.e_sd)

    def curves(self):
        """``name -> (estimates, truth)`` for every estimated slice."""
        return {
            "g_x": (self.g_x, self.truth_g_x),
            "nw_x": (self.nw_x, self.truth_g_x),
            "g_e": (self.g_e, self.truth_g_e),
            "fe": (self.fe, self.truth_fe),
        }

    def mean(self, name):
        est, _ = self.curves()[name]
        return _nanmean(est)

    def bias(self, name):
        est, truth = self.curves()[name]
        return _nanmean(est) - truth

    def rmse(self, name):
        est, truth = self.curves()[name]
        with np.errstate(invalid="ignore"):
            r = np.sqrt(_nanmean((est - truth) ** 2))
        # floating rounding can leave sqrt(mean d^2) an ulp below |mean d|
        return np.fmax(r, np.abs(self.bias(name)))

    def grid_rmse(self, name) -> float:
        return float(np.nanmean(self.rmse(name)))

    def sup_abs_bias(self, name) -> float:
        return float(np.nanmax(np.abs(self.bias(name))))

    def missing(self, name) -> int:
        return int(np.sum(np.isnan(self.curves()[name][0])))


def _nanmean(a):
    a = np.asarray(a, dtype=float)
    count = np.sum(~np.isnan(a), axis=0)
    total = np.nansum(a, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)


def run_study(cfg: StudyConfig, threads: int = 1) -> StudyResult:
    """Run ``cfg.replications`` replications, ``threads`` at a time."""
    x_grid, e_grid = cfg.grids()
    jobs = [(cfg, r, x_grid, e_grid) for r in range(cfg.replications)]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_replicate, jobs))
    else:
        out = [_replicate(j) for j in jobs]
    failures = {}
    for o in out:
        for reason in o["reasons"]:
            failures[reason] = failures.get(reason, 0) + 1
    stack = lambda key: np.vstack([o[key] for o in out])  # noqa: E731
    return StudyResult(
        config=cfg, bandwidths=cfg.bandwidths(), x_grid=x_grid, e_grid=e_grid,
        g_x=stack("g_x"), nw_x=stack("nw_x"), g_e=stack("g_e"), fe=stack("fe"),
        self_inversion=np.array([o["self_inversion"] for o in out]),
        redraws=sum(o["redraws"] for o in out), failures=failures)


def summarize(result: StudyResult) -> dict:
    """Per-slice tables (column name -> array) and an aggregate table."""
    res = result
    fig1 = {
        "x": res.x_grid, "true_g": res.truth_g_x, "g_hat_mean": res.mean("g_x"),
        "nw_mean": res.mean("nw_x"), "bias": res.bias("g_x"), "rmse": res.rmse("g_x"),
        "nw_rmse": res.rmse("nw_x"),
    }
    fig2 = {
        "e": res.e_grid, "true_g": res.truth_g_e, "g_hat_mean": res.mean("g_e"),
        "bias": res.bias("g_e"), "rmse": res.rmse("g_e"),
    }
    fig3 = {
        "e": res.e_grid, "true_Fe": res.truth_fe, "Fe_hat_mean": res.mean("fe"),
        "bias": res.bias("fe"), "rmse": res.rmse("fe"),
    }
    rows = []
    for slice_name, estimator, key in (("fig1", "g_hat", "g_x"), ("fig1", "nw", "nw_x"),
                                       ("fig2", "g_hat", "g_e"), ("fig3", "Fe_hat", "fe")):
        rows.append({
            "slice": slice_name, "estimator": estimator, "N": res.config.N,
            "replications": res.config.replications,
            "grid_rmse": res.grid_rmse(key),
            "grid_abs_bias": float(np.nanmean(np.abs(res.bias(key)))),
            "sup_abs_bias": res.sup_abs_bias(key), "missing": res.missing(key),
        })
    si = res.self_inversion
    rows.append({
        "slice": "normalization_point", "estimator": "g_hat", "N": res.config.N,
        "replications": res.config.replications,
        "grid_rmse": float(np.sqrt(np.nanmean(si ** 2))),
        "grid_abs_bias": float(np.nanmean(si)), "sup_abs_bias": float(np.nanmax(si)),
        "missing": int(np.sum(np.isnan(si))),
    })
    return {"fig1": fig1, "fig2": fig2, "fig3": fig3, "summary": rows}


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_table(path, columns: dict) -> None:
    names = list(columns)
    cols = [np.asarray(columns[k]).tolist() for k in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_cell(v) for v in row])


def write_rows(path, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([_cell(v) for v in row.values()])


def write_study(result: StudyResult, out_dir) -> list:
    """Write ``fig1.csv``, ``fig2.csv``, ``fig3.csv`` and ``summary.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    tables = summarize(result)
    paths = []
    for name in ("fig1", "fig2", "fig3"):
        p = os.path.join(out_dir, f"{name}.csv")
        write_table(p, tables[name])
        paths.append(p)
    p = os.path.join(out_dir, "summary.csv")
    write_rows(p, tables["summary"])
    paths.append(p)
    return paths


# -- plug-in inference check ---------------------------------------------------

@dataclass(eq=False)
class CoverageResult:
    e: float
    truth: float
    level: float
    estimates: np.ndarray
    variances: np.ndarray  # sigma / scale per replication
    covered: np.ndarray

    @property
    def coverage(self) -> float:
        return float(np.mean(self.covered))

    @property
    def empirical_variance(self) -> float:
        return float(np.var(self.estimates, ddof=1))

    @property
    def mean_plugin_variance(self) -> float:
        return float(np.mean(self.variances))


def _coverage_one(args):
    cfg, r, e, level = args
    panel, _ = _cfg_panel(cfg, replication_seed(cfg.seed, r))
    bw, norm = cfg.bandwidths(), cfg.normalization()
    cond, y_arg = error_cdf_reference(panel, e, REGIME, norm)
    av = sigma_F(panel, cond, y_arg, bw, cfg.kernel, level)
    est = estimate_error_cdf(panel, e, REGIME, norm, bw=bw, kernel=cfg.kernel)
    return est, av.sigma / av.scale, confidence_interval(est, av, level)


def coverage_study(cfg: StudyConfig, e: float = -6.0, level: float = 0.95,
                   threads: int = 1) -> CoverageResult:
    """Coverage of the plug-in interval for ``F_e(e)`` across replications."""
    if cfg.seed is None:
        raise ValueError("a study needs a seed")
    jobs = [(cfg, r, e, level) for r in range(cfg.replications)]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_coverage_one, jobs))
    else:
        out = [_coverage_one(j) for j in jobs]
    truth = true_error_cdf(e, cfg.e_mean, cfg.e_sd)
    est = np.array([o[0] for o in out])
    var = np.array([o[1] for o in out])
    covered = np.array([lo <= truth <= hi for _, _, (lo, hi) in out])
    return CoverageResult(e, truth, level, est, var, covered)
