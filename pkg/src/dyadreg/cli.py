"""Command-line front end.

Exit codes: 0 success, 2 usage or query error, 3 data error, 4 numeric
failure. Diagnostics go to standard error; results go to files or
standard output. Covariate indices on the command line are 1-based, to
match the ``x_1..x_K`` columns of the agents file.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .baseline import nw_curve
from .conditional import ConditioningPoint, DyadConditional
from .data import Partition, SubvectorSpec, make_grid, read_panel
from .errors import DataError, NumericFailure, QueryError
from .inference import confidence_interval, rate_diagnostics, sigma_F, sigma_g
from .kernels import Bandwidths, get_kernel
from .montecarlo import (StudyConfig, _cfg_panel, replication_seed, run_study, true_g,
                         write_study, write_table)
from .structural import (FeSlice, FixedPoint, GSliceInE, GSliceInX, Homogeneous, Regime,
                         error_cdf_reference, estimate_curves)

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class UsageError(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------------

def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _indices(text):
    try:
        idx = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(k < 1 for k in idx):
        raise argparse.ArgumentTypeError("covariate indices are 1-based")
    return [k - 1 for k in idx]


def _grid(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid is LO,HI,COUNT")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")


def _level(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("confidence level must lie in (0, 1)")
    return v


def _add_data(p):
    p.add_argument("--agents", required=True, help="agents CSV: agent_id,x_1..x_K")
    p.add_argument("--dyads", required=True, help="dyads CSV: i,j,y")


def _add_kernel(p):
    p.add_argument("--kernel", default="gaussian", choices=["gaussian", "epanechnikov"])
    p.add_argument("--bandwidth-rule", default="rot", choices=["rot", "manual"])
    p.add_argument("--h-x", type=float, help="covariate bandwidth (manual rule)")
    p.add_argument("--h-y", type=float, help="outcome bandwidth (manual rule)")


def _add_structure(p):
    p.add_argument("--regime", default="full", choices=["full", "cond-x0"],
                   help="error independent of X (full) or of X1 given X0 (cond-x0)")
    p.add_argument("--g-depends-on-x0", action="store_true")
    p.add_argument("--partition", type=_indices, default=[], metavar="X0_INDICES",
                   help="1-based covariates forming the X0 block (default: none)")
    p.add_argument("--normalization", required=True, choices=["fixed", "homog"])
    p.add_argument("--xbar1", type=_floats, required=True, help="reference X1 of agent i")
    p.add_argument("--xbar1-j", type=_floats, help="reference X1 of agent j (default: --xbar1)")
    p.add_argument("--ebar", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--x0-i", type=_floats, help="X0 reference values for agent i")
    p.add_argument("--x0-j", type=_floats, help="X0 reference values for agent j")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--ci", type=_level, metavar="LEVEL")
    p.add_argument("--out", help="output CSV (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the Monte Carlo study")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("estimate", help="estimate g or F_e along a grid")
    est = p.add_subparsers(dest="target", required=True)
    pg = est.add_parser("g", help="structural function")
    _add_data(pg)
    _add_kernel(pg)
    _add_structure(pg)
    pg.add_argument("--x-i", type=_floats, help="agent i covariates (base point for --over x)")
    pg.add_argument("--x-j", type=_floats, required=True)
    pg.add_argument("--e", type=float, help="error value (fixed for --over x)")
    pg.add_argument("--over", choices=["x", "e"], help="vary this argument along --grid")
    pg.add_argument("--coord", type=int, default=1, help="1-based coordinate of x_i to vary")
    pg.add_argument("--grid", type=_grid, metavar="LO,HI,COUNT")
    pf = est.add_parser("fe", help="error distribution")
    _add_data(pf)
    _add_kernel(pf)
    _add_structure(pf)
    pf.add_argument("--e", type=float)
    pf.add_argument("--grid", type=_grid, metavar="LO,HI,COUNT")

    p = sub.add_parser("cdf", help="conditional CDF of Y given dyad covariates")
    _add_data(p)
    _add_kernel(p)
    p.add_argument("--w1", type=_floats, required=True)
    p.add_argument("--w2", type=_floats, required=True)
    p.add_argument("--subvector", type=_indices, help="1-based covariates conditioned on")
    p.add_argument("--y", type=float)
    p.add_argument("--grid", type=_grid, metavar="LO,HI,COUNT")
    p.add_argument("--out", help="CdfCurve CSV (y,value)")

    p = sub.add_parser("compare-nw", help="structural estimate vs Nadaraya-Watson on one slice")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--agents", help="use this panel instead of a simulated draw")
    p.add_argument("--dyads")
    p.add_argument("--out", help="output CSV (default: standard output)")

    p = sub.add_parser("diagnose-rates", help="bandwidth-rate diagnostics")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--d-w", type=int, default=None, help="conditioning dimension (default K)")
    p.add_argument("--s-order", type=int, default=2)
    p.add_argument("--h-x", type=float, help="default: rule of thumb in N")
    p.add_argument("--h-y", type=float, help="default: rule of thumb in N(N-1)")
    return parser


# -- resolution ----------------------------------------------------------------------

def _bandwidths(args, panel) -> Bandwidths:
    if args.bandwidth_rule == "manual":
        if args.h_x is None or args.h_y is None:
            raise UsageError("--bandwidth-rule manual needs --h-x and --h-y")
        return Bandwidths(args.h_x, args.h_y, "manual")
    return Bandwidths.rule_of_thumb(panel.N, panel.n)


def _structure(args, K):
    try:
        part = Partition.from_x0(args.partition, K)
    except ValueError as exc:
        raise UsageError(f"--partition: {exc}")
    xb_i = args.xbar1
    xb_j = args.xbar1_j if args.xbar1_j is not None else xb_i
    if len(xb_i) != len(part.x1) or len(xb_j) != len(part.x1):
        raise UsageError(f"--xbar1 needs {len(part.x1)} values (one per X1 covariate)")
    if args.normalization == "homog":
        for flag in ("ebar", "alpha"):
            if getattr(args, flag) is None:
                raise UsageError(f"--normalization homog requires --{flag}")
        if args.ebar == 0.0:
            raise UsageError("--ebar must be nonzero")
        norm = Homogeneous(part, xb_i, xb_j, args.ebar, args.alpha)
    else:
        norm = FixedPoint(part, xb_i, xb_j)
    regime = Regime(args.regime, args.g_depends_on_x0)
    x0 = None
    if (args.x0_i is None) != (args.x0_j is None):
        raise UsageError("--x0-i and --x0-j go together")
    if args.x0_i is not None:
        x0 = (np.array(args.x0_i), np.array(args.x0_j))
    return regime, norm, x0


def _grid_points(spec, single, name):
    if spec is not None and single is not None:
        raise UsageError(f"give either --{name} or --grid, not both")
    if spec is not None:
        return make_grid(spec[0], spec[1], spec[2])
    if single is None:
        raise UsageError(f"one of --{name} or --grid is required")
    return np.array([single])


def _load_config(path, seed) -> StudyConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    if "config" in raw and "version" in raw:  # a manifest from an earlier run
        raw = raw["config"]
    raw = dict(raw, seed=seed)
    try:
        return StudyConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config {path}: {exc}")


def _manifest(path, command, extra, bw):
    doc = {"version": __version__, "command": command, **extra,
           "bandwidths": {"h_x": bw.h_x, "h_y": bw.h_y, "source": bw.source}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(columns, out):
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        names = list(columns)
        w.writerow(names)
        for row in zip(*(np.asarray(columns[k]).tolist() for k in names)):
            w.writerow([repr(float(v)) for v in row])
    else:
        parent = os.path.dirname(os.path.abspath(out))
        os.makedirs(parent, exist_ok=True)
        write_table(out, columns)


def _provenance(args, bw):
    skip = {"agents", "dyads", "out"}
    return {"arguments": {k: v for k, v in sorted(vars(args).items()) if k not in skip},
            "inputs": {"agents": os.path.abspath(args.agents),
                       "dyads": os.path.abspath(args.dyads)}}


# -- commands --------------------------------------------------------------------------

def cmd_simulate(args):
    cfg = _load_config(args.config, args.seed)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    os.makedirs(args.out, exist_ok=True)
    bw = cfg.bandwidths()
    # threads never affect results and are left out of the manifest
    _manifest(os.path.join(args.out, "manifest.json"), "simulate",
              {"seed": cfg.seed, "config": cfg.to_dict()}, bw)
    result = run_study(cfg, threads=args.threads)
    write_study(result, args.out)
    for reason, count in sorted(result.failures.items()):
        print(f"warning: {count} grid points failed with {reason}", file=sys.stderr)
    return 0


def cmd_estimate(args):
    panel = read_panel(args.agents, args.dyads)
    bw = _bandwidths(args, panel)
    kern = get_kernel(args.kernel)
    regime, norm, x0 = _structure(args, panel.K)
    if args.target == "fe":
        grid = _grid_points(args.grid, args.e, "e")
        table = estimate_curves(panel, FeSlice(x0), grid, regime, norm, bw, args.tol, kern)
    else:
        slice_, grid = _g_slice(args, panel.K)
        table = estimate_curves(panel, slice_, grid, regime, norm, bw, args.tol, kern, x0)
    cols = {"point": table.point, "estimate": table.estimate, "local_mass": table.local_mass}
    failed = [r for r in table.reason if r]
    if args.ci is not None:
        cols.update(_ci_columns(args, panel, table, regime, norm, x0, bw, kern, failed))
    _emit(cols, args.out)
    if args.out:
        _manifest(args.out + ".manifest.json", f"estimate {args.target}",
                  _provenance(args, bw), bw)
    if failed:
        print(f"warning: {len(failed)} of {table.point.size} points failed "
              f"({', '.join(sorted(set(failed)))})", file=sys.stderr)
    if len(failed) == table.point.size:
        return EXIT_NUMERIC
    return 0


def _g_slice(args, K):
    if args.over == "x":
        if args.e is None or args.grid is None:
            raise UsageError("--over x needs --e and --grid")
        if not 1 <= args.coord <= K:
            raise UsageError(f"--coord must lie in 1..{K}")
        base = tuple(args.x_i) if args.x_i is not None else None
        return (GSliceInX(tuple(args.x_j), args.e, base, args.coord - 1),
                make_grid(*args.grid))
    if args.x_i is None:
        raise UsageError("--x-i is required unless --over x")
    grid = _grid_points(args.grid if args.over == "e" else None, args.e
                        if args.over != "e" else None, "e")
    return GSliceInE(tuple(args.x_i), tuple(args.x_j)), grid


def _ci_columns(args, panel, table, regime, norm, x0, bw, kern, failed):
    out = {k: np.full(table.point.size, np.nan) for k in ("lo", "hi", "sigma", "scale")}
    for k, t in enumerate(table.point.tolist()):
        if table.reason[k]:
            continue
        try:
            if args.target == "fe":
                cond, y_arg = error_cdf_reference(panel, t, regime, norm, x0)
                av = sigma_F(panel, cond, y_arg, bw, kern, args.ci)
            else:
                if args.over == "x":
                    x_i = np.array(args.x_i if args.x_i is not None else np.zeros(panel.K))
                    x_i[args.coord - 1] = t
                    e = args.e
                else:
                    x_i, e = np.array(args.x_i), t
                av = sigma_g(panel, x_i, args.x_j, e, regime, norm, bw, args.tol, kern, x0,
                             args.ci)
        except (NumericFailure, QueryError) as exc:
            failed.append(type(exc).__name__)
            continue
        lo, hi = confidence_interval(table.estimate[k], av, args.ci)
        out["lo"][k], out["hi"][k], out["sigma"][k], out["scale"][k] = lo, hi, av.sigma, av.scale
    return out


def cmd_cdf(args):
    panel = read_panel(args.agents, args.dyads)
    bw = _bandwidths(args, panel)
    idx = args.subvector if args.subvector is not None else list(range(panel.K))
    try:
        spec = SubvectorSpec(idx)
        spec.check(panel.K)
        cond = ConditioningPoint(spec, args.w1, args.w2)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.y is None and args.grid is None:
        raise UsageError("one of --y or --grid is required")
    dist = DyadConditional(panel, cond, bw, args.kernel)
    if args.y is not None:
        print(repr(float(dist.cdf(args.y))))
    if args.grid is not None:
        grid = make_grid(*args.grid)
        cols = {"y": grid, "value": np.maximum.accumulate(dist.cdf(grid))}
        if args.out:
            _emit(cols, args.out)
            _manifest(args.out + ".manifest.json", "cdf", _provenance(args, bw), bw)
        elif args.y is None:
            _emit(cols, None)
    return 0


def cmd_compare_nw(args):
    cfg = _load_config(args.config, args.seed)
    if (args.agents is None) != (args.dyads is None):
        raise UsageError("--agents and --dyads go together")
    if args.agents is not None:
        panel = read_panel(args.agents, args.dyads)
        if panel.K != 1:
            raise UsageError("compare-nw needs a single covariate")
        bw = cfg.bandwidths() if cfg.bandwidth_rule == "manual" else \
            Bandwidths.rule_of_thumb(panel.N, panel.n)
    else:
        panel, _ = _cfg_panel(cfg, replication_seed(cfg.seed, 0))
        bw = cfg.bandwidths()
    x_grid, _ = cfg.grids()
    from .montecarlo import REGIME
    table = estimate_curves(panel, GSliceInX((cfg.fig1_xj,), cfg.fig1_e), x_grid, REGIME,
                            cfg.normalization(), bw, cfg.tol, cfg.kernel)
    nw = nw_curve(panel, x_grid, [cfg.fig1_xj], bw, cfg.kernel)
    truth = true_g(x_grid, cfg.fig1_xj, cfg.fig1_e, cfg.coefficient)
    _emit({"x": x_grid, "true_g": truth, "g_hat": table.estimate, "nw_hat": nw}, args.out)
    if args.out:
        _manifest(args.out + ".manifest.json", "compare-nw",
                  {"seed": cfg.seed, "config": cfg.to_dict()}, bw)
    return 0


def cmd_diagnose_rates(args):
    if args.N < 2:
        raise UsageError("--N must be >= 2")
    hx = args.h_x if args.h_x is not None else Bandwidths.rule_of_thumb(args.N).h_x
    hy = args.h_y if args.h_y is not None else Bandwidths.rule_of_thumb(args.N).h_y
    d_w = args.d_w if args.d_w is not None else args.K
    try:
        diag = rate_diagnostics(args.N, args.K, d_w, args.s_order, Bandwidths(hx, hy))
    except ValueError as exc:
        raise UsageError(str(exc))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["quantity", "value"])
    for name, value in diag.rows():
        w.writerow([name, repr(float(value)) if isinstance(value, float) else value])
    for msg in diag.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return 0


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "cdf": cmd_cdf,
            "compare-nw": cmd_compare_nw, "diagnose-rates": cmd_diagnose_rates}


def _glue_negative_values(argv):
    # argparse reads "-8,-4,100" as an option; bind such values to their flag
    out = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and re.match(r"^-[0-9.]", tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericFailure as exc:
        print(f"numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QueryError as exc:
        print(f"query error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
