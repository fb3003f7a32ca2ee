"""Command-line entry point.

Subcommands::

    grow              grow one cluster, emit odometer/cluster CSV + JSON sidecar
    sandpile          relax a point mass, emit final mass / odometer CSV
    green             emit one row of a stopped Green's table as CSV
    verify-theorem1   bulk odometer limit vs Monte Carlo ensemble
    verify-theorem2   near-origin odometer scaling vs ensemble
    verify-timescale  total construction time vs d*omega_d/(d+2)
    fluctuations      inner/outer cluster deviation tables

Exit status: 0 on success, 1 when a verification verdict fails, 2 on
usage errors.  ``--threads`` (default from ``IDLA_THREADS``, else 1) sets
the worker pool for ensemble commands; every run has a pre-assigned
random stream, so outputs are byte-identical for any thread count.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import io as iolib
from .green import green_asymptotic, stopped_green_column
from .idla import grow_for_radius
from .lattice import ball_sites, ball_volume, norm_sq
from .rng import WalkRng
from .sandpile import MassField, relax
from .verify import (measure_fluctuations, verify_theorem1, verify_theorem2,
                     verify_timescale)


def _site(text):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _real_vec(text):
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _grid(text):
    try:
        values = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return values


def _default_threads():
    try:
        return max(1, int(os.environ.get("IDLA_THREADS", "1")))
    except ValueError:
        return 1


def _add_common(p, seeds=False):
    p.add_argument("--d", type=int, required=True, help="lattice dimension (>= 2)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker pool size; results do not depend on it")
    if seeds:
        p.add_argument("--seeds", type=int, default=5, help="runs per grid point")
        p.add_argument("--n-grid", type=_grid, required=True,
                       help="ascending radii, e.g. 32,64,128")
        p.add_argument("--out", type=Path, default=None, help="JSON report path")
        p.add_argument("--csv", type=Path, default=None, help="per-run CSV table path")


def build_parser():
    parser = argparse.ArgumentParser(prog="idlalab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grow", help="grow one cluster of radius n")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="target radius (>= 1)")
    p.add_argument("--out-odometer", type=Path, default=None,
                   help="odometer CSV (JSON sidecar written alongside)")
    p.add_argument("--out-cluster", type=Path, default=None, help="cluster CSV")
    p.add_argument("--svg", type=Path, default=None, help="odometer heat-map SVG")
    p.set_defaults(func=_cmd_grow)

    p = sub.add_parser("sandpile", help="relax mass omega_d n^d at the origin")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="radius scale (>= 1)")
    p.add_argument("--sweep", choices=("lex", "radial"), default="lex")
    p.add_argument("--out-mass", type=Path, default=None, help="final mass CSV")
    p.add_argument("--out-odometer", type=Path, default=None, help="odometer CSV")
    p.add_argument("--svg", type=Path, default=None, help="odometer heat-map SVG")
    p.set_defaults(func=_cmd_sandpile)

    p = sub.add_parser("green", help="one row of the stopped Green's function")
    _add_common(p)
    p.add_argument("--k", type=float, required=True, help="ball radius")
    p.add_argument("--row", type=_site, required=True, help="source site, e.g. 0,0")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True,
                      help="linear-solve values (default)")
    mode.add_argument("--asymptotic", action="store_true",
                      help="leading-order values instead of the exact solve")
    p.add_argument("--out", type=Path, required=True, help="CSV output path")
    p.set_defaults(func=_cmd_green)

    p = sub.add_parser("verify-theorem1", help="bulk odometer limit ensemble")
    _add_common(p, seeds=True)
    p.add_argument("--z", type=_real_vec, default=None,
                   help="target point with |z| in (0,1); default 0.5,0,...")
    p.set_defaults(func=_cmd_theorem1)

    p = sub.add_parser("verify-theorem2", help="near-origin scaling ensemble")
    _add_common(p, seeds=True)
    p.add_argument("--y-rule", choices=("origin", "sqrt"), default="origin")
    p.add_argument("--a", type=_site, default=None,
                   help="fixed site for --y-rule origin (default the origin)")
    p.set_defaults(func=_cmd_theorem2)

    p = sub.add_parser("verify-timescale", help="construction-time ensemble")
    _add_common(p, seeds=True)
    p.add_argument("--rel-tol", type=float, default=0.15,
                   help="final-n relative tolerance for the verdict")
    p.set_defaults(func=_cmd_timescale)

    p = sub.add_parser("fluctuations", help="cluster deviation tables")
    _add_common(p, seeds=True)
    p.set_defaults(func=_cmd_fluctuations)

    return parser


def _validate(parser_error, args, need_n=False):
    if args.d < 2:
        parser_error("--d must be >= 2")
    if need_n and args.n < 1:
        parser_error("--n must be >= 1")
    if getattr(args, "seeds", 1) < 1:
        parser_error("--seeds must be >= 1")
    if getattr(args, "threads", 1) < 1:
        parser_error("--threads must be >= 1")
    grid = getattr(args, "n_grid", None)
    if grid is not None and (not grid or any(n < 1 for n in grid)
                             or any(b <= a for a, b in zip(grid, grid[1:]))):
        parser_error("--n-grid must be strictly increasing integers >= 1")


def _cmd_grow(args):
    cluster, odometer, record = grow_for_radius(args.n, args.d,
                                                WalkRng(args.seed, 0), track="full")
    if args.out_cluster:
        iolib.write_sites_csv(args.out_cluster, args.d, cluster.insertion_order)
    if args.out_odometer:
        iolib.write_sites_csv(args.out_odometer, args.d, odometer.items(), "u")
        iolib.write_json(Path(args.out_odometer).with_suffix(".json"),
                         iolib.growth_sidecar(record))
    if args.svg:
        iolib.write_svg_heatmap(args.svg, odometer.items(), args.d)
    print(f"grew {len(cluster)} sites: sigma_sum={record.sigma_sum} "
          f"delta_inner={record.delta_inner:.4g} delta_outer={record.delta_outer:.4g}")
    return 0


def _cmd_sandpile(args):
    initial = MassField.point_mass(ball_volume(args.d) * float(args.n) ** args.d, args.d)
    final, odometer = relax(initial, sweep="lexicographic" if args.sweep == "lex"
                            else "radial")
    if args.out_mass:
        iolib.write_sites_csv(args.out_mass, args.d, final.items(), "mass")
    if args.out_odometer:
        iolib.write_sites_csv(args.out_odometer, args.d, odometer.items(), "u")
    if args.svg:
        iolib.write_svg_heatmap(args.svg, odometer.items(), args.d)
    occupied = sum(1 for _ in final.items())
    print(f"relaxed mass {initial.total:.6g} over {occupied} sites "
          f"(u(0)={odometer.at((0,) * args.d):.6g})")
    return 0


def _cmd_green(args):
    if norm_sq(args.row) > args.k * args.k:
        print(f"error: row site {args.row} lies outside the ball of radius {args.k}",
              file=sys.stderr)
        return 2
    sites = ball_sites(args.k, args.d)
    if args.asymptotic:
        rows = (tuple(s) + (green_asymptotic(args.k, s, args.d),)
                for s in map(tuple, sites) if norm_sq(s) > 0)
    else:
        col = stopped_green_column(args.k, args.d, source=args.row)
        rows = (tuple(s) + (col.at(s),) for s in map(tuple, sites))
    iolib.write_csv(args.out, iolib.coordinate_header(args.d, ["g"]), rows)
    print(f"wrote {len(sites)} Green values to {args.out}")
    return 0


def _write_report(args, report):
    doc = report.to_json_dict()
    if args.out:
        iolib.write_json(args.out, doc)
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    if args.csv:
        iolib.write_csv(args.csv, ["n", "seed", "observable", "value", "predicted"],
                        report.csv_rows())
    return 0 if doc["verdict"] == "pass" else 1


def _cmd_theorem1(args):
    z = args.z if args.z is not None else (0.5,) + (0.0,) * (args.d - 1)
    if len(z) != args.d:
        raise ValueError(f"--z has {len(z)} coordinates for d={args.d}")
    r = math.sqrt(sum(c * c for c in z))
    if not 0.0 < r < 1.0:
        raise ValueError(f"|z| must lie in (0,1), got {r:.4g}")
    reports = verify_theorem1(args.d, args.n_grid, [z], seeds=args.seeds,
                              master_seed=args.seed, threads=args.threads)
    return _write_report(args, reports[0])


def _cmd_theorem2(args):
    report = verify_theorem2(args.d, args.n_grid, y_rule=args.y_rule,
                             seeds=args.seeds, master_seed=args.seed,
                             threads=args.threads, a=args.a)
    return _write_report(args, report)


def _cmd_timescale(args):
    report = verify_timescale(args.d, args.n_grid, seeds=args.seeds,
                              master_seed=args.seed, threads=args.threads,
                              rel_tol=args.rel_tol)
    return _write_report(args, report)


def _cmd_fluctuations(args):
    report = measure_fluctuations(args.d, args.n_grid, seeds=args.seeds,
                                  master_seed=args.seed, threads=args.threads)
    return _write_report(args, report)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser.error, args, need_n=hasattr(args, "n"))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
