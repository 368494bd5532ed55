"""Command-line entry point.

Subcommands are pure pipeline stages over files: solvers write per-species
field CSVs plus reports, the verifier and comparison stages read them back.
Exit codes: 0 success, 2 validation failure, 3 solver non-convergence,
4 class-S failure under --require-class-s.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import re
import sys

from .analysis import AnalysisError, compare_limits, distance_table, rate_study
from .boundary import BoundaryError
from .config import ConfigError, load_config
from .grid import GridError, read_field, write_field
from .limit import limit_direct, limit_two_species, zero_interior_init
from .relax import SolverError, continuation, overlap_metric, solve_eps
from .state import DensityTuple, SolveReport
from .verify import certify, check_lemma31, compute_PQ

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOCONVERGE = 3
EXIT_CLASS_S = 4

LADDER_HEADER = "epsilon,iterations,residual,overlap,wall_time"


def _write_tuple(out_dir, grid, u):
    os.makedirs(out_dir, exist_ok=True)
    for i in range(u.m):
        write_field(os.path.join(out_dir, f"u{i + 1}.csv"), grid, u.u[i])


def _read_tuple(path, grid):
    files = sorted(glob.glob(os.path.join(path, "u*.csv")),
                   key=lambda p: int(re.search(r"u(\d+)\.csv$", p).group(1)))
    if not files:
        raise FileNotFoundError(f"no u*.csv field files in {path}")
    fields = [read_field(f, grid) for f in files]
    return DensityTuple.from_fields(grid, fields)


def _ladder_row(report, overlap):
    return (f"{report.eps:.17g},{report.iterations},{report.residual:.17g},"
            f"{overlap:.17g},{report.wall_time:.6f}")


def _append_ladder(path, lines):
    fresh = not os.path.exists(path)
    with open(path, "a") as fh:
        if fresh:
            fh.write(LADDER_HEADER + "\n")
        for line in lines:
            fh.write(line + "\n")


def _read_ladder(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            rows.append({k: float(v) for k, v in zip(header, vals)})
    return rows


def _json_dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _maybe_plot(args, fn, *fargs):
    if not args.no_plot:
        from . import figures

        fn = getattr(figures, fn)
        fn(*fargs)


def cmd_solve_eps(args, cfg):
    grid, bc = cfg.build()
    mode = "redblack" if args.threads > 1 else "sequential"
    sol, report = solve_eps(grid, bc, args.eps, tol=cfg.tol, max_iter=cfg.max_iter,
                            mode=mode)
    out = args.out or cfg.out_dir
    _write_tuple(out, grid, sol)
    _json_dump(os.path.join(out, "report.json"), report.to_dict())
    _maybe_plot(args, "plot_tuple", grid, sol, os.path.join(out, "fields.png"),
                f"eps = {args.eps:g}")
    if not report.converged:
        print(f"solve-eps: NOT converged (residual {report.residual:.3e})")
        return EXIT_NOCONVERGE
    print(f"solve-eps: converged in {report.iterations} sweeps, "
          f"residual {report.residual:.3e}")
    return EXIT_OK


def cmd_continuation(args, cfg):
    if not cfg.ladder:
        raise ConfigError("[solver] ladder: required for the continuation command")
    grid, bc = cfg.build()
    mode = "redblack" if args.threads > 1 else "sequential"
    results = continuation(grid, bc, cfg.ladder, tol=cfg.tol, max_iter=cfg.max_iter,
                           mode=mode)
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    lines = []
    rows = []
    all_ok = True
    for sol, report in results:
        sub = os.path.join(out, f"eps_{report.eps:.3e}")
        _write_tuple(sub, grid, sol)
        ov = overlap_metric(sol)
        lines.append(_ladder_row(report, ov))
        rows.append({"epsilon": report.eps, "overlap": ov, "residual": report.residual})
        all_ok = all_ok and report.converged
        print(f"eps {report.eps:.3e}: sweeps {report.iterations}, "
              f"residual {report.residual:.3e}, overlap {ov:.3e}"
              + ("" if report.converged else "  [NOT CONVERGED]"))
    ladder_path = os.path.join(out, "ladder.csv")
    if os.path.exists(ladder_path):
        os.remove(ladder_path)
    _append_ladder(ladder_path, lines)
    _maybe_plot(args, "plot_ladder", rows, os.path.join(out, "ladder.png"))
    _maybe_plot(args, "plot_tuple", grid, results[-1][0],
                os.path.join(out, "fields.png"), f"eps = {results[-1][1].eps:g}")
    return EXIT_OK if all_ok else EXIT_NOCONVERGE


def cmd_limit(args, cfg):
    grid, bc = cfg.build()
    out = args.out or cfg.out_dir
    mode = "redblack" if args.threads > 1 else "sequential"
    if args.method == "two_species":
        sol = limit_two_species(grid, bc)
        report = SolveReport(0.0, 0, 0.0, 0.0, True)
    else:
        init = None
        if args.init == "zero":
            init = zero_interior_init(grid, bc)
        elif args.init not in (None, "harmonic"):
            init = _read_tuple(args.init, grid)
        sol, report = limit_direct(grid, bc, tol=cfg.limit_tol,
                                   max_iter=cfg.max_iter, init=init, mode=mode)
    _write_tuple(out, grid, sol)
    _json_dump(os.path.join(out, "report.json"), report.to_dict())
    _append_ladder(os.path.join(out, "ladder.csv"),
                   [_ladder_row(report, overlap_metric(sol))])
    _maybe_plot(args, "plot_tuple", grid, sol, os.path.join(out, "fields.png"),
                f"limit ({args.method})")
    if not report.converged:
        print(f"limit: NOT converged (last displacement {report.residual:.3e})")
        return EXIT_NOCONVERGE
    print(f"limit ({args.method}): done in {report.iterations} sweeps, "
          f"overlap {overlap_metric(sol):.3e}")
    return EXIT_OK


def cmd_verify(args, cfg):
    grid, bc = cfg.build()
    tol = cfg.tolerances(bc)
    u = _read_tuple(args.fields, grid)
    if u.m != bc.m:
        raise ConfigError(f"{args.fields}: found {u.m} species, config has {bc.m}")
    cert = certify(grid, bc, u, tol)
    doc = cert.to_flat_dict()
    print(cert.summary())
    if args.fields2:
        v = _read_tuple(args.fields2, grid)
        if v.m != bc.m:
            raise ConfigError(f"{args.fields2}: found {v.m} species, config has {bc.m}")
        cert_v = certify(grid, bc, v, tol)
        pq = compute_PQ(u, v)
        doc.update(pq.to_flat_dict())
        doc["pass.class_s.second"] = cert_v.class_s
        doc["lemma31"] = check_lemma31(u, v, slack=tol.slack,
                                       u_class_s=cert.class_s,
                                       v_class_s=cert_v.class_s)
        print(f"P = {pq.P:.6e}  Q = {pq.Q:.6e}")
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    _json_dump(os.path.join(out, "certificate.json"), doc)
    if args.require_class_s and not cert.class_s:
        return EXIT_CLASS_S
    return EXIT_OK


def cmd_rate(args, cfg):
    grid, bc = cfg.build()
    reference = _read_tuple(args.reference, grid)
    ladder_rows = _read_ladder(os.path.join(args.ladder_dir, "ladder.csv"))
    results = []
    for row in ladder_rows:
        eps = row["epsilon"]
        if eps <= 0:
            continue
        sol = _read_tuple(os.path.join(args.ladder_dir, f"eps_{eps:.3e}"), grid)
        rep = SolveReport(eps, int(row["iterations"]), row["residual"],
                          row["wall_time"], row["residual"] <= cfg.tol)
        results.append((sol, rep))
    fits = rate_study(results, reference)
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "rates.csv"), "w") as fh:
        fh.write("species,epsilon,h1_distance\n")
        for i, eps, d in distance_table(results, reference):
            fh.write(f"{i},{eps:.17g},{d:.17g}\n")
    doc = {("worst" if k == "worst" else f"u{k + 1}"): f.to_dict() for k, f in fits.items()}
    _json_dump(os.path.join(out, "ratefit.json"), doc)
    _maybe_plot(args, "plot_ratefit", fits, os.path.join(out, "ratefit.png"))
    for key, fit in fits.items():
        name = "worst" if key == "worst" else f"u{key + 1}"
        print(f"{name}: slope {fit.slope:.4f}  r^2 {fit.r_squared:.5f}")
    return EXIT_OK


def cmd_compare(args, cfg):
    grid, bc = cfg.build()
    a = _read_tuple(args.path_a, grid)
    b = _read_tuple(args.path_b, grid)
    record = compare_limits(a, b)
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    _json_dump(os.path.join(out, "compare.json"), record)
    print(f"headline max-norm distance: {record['headline_max_norm']:.6e}")
    print(f"P = {record['pq']['pq.P']:.6e}  Q = {record['pq']['pq.Q']:.6e}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seglimit",
        description="Solve and certify segregated limits of strongly competing "
                    "species systems.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", required=True, help="run config file")
    common.add_argument("-o", "--out", default=None, help="output directory override")
    common.add_argument("--threads", type=int, default=1,
                        help="N>1 enables the red-black parallel sweep mode")
    common.add_argument("--require-class-s", action="store_true",
                        help="exit 4 when verification fails class S")
    common.add_argument("--seed", type=int, default=None,
                        help="reserved; solvers are deterministic")
    common.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-eps", parents=[common],
                       help="solve the system at one fixed eps")
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_solve_eps)

    p = sub.add_parser("continuation", parents=[common],
                       help="solve along the configured eps ladder")
    p.set_defaults(func=cmd_continuation)

    p = sub.add_parser("limit", parents=[common],
                       help="compute the segregated limit directly")
    p.add_argument("--method", choices=["two_species", "direct"], default="direct")
    p.add_argument("--init", default=None,
                   help="'harmonic' (default), 'zero', or a fields directory")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("verify", parents=[common],
                       help="certify a tuple (and compare two via P/Q)")
    p.add_argument("fields", help="directory with u*.csv")
    p.add_argument("fields2", nargs="?", default=None,
                   help="optional second directory for the P/Q report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rate", parents=[common],
                       help="fit the convergence rate of a ladder to a reference")
    p.add_argument("ladder_dir", help="continuation output directory")
    p.add_argument("reference", help="directory with the reference limit fields")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("compare", parents=[common],
                       help="compare two independently computed limits")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (ConfigError, GridError, BoundaryError, SolverError, AnalysisError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
