"""Command line interface.

Exit codes: 0 success (``criteria``: satisfied), 1 marginal, 2 violated,
3 invalid input, 4 computation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .decouple import decouple, gap_ratio
from .model import GridError
from .qda import criteria_margin
from .scenario import ScenarioError, SweepSpec, load_scenario, to_toml
from .specfun import KummerQuery, kummer_m
from .sweep import FIGURES, FMT, Variant, run_figure, solve_grid, sweep_table, write_csv

EXIT_INPUT = 3
EXIT_COMPUTE = 4
VERDICT_CODES = {"satisfied": 0, "marginal": 1, "violated": 2}


def _out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def cmd_solve(args) -> int:
    sc = load_scenario(args.config)
    grid = sc.grid()
    mats = solve_grid(grid, sc.run)
    report = criteria_margin(grid, thresholds=sc.thresholds)
    comments = ["lingrid solve"] + to_toml(sc.raw).rstrip("\n").splitlines()
    comments += ["criteria: " + line for line in report.lines()]
    for name, m in mats.items():
        comments.append(f"{name}: unitarity defect {m.info['unitarity_defect']:.3e}, "
                        f"estimated error {m.est_error:.3e}")
    if len(mats) == 2:
        diff = np.abs(mats["numeric"].matrix - mats["qda"].matrix).max()
        comments.append(f"max |S_qda - S_numeric| {diff:.3e}")
    header = ["method", "from", "to", "re", "im", "probability"]
    fh = _out(args.out)
    try:
        fh.write("".join(f"# {c}\n" if c else "#\n" for c in comments))
        fh.write(",".join(header) + "\n")
        n = grid.n_states
        for name, m in mats.items():
            S = m.in_user_order()
            for j in range(n):
                for i in range(n):
                    z = S[i, j]
                    fh.write(f"{name},{j + 1},{i + 1},{FMT % z.real},{FMT % z.imag},"
                             f"{FMT % abs(z) ** 2}\n")
    finally:
        _close(fh)
    return 0


def cmd_sweep(args) -> int:
    sc = load_scenario(args.config)
    sweep = sc.sweep
    if sweep is None:
        raise ScenarioError("scenario has no [sweep] section")
    if args.param:
        sweep = SweepSpec(args.param, sweep.start, sweep.stop, sweep.points, sweep.scale)
    if args.points:
        sweep = SweepSpec(sweep.param, sweep.start, sweep.stop, args.points, sweep.scale)
    header, rows = sweep_table([Variant("", sc)], sweep)
    comments = ["lingrid sweep",
                f"sweep {sweep.param} from {sweep.start!r} to {sweep.stop!r}, "
                f"{sweep.points} points, {sweep.scale}"]
    comments += to_toml(sc.raw).rstrip("\n").splitlines()
    fh = _out(args.out)
    try:
        write_csv(fh, header, rows, comments)
    finally:
        _close(fh)
    return 0


def cmd_figure(args) -> int:
    names = sorted(FIGURES) if args.name == "all" else [args.name]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        path = out / f"{name}.csv"
        run_figure(name, path, points=args.points)
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_criteria(args) -> int:
    sc = load_scenario(args.config)
    thresholds = (args.satisfied if args.satisfied is not None else sc.thresholds[0],
                  args.marginal if args.marginal is not None else sc.thresholds[1])
    report = criteria_margin(sc.grid(), thresholds=thresholds)
    print("\n".join(report.lines()))
    return VERDICT_CODES[report.verdict]


def _fmt_matrix(name, M):
    lines = [f"{name}:"]
    for row in np.atleast_2d(M):
        lines.append("  " + "  ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in row))
    return lines


def cmd_report(args) -> int:
    sc = load_scenario(args.config)
    grid = sc.grid()
    dec = decouple(grid, rank_tol=args.rank_tol)
    rho = gap_ratio(grid, dec) if grid.n1 >= 2 else float("nan")
    fh = _out(args.out)
    try:
        if args.format == "csv":
            fh.write("quantity,row,col,re,im\n")
            for l, g in enumerate(dec.g):
                fh.write(f"g,{l + 1},,{FMT % g},0\n")
            for name, M in (("X", dec.X), ("Y", dec.Y), ("Va", dec.Va), ("Vb", dec.Vb)):
                for (i, j), z in np.ndenumerate(M):
                    fh.write(f"{name},{i + 1},{j + 1},{FMT % z.real},{FMT % z.imag}\n")
            fh.write(f"n,,,{dec.n},0\nrho,,,{FMT % rho},0\n")
        else:
            lines = [f"singular values: {' '.join(FMT % g for g in dec.g)}",
                     f"effective rank n = {dec.n} (rank_tol {dec.rank_tol:g})"]
            for name, M in (("X", dec.X), ("Y", dec.Y), ("Va", dec.Va), ("Vb", dec.Vb)):
                lines += _fmt_matrix(name, M)
            lines.append(f"gap ratio rho = {FMT % rho}")
            fh.write("\n".join(lines) + "\n")
    finally:
        _close(fh)
    return 0


def cmd_specfun(args) -> int:
    q = KummerQuery(complex(args.a_re, args.a_im), args.b, complex(args.z_re, args.z_im),
                    args.rel_tol)
    r = kummer_m(q)
    print(f"value  {r.value.real!r} {r.value.imag!r}")
    print(f"deriv  {r.deriv.real!r} {r.deriv.imag!r}")
    print(f"regime {r.regime.value}")
    print(f"error  {r.est_error:.3e}")
    return 0 if r.certified else EXIT_COMPUTE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lingrid", description=(
        "Transition probabilities of truncated linear potential grids by direct "
        "integration and by the quasidegeneracy approximation."))
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("solve", help="transition matrices for one scenario")
    s.add_argument("--config", required=True, help="scenario TOML file")
    s.add_argument("--out", help="output CSV (default: standard output)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="probabilities along the scenario's [sweep]")
    s.add_argument("--config", required=True)
    s.add_argument("--param", choices=("g0", "dV", "t"), help="override the swept parameter")
    s.add_argument("--points", type=int, help="override the number of points")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("figure", help="write a figure preset as CSV")
    s.add_argument("name", choices=sorted(FIGURES) + ["all"])
    s.add_argument("--out", default=".", help="output directory")
    s.add_argument("--points", type=int, help="override the preset resolution")
    s.set_defaults(func=cmd_figure)

    s = sub.add_parser("criteria", help="applicability report; exit 0/1/2 = satisfied/marginal/violated")
    s.add_argument("--config", required=True)
    s.add_argument("--satisfied", type=float, help="largest margin counted as satisfied")
    s.add_argument("--marginal", type=float, help="largest margin counted as marginal")
    s.set_defaults(func=cmd_criteria)

    s = sub.add_parser("report", help="diagnostic dumps")
    rsub = s.add_subparsers(dest="what", required=True, metavar="WHAT")
    r = rsub.add_parser("decouple", help="X, Y, g, Va, Vb and the gap ratio")
    r.add_argument("--config", required=True)
    r.add_argument("--format", choices=("text", "csv"), default="text")
    r.add_argument("--rank-tol", type=float, default=1e-12)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    # debugging aid, deliberately left out of the command list
    s = sub.add_parser("specfun-eval")
    for name in ("a_re", "a_im", "b", "z_re", "z_im"):
        s.add_argument(name, type=float)
    s.add_argument("--rel-tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_specfun)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, GridError, ValueError) as exc:
        print(f"lingrid: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, RuntimeError) as exc:
        print(f"lingrid: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
