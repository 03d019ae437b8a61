"""Command-line surface.

Subcommands: ``stats``, ``sweep``, ``figure``, ``montecarlo``, ``solve``.
All outputs are pure functions of the arguments (plus spec file and
seed), so repeated invocations write byte-identical files.  Exit codes:
0 success, 2 usage/parameter error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import NonConvergenceError, UndefinedQError
from .oracles import monte_carlo_experiment
from .solvers import (efficiency_threshold, minimum_poissonian_threshold,
                      optimal_squeezing_for_mandel_q,
                      solve_threshold_for_mandel_q)
from .stats import (AcceptanceWindow, DetectorModel, Squeezing,
                    acceptance_probability_imperfect, mandel_q,
                    mean_photon_number, photon_distribution,
                    second_factorial_moment)
from .sweeps import (FigureJob, SweepSpec, build_figure, format_csv,
                     format_json, run_sweep, FIGURE_IDS)

USAGE_ERROR, NONCONVERGENCE_ERROR = 2, 3


def _parse_grid(text: str) -> list[float]:
    """Either a comma list '0.1,0.2' or an inclusive range 'start:stop:count'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"range count must be >= 1, got {count}")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",")]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _emit_record(record: dict, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit(json.dumps(_json_safe(record), indent=2) + "\n", out)
    else:
        keys = list(record)
        meta = {"generator": f"quadherald {__version__}"}
        _emit(format_csv(meta, keys, [record]), out)


def _detector(args) -> DetectorModel:
    return DetectorModel(eta=args.eta, n_bar=args.nbar)


def _cmd_stats(args) -> int:
    if args.lam == 0.0:
        raise UndefinedQError("Mandel Q is undefined at lambda = 0")
    s = Squeezing(args.lam)
    w = AcceptanceWindow.threshold(args.x0)
    d = _detector(args)
    stats = photon_distribution(s, w, d, tol=args.tol)
    record = {
        "lambda": args.lam, "x0": args.x0, "eta": args.eta, "nbar": args.nbar,
        "tol": args.tol,
        "acceptance_probability": stats.acceptance_probability,
        "mean_n": stats.mean_n,
        "second_factorial": stats.second_factorial,
        "mandel_q": stats.mandel_q,
        "n_max": stats.n_max,
        "truncation_error_bound": stats.truncation_error_bound,
    }
    if args.pn:
        record["p"] = [float(v) for v in stats.p]
    _emit_record(record, args.format, args.out)
    return 0


def _cmd_sweep(args) -> int:
    if args.spec is not None:
        spec = SweepSpec.from_json_file(args.spec)
    else:
        if args.lam is None or args.x0 is None:
            raise ValueError("sweep needs --spec or both --lambda and --x0")
        kwargs = dict(lam=tuple(args.lam), x0=tuple(args.x0))
        if args.eta is not None:
            kwargs["eta"] = tuple(args.eta)
        if args.nbar is not None:
            kwargs["nbar"] = tuple(args.nbar)
        if args.quantities is not None:
            kwargs["quantities"] = tuple(args.quantities.split(","))
        if args.tol is not None:
            kwargs["tol"] = args.tol
        if args.pn_max is not None:
            kwargs["pn_max"] = args.pn_max
        if args.radii is not None:
            kwargs["radii"] = tuple(args.radii)
        spec = SweepSpec(**kwargs)
    meta, columns, rows = run_sweep(spec)
    formatter = format_json if args.format == "json" else format_csv
    _emit(formatter(meta, columns, rows), args.out)
    return 0


def _cmd_figure(args) -> int:
    overrides = {}
    if args.lam is not None:
        overrides["lam"] = args.lam
    if args.x0 is not None:
        overrides["x0"] = args.x0
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.q is not None:
        overrides["q"] = args.q
    job = FigureJob(figure_id=args.figure_id, overrides=overrides)
    meta, columns, rows = build_figure(job)
    formatter = format_json if args.format == "json" else format_csv
    suffix = "json" if args.format == "json" else "csv"
    out = args.out if args.out is not None else f"{args.figure_id}.{suffix}"
    _emit(formatter(meta, columns, rows), out)
    return 0


def _cmd_montecarlo(args) -> int:
    s = Squeezing(args.lam)
    w = AcceptanceWindow.threshold(args.x0)
    d = _detector(args)
    result = monte_carlo_experiment(s, w, d, shots=args.shots, seed=args.seed)
    analytic_c = acceptance_probability_imperfect(s, w, d)
    record = {
        "lambda": args.lam, "x0": args.x0, "eta": args.eta, "nbar": args.nbar,
        **result.to_dict(),
        "analytic_C": analytic_c,
    }
    if args.lam > 0.0:
        record["analytic_mean"] = mean_photon_number(s, w, d)
        record["analytic_Q"] = mandel_q(s, w, d)
        se = result.standard_errors
        record["z_scores"] = {
            "C": _zscore(result.empirical_c, analytic_c, se["C"]),
            "mean": _zscore(result.empirical_mean, record["analytic_mean"],
                            se["mean"]),
            "Q": _zscore(result.empirical_q, record["analytic_Q"], se["Q"]),
        }
    _emit_record(record, args.format, args.out)
    return 0


def _zscore(empirical: float, analytic: float, se: float) -> float:
    if not np.isfinite(se) or se == 0.0:
        return float("nan")
    return (empirical - analytic) / se


def _cmd_solve(args) -> int:
    record = {"kind": args.kind}
    if args.kind == "x0-min":
        report = minimum_poissonian_threshold()
        record.update(report.to_dict())
    elif args.kind == "eta-threshold":
        record["nbar"] = args.nbar
        record["solution"] = efficiency_threshold(args.nbar)
    elif args.kind == "x0-for-q":
        if args.lam is None or args.q is None:
            raise ValueError("solve x0-for-q needs --lambda and --q")
        record.update({"lambda": args.lam, "q": args.q,
                       "eta": args.eta, "nbar": args.nbar})
        report = solve_threshold_for_mandel_q(Squeezing(args.lam), args.q,
                                              _detector(args))
        record.update(report.to_dict())
    else:  # optimal-lambda
        if args.q is None:
            raise ValueError("solve optimal-lambda needs --q")
        record.update({"q": args.q, "eta": args.eta, "nbar": args.nbar})
        report = optimal_squeezing_for_mandel_q(args.q, _detector(args))
        record.update(report.to_dict())
    _emit_record(record, args.format, args.out)
    return 0


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta", type=float, default=1.0,
                        help="detector efficiency (default 1)")
    parser.add_argument("--nbar", type=float, default=0.0,
                        help="auxiliary-mode thermal photons (default 0)")


def _add_output_flags(parser: argparse.ArgumentParser,
                      default_format: str = "json") -> None:
    parser.add_argument("--out", default=None,
                        help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"),
                        default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadherald",
        description="Photon statistics of quadrature-threshold heralded states")
    parser.add_argument("--version", action="version",
                        version=f"quadherald {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="single-point statistics")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    _add_detector_flags(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--pn", action="store_true",
                   help="include the photon-number distribution")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("sweep", help="Cartesian parameter sweep")
    p.add_argument("--spec", default=None, help="JSON sweep spec file")
    p.add_argument("--lambda", dest="lam", type=_parse_grid, default=None,
                   help="comma list or start:stop:count")
    p.add_argument("--x0", type=_parse_grid, default=None)
    p.add_argument("--eta", type=_parse_grid, default=None)
    p.add_argument("--nbar", type=_parse_grid, default=None)
    p.add_argument("--quantities", default=None,
                   help="comma subset of C,mean,second_factorial,Q,p_n,husimi,wigner")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--pn-max", dest="pn_max", type=int, default=None)
    p.add_argument("--radii", type=_parse_grid, default=None)
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="regenerate reference figure data")
    p.add_argument("figure_id", choices=FIGURE_IDS)
    p.add_argument("--lambda", dest="lam", type=_parse_grid, default=None)
    p.add_argument("--x0", type=_parse_grid, default=None)
    p.add_argument("--eta", type=_parse_grid, default=None)
    p.add_argument("--q", type=_parse_grid, default=None)
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("montecarlo", help="shot-level simulation")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    _add_detector_flags(p)
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("solve", help="threshold/optimum solvers")
    p.add_argument("kind", choices=("x0-for-q", "x0-min",
                                    "optimal-lambda", "eta-threshold"))
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    _add_detector_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_solve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NONCONVERGENCE_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
