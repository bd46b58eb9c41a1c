"""
smoothlab command line: single-quantity computations, verification runs and report aggregation.

Exit codes: 0 success (verify: every case passed), 1 some case failed or was inconclusive,
2 bad input or configuration. Errors go to stderr as one "error: ..." line; results go to stdout.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from smoothlab import __version__
from smoothlab.core.gridfn import GridFunction, double_star, rearrange
from smoothlab.core.interp import QuasiconcaveProfile, holmstedt_A_rhs, holmstedt_B_rhs, parse_lattice
from smoothlab.core.literals import parse_weight
from smoothlab.core.smoothness import k_upper, modulus_curve
from smoothlab.core.spaces import parse_space, space_norm
from smoothlab.core.weights import check_Binftystar, check_Br, check_Brstar
from smoothlab.harness.reports import best_constant, format_summary, load_report, summary_csv
from smoothlab.harness.runner import run_suite
from smoothlab.harness.schemas import TGridConfig, load_run_config, run_config_schema
from smoothlab.observability.logging import configure_logging, get_logger
from smoothlab.observability.metrics import write_metrics_file
from smoothlab.shared.config import ConfigError
from smoothlab.shared.errors import InputError, LabError
from smoothlab.shared.files import atomic_write_text
from smoothlab.shared.settings import get_lab_settings

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2


def format_value(x: float) -> str:
    """12 significant digits; "+inf" for divergent values."""
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _csv(header: tuple[str, str], t: np.ndarray, v: Sequence[float]) -> str:
    lines = [",".join(header)]
    lines += [f"{float(a)!r},{'inf' if math.isinf(b) else repr(float(b))}" for a, b in zip(t, v)]
    return "\n".join(lines) + "\n"


def _tgrid(args: argparse.Namespace) -> np.ndarray:
    try:
        grid = TGridConfig(lo=args.t_lo, hi=args.t_hi, per_octave=args.per_octave)
    except ValidationError as e:
        raise InputError(f"invalid t-grid: {e.errors()[0]['msg']}") from e
    points = grid.points()
    if points.size == 0:
        raise InputError(f"empty t-grid between {args.t_lo} and {args.t_hi}")
    return points


def _emit(text: str, out: Optional[str], name: str) -> None:
    """Print to stdout, or write atomically under the --out directory."""
    if out:
        path = atomic_write_text(Path(out) / name, text)
        print(path)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_rearrange(args: argparse.Namespace) -> int:
    f = GridFunction.load(args.input)
    star = rearrange(f)
    out = Path(getattr(args, "out", None) or get_lab_settings().OUT_DIR)
    stem = Path(args.input).stem
    p1 = atomic_write_text(out / f"{stem}.fstar.csv", star.to_csv())
    p2 = atomic_write_text(out / f"{stem}.fstarstar.csv", double_star(star).to_csv(per_piece=args.per_piece))
    print(p1)
    print(p2)
    return EXIT_OK


def cmd_norm(args: argparse.Namespace) -> int:
    spec = parse_space(args.space)
    f = GridFunction.load(args.input)
    print(format_value(space_norm(spec, f)))
    return EXIT_OK


def cmd_modulus(args: argparse.Namespace) -> int:
    spec = parse_space(args.space)
    f = GridFunction.load(args.input)
    t = _tgrid(args)
    dirs = args.dir_samples or get_lab_settings().DIR_SAMPLES
    curve = modulus_curve(f, args.kappa, spec, float(t[-1]), mode=args.mode, dir_samples=dirs)
    _emit(_csv(("t", "omega"), t, np.atleast_1d(curve(t))), getattr(args, "out", None), "modulus.csv")
    return EXIT_OK


def cmd_kfun(args: argparse.Namespace) -> int:
    spec = parse_space(args.space)
    f = GridFunction.load(args.input)
    t = _tgrid(args)
    values = [k_upper(f, float(x), args.k, spec) for x in t]
    _emit(_csv(("t", "K"), t, values), getattr(args, "out", None), "kfun.csv")
    return EXIT_OK


def cmd_weights(args: argparse.Namespace) -> int:
    w = parse_weight(args.weight)
    if args.check == "Br":
        res = check_Br(w, args.r)
    elif args.check == "Brstar":
        res = check_Brstar(w, args.r)
    else:
        res = check_Binftystar(w)
    name = res.condition
    if res.holds:
        suffix = " (heuristic)" if res.heuristic else ""
        print(f"{name} holds, c = {res.constant:.6f}{suffix}")
    else:
        print(f"{name} fails" + (f": {res.reason}" if res.reason else ""))
    return EXIT_OK


def cmd_holmstedt(args: argparse.Namespace) -> int:
    profile = QuasiconcaveProfile.from_csv(Path(args.profile).read_text(encoding="utf-8"))
    F = parse_lattice(args.lattice)
    t = _tgrid(args)
    fn = holmstedt_A_rhs if args.form == "A1" else holmstedt_B_rhs
    values = [fn(profile, F, float(x)) for x in t]
    _emit(_csv(("t", "rhs"), t, values), getattr(args, "out", None), f"holmstedt_{args.form}.csv")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    update = {}
    if getattr(args, "seed", None) is not None:
        update["seed"] = args.seed
    if getattr(args, "grid", None) is not None:
        update["grid"] = config.grid.model_copy(update={"cells": args.grid})
    if update:
        config = config.model_copy(update=update)
    out = getattr(args, "out", None) or config.out or get_lab_settings().OUT_DIR
    result = run_suite(config, out=out, jobs=getattr(args, "jobs", None),
                       extended=getattr(args, "extended", False), plots=not args.no_plots)
    for r in result.reports:
        ratio = "-" if r.sup_ratio is None else format_value(r.sup_ratio)
        print(f"{r.label}: {r.verdict} sup_ratio={ratio}")
    for label in result.skipped:
        print(f"{label}: SKIPPED (extended)")
    return result.exit_code


def cmd_report(args: argparse.Namespace) -> int:
    reports = [load_report(p) for p in args.reports]
    rows = best_constant(reports)
    sys.stdout.write(format_summary(rows))
    out = getattr(args, "out", None)
    if out:
        print(atomic_write_text(Path(out) / "summary.csv", summary_csv(rows)))
    return EXIT_OK


def cmd_schema(args: argparse.Namespace) -> int:
    print(run_config_schema())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from overwriting a flag given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the run seed")
    common.add_argument("--grid", type=int, default=argparse.SUPPRESS, help="cells per axis for verify runs")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="parallel family members")
    common.add_argument("--extended", action="store_true", default=argparse.SUPPRESS,
                        help="include cases tagged extended")
    common.add_argument("--metrics-file", default=argparse.SUPPRESS,
                        help="write Prometheus metrics here after the command")
    common.add_argument("--log-json", action="store_true", default=argparse.SUPPRESS, help="JSON logs on stderr")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS, help="info-level logs")
    return common


def _add_tgrid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-lo", type=float, default=2.0 ** -8)
    p.add_argument("--t-hi", type=float, default=2.0 ** -2)
    p.add_argument("--per-octave", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="smoothlab", parents=[common],
                                     description="Rearrangements, Lorentz-type norms, moduli and K-functionals")
    parser.add_argument("--version", action="version", version=f"smoothlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rearrange", parents=[common], help="write f* and f** CSVs")
    p.add_argument("input", help="GridFunction file (.csv or .npz)")
    p.add_argument("--per-piece", type=int, default=3, help="samples per smooth piece of f**")
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("norm", parents=[common], help="norm of a grid function in a space")
    p.add_argument("space", help='space literal, e.g. "Lorentz(p=2,r=2)"')
    p.add_argument("input")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("modulus", parents=[common], help="measured modulus of smoothness over a t-grid")
    p.add_argument("input")
    p.add_argument("--space", required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--mode", choices=("axis", "full"), default="axis")
    p.add_argument("--dir-samples", type=int, default=None)
    _add_tgrid(p)
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("kfun", parents=[common], help="K(f, t^k; X, W^k X) upper estimates over a t-grid")
    p.add_argument("input")
    p.add_argument("--space", required=True)
    p.add_argument("--k", type=int, default=1)
    _add_tgrid(p)
    p.set_defaults(func=cmd_kfun)

    p = sub.add_parser("weights", parents=[common], help="B_r / B_r* / B_inf* condition of a weight")
    p.add_argument("check", choices=("Br", "Brstar", "Binftystar"))
    p.add_argument("weight", help='weight literal, e.g. "t^0.5"')
    p.add_argument("--r", type=float, default=2.0)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("holmstedt", parents=[common], help="(A1)/(A2) right-hand sides for a K-profile CSV")
    p.add_argument("profile", help="two-column t,K CSV")
    p.add_argument("lattice", help='lattice literal, e.g. "F(q=1,theta=0.5,gamma=0)"')
    p.add_argument("--form", choices=("A1", "A2"), default="A1")
    _add_tgrid(p)
    p.set_defaults(func=cmd_holmstedt)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("config", nargs="?", default=None, help="run config (YAML/JSON); default: bundled suite")
    p.add_argument("--no-plots", action="store_true", help="skip SVG plots")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common], help="best-constant table from report JSON files")
    p.add_argument("reports", nargs="+")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("schema", parents=[common], help="print the run-config JSON schema")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(e.code or 0)
    if getattr(args, "log_json", False) or getattr(args, "verbose", False):
        configure_logging(json_output=getattr(args, "log_json", None) or None,
                          level="INFO" if getattr(args, "verbose", False) else None)
    if args.command == "verify" and args.config is None:
        args.config = get_lab_settings().SUITE_PATH
    try:
        code = args.func(args)
    except (ConfigError, LabError, ValidationError, OSError, ValueError) as e:
        msg = e.errors()[0]["msg"] if isinstance(e, ValidationError) else str(e)
        print(f"error: {msg}", file=sys.stderr)
        logger.debug("command_failed", command=args.command, error=msg)
        code = EXIT_USAGE
    metrics = getattr(args, "metrics_file", None)
    if metrics:
        if not write_metrics_file(metrics):
            print("error: prometheus_client is not installed; no metrics written", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
