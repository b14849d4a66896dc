"""Command-line entry point.

Exit codes: 0 success, 1 domain or usage error (or a failed oracle/calibration
check), 2 I/O error.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from optomacro.core import DomainError, ModelParams, thermal_occupation_from_ratio
from optomacro.emit import FORMATS, emit
from optomacro.measure import macroscopicity
from optomacro.oracle import (
    RATIO_CV_TOLERANCE,
    QuadratureError,
    QuadratureSpec,
    consistency_report,
    single_mode_cat_calibration,
)
from optomacro.sweep import FIGURES, PARAMETERS, SweepSpec, figure_spec, run_sweep
from optomacro.wigner import normalization, phonon_number

log = logging.getLogger("optomacro")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    """``1,2,3`` or an inclusive range ``start:stop:step``."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        n = int(round((stop - start) / step))
        return [round(start + k * step, 12) for k in range(n + 1)]
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    values = _floats(text)
    if any(not v.is_integer() for v in values):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUES, got {text!r}")
    name = name.strip().replace("-", "_")
    if name == "d":
        name = "d_factor"
    return name, value


def _add_point_args(p, lists: bool = False):
    conv_int, conv_float = (_ints, _floats) if lists else (int, float)
    p.add_argument("--n-particles", type=conv_int, default=None)
    p.add_argument("--gamma", type=conv_float, default=None)
    p.add_argument("--nbar", type=conv_float, default=None)
    p.add_argument("--temperature-ratio", type=conv_float, default=None, help="hbar*omega/(k_B*T), replaces --nbar")
    p.add_argument("--d", dest="d_factor", type=conv_float, default=None)


def _add_quad_args(p):
    p.add_argument("--points", type=int, default=121, help="grid points per axis (odd)")
    p.add_argument("--extent-sigma", type=float, default=8.0)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--fd-order", type=int, choices=(2, 4), default=4)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS + ("text",), default=None)
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--quiet", action="store_true")

    parser = _Parser(prog="optomacro", description="Macroscopicity of the two-mirror optomechanical state.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate one parameter point")
    _add_point_args(p)
    p.add_argument("--method", choices=("grouped", "naive"), default="grouped")

    p = sub.add_parser("sweep", parents=[common], help="cartesian parameter sweep")
    p.add_argument("--config", type=Path, help="JSON sweep description")
    p.add_argument("--axis", type=_assignment, action="append", default=[], help="NAME=v1,v2,... or NAME=start:stop:step")
    p.add_argument("--fixed", type=_assignment, action="append", default=[], help="NAME=value")
    p.add_argument("--method", choices=("closed_form", "quadrature", "both"), default=None)
    _add_quad_args(p)

    p = sub.add_parser("figure", parents=[common], help="preset figure datasets")
    p.add_argument("fig_id", choices=FIGURES)
    p.add_argument("--temperature-axis", action="store_true", help="fig4 only: sweep hbar*omega/(k_B*T) instead of nbar")

    p = sub.add_parser("oracle", parents=[common], help="closed form versus quadrature consistency report")
    _add_point_args(p, lists=True)
    _add_quad_args(p)

    p = sub.add_parser("calibrate", parents=[common], help="single-mode even-cat calibration")
    p.add_argument("--alpha", type=_floats, default=[0.5, 1.0, 2.0])
    _add_quad_args(p)
    return parser


def _quad_spec(args) -> QuadratureSpec:
    return QuadratureSpec(args.points, args.extent_sigma, args.fd_step, args.fd_order)


def _point(args) -> ModelParams:
    if args.n_particles is None or args.gamma is None:
        raise DomainError("--n-particles and --gamma are required", "n_particles" if args.n_particles is None else "gamma")
    nbar = args.nbar
    if args.temperature_ratio is not None:
        if nbar is not None:
            raise DomainError("give either --nbar or --temperature-ratio, not both", "nbar")
        nbar = thermal_occupation_from_ratio(args.temperature_ratio)
    return ModelParams(args.n_particles, args.gamma, 0.0 if nbar is None else nbar, args.d_factor or 0.0)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _fmt_for(args, default: str) -> str:
    if args.format:
        return args.format
    if args.out is not None:
        return {".json": "json", ".svg": "svg-plot", ".csv": "csv"}.get(args.out.suffix, default)
    return default


def cmd_eval(args) -> int:
    params = _point(args)
    res = macroscopicity(params, method=args.method)
    payload = {
        "params": {"n_particles": params.n_particles, "gamma": params.gamma, "nbar": params.nbar, "d_factor": params.d_factor},
        **asdict(res),
        "n_ph": phonon_number(params),
        "z_norm": normalization(params),
    }
    if _fmt_for(args, "text") == "json":
        _write(json.dumps(payload, indent=1) + "\n", args.out)
    else:
        lines = [f"{k} = {v}" for k, v in payload["params"].items()]
        lines += [f"{k} = {payload[k]!r}" for k in ("raw_value", "value", "numerator", "denominator", "n_terms", "n_ph", "z_norm")]
        _write("\n".join(lines) + "\n", args.out)
    return 0


def _sweep_from_args(args) -> SweepSpec:
    if args.config:
        try:
            spec = SweepSpec.from_file(args.config)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DomainError(f"invalid sweep config {args.config}: {exc}", "config") from exc
        return dataclasses.replace(spec, method=args.method) if args.method else spec
    axes = []
    fixed = {}
    try:
        for name, values in args.axis:
            axes.append((name, _ints(values) if name == "n_particles" else _floats(values)))
        for name, value in args.fixed:
            fixed[name] = int(value) if name == "n_particles" else float(value)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise DomainError(f"bad sweep value: {exc}", "axis") from exc
    named = {n for n, _ in axes} | set(fixed)
    if "d_factor" not in named:
        fixed["d_factor"] = 0.0
    if not named & {"nbar", "temperature_ratio"}:
        fixed["nbar"] = 0.0
    for name in named:
        if name not in PARAMETERS:
            raise DomainError(f"unknown sweep parameter {name!r}", name)
    return SweepSpec(axes, fixed, method=args.method or "closed_form", quadrature=_quad_spec(args))


def _emit_rows(rows, spec: SweepSpec, args) -> int:
    fmt = _fmt_for(args, spec.format or "csv")
    if fmt == "text":
        fmt = "csv"
    out = args.out if args.out is not None else spec.out
    text = emit(rows, fmt, out, meta=spec.meta, axes=spec.axis_names)
    if text is not None:
        sys.stdout.write(text)
    log.info("%d rows written%s", len(rows), f" to {out}" if out else "")
    return 0


def cmd_sweep(args) -> int:
    spec = _sweep_from_args(args)
    return _emit_rows(run_sweep(spec, workers=args.threads), spec, args)


def cmd_figure(args) -> int:
    spec = figure_spec(args.fig_id, temperature_axis=args.temperature_axis)
    return _emit_rows(run_sweep(spec, workers=args.threads), spec, args)


def cmd_oracle(args) -> int:
    ns = args.n_particles or [1, 2]
    gammas = args.gamma or [0.5, 1.0, 1.5]
    if args.temperature_ratio:
        nbars = [thermal_occupation_from_ratio(t) for t in args.temperature_ratio]
    else:
        nbars = args.nbar or [0.0, 0.5]
    ds = args.d_factor or [0.0, 0.3]
    grid = [ModelParams(n, g, nb, d) for n in ns for g in gammas for nb in nbars for d in ds]
    report = consistency_report(grid, _quad_spec(args), workers=args.threads)
    _write(json.dumps(report.to_dict(), indent=1, allow_nan=True) + "\n", args.out)
    summary = report.summary
    if not summary["defined"]:
        log.warning("no determinate ratio rows; summary undefined")
        return 0
    log.info("mean I ratio (closed/quadrature) = %.10g, coefficient of variation = %.3g", summary["mean_ratio"], summary["ratio_cv"])
    if summary["constant_factor_discrepancy"]:
        log.warning("closed form and quadrature differ by a global factor %.10g", summary["mean_ratio"])
    if summary["ratio_cv"] > RATIO_CV_TOLERANCE:
        log.error("I ratio is not constant across the grid (cv %.3g > %g)", summary["ratio_cv"], RATIO_CV_TOLERANCE)
        return 1
    return 0


def cmd_calibrate(args) -> int:
    spec = _quad_spec(args)
    ok = True
    lines = []
    for alpha in args.alpha:
        measure, mean_n = single_mode_cat_calibration(alpha, spec)
        rel = abs(measure - mean_n) / mean_n
        ok &= rel < 0.01
        lines.append({"alpha": alpha, "measure": measure, "mean_excitation": mean_n, "rel_diff": rel})
    if _fmt_for(args, "text") == "json":
        _write(json.dumps(lines, indent=1) + "\n", args.out)
    else:
        _write("".join(f"alpha={d['alpha']:g} measure={d['measure']!r} mean_excitation={d['mean_excitation']!r} rel_diff={d['rel_diff']:.3g}\n" for d in lines), args.out)
    return 0 if ok else 1


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "figure": cmd_figure, "oracle": cmd_oracle, "calibrate": cmd_calibrate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"optomacro: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, QuadratureError) as exc:
        print(f"optomacro: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"optomacro: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
