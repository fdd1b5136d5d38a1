"""Command-line interface: ``boundary-sdf <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 computation error.  Data goes to
stdout or files, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from boundary_sdf import losses, metrics
from boundary_sdf.distance import normalize_sdf, signed_distance, to_pixel_units
from boundary_sdf.errors import ToolkitError
from boundary_sdf.grid import load_mask, load_sdf, save_mask, save_sdf
from boundary_sdf.gradcheck import run_gradcheck
from boundary_sdf.optimize import DescentConfig, compare, fmt_float
from boundary_sdf.synth import SHAPE_KINDS, PerturbSpec, ShapeSpec, generate, perturb_sdf

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2

DEMO_LR = 50.0
DEMO_STEPS = 500
DEMO_EVAL_EVERY = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- output helpers -------------------------------------------------------


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    return json.dumps(v)


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def render_record(record: dict, fmt: str) -> str:
    """One flat record as a JSON object or a two-line CSV (header + row)."""
    if fmt == "json":
        body = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in record.items())
        return "{" + body + "}\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(record.keys())
    writer.writerow([_csv_value(v) for v in record.values()])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise UsageError(f"input file not found: {path}")


def _require_outdir(path: Optional[str]) -> None:
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory does not exist: {parent}")


def _loss_params(args, **extra) -> losses.LossParams:
    return losses.LossParams(gamma=args.gamma, lam=args.lam, p=args.p, **extra)


# -- subcommands ----------------------------------------------------------


def cmd_sdf(args) -> int:
    _require_file(args.mask)
    _require_outdir(args.out)
    sdf = signed_distance(load_mask(args.mask))
    if args.normalize:
        sdf = normalize_sdf(sdf)
    save_sdf(sdf, args.out)
    return EXIT_OK


def cmd_loss(args) -> int:
    _require_file(args.pred)
    _require_file(args.gt)
    _require_outdir(args.out)
    pred, gt = load_sdf(args.pred), load_sdf(args.gt)
    params = _loss_params(args)
    weights = losses.weight_map(to_pixel_units(gt), params.gamma)
    res = losses.focus_sdf_loss(pred, gt, weights, params)
    record = {
        "total": res.total,
        "weighted_term": res.weighted_term,
        "gradient_term": res.gradient_term,
        "gamma": float(params.gamma),
        "lambda": float(params.lam),
        "p": params.p,
    }
    _emit(render_record(record, args.format), args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    _require_file(args.a)
    _require_file(args.b)
    _require_outdir(args.out)
    report = metrics.evaluate(load_mask(args.a), load_mask(args.b))
    _emit(render_record(report.as_dict(), args.format), args.out)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    _require_outdir(args.out)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rep = run_gradcheck(args.seed, args.trials, args.p)
    record = {
        "seed": rep.seed,
        "trials": rep.trials,
        "p": rep.p,
        "max_rel_err_focus": rep.max_rel_err_focus,
        "max_rel_err_dice": rep.max_rel_err_dice,
        "tolerance": rep.tolerance,
        "passed": rep.passed,
    }
    _emit(render_record(record, args.format), args.out)
    if not rep.passed:
        print("gradcheck: analytic gradient disagrees with finite differences", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def _shape_from_args(args, kind: str) -> ShapeSpec:
    params = {}
    for key in ("radius", "r_out", "r_in", "thickness", "half_width", "r_min", "r_max"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.points is not None:
        params["points"] = args.points
    if args.count is not None:
        params["count"] = args.count
    if args.center is not None:
        params["center"] = tuple(args.center)
    return ShapeSpec(kind, (args.height, args.width), params, args.seed)


def cmd_synth(args) -> int:
    if not (args.mask_out or args.sdf_out or args.pred_out):
        raise UsageError("give at least one of --mask-out, --sdf-out, --pred-out")
    for path in (args.mask_out, args.sdf_out, args.pred_out):
        _require_outdir(path)
    mask = generate(_shape_from_args(args, args.kind))
    gt = signed_distance(mask)
    if args.mask_out:
        save_mask(mask, args.mask_out)
    if args.sdf_out:
        save_sdf(normalize_sdf(gt) if args.normalize else gt, args.sdf_out)
    if args.pred_out:
        spec = PerturbSpec(args.noise_sigma, args.bias, args.smooth_radius, args.noise_seed)
        save_sdf(perturb_sdf(gt, spec), args.pred_out)
    return EXIT_OK


def cmd_demo(args) -> int:
    _require_outdir(args.out)
    shape = _shape_from_args(args, args.shape)
    perturb = PerturbSpec(args.noise_sigma, args.bias, args.smooth_radius, args.noise_seed)
    params = _loss_params(args)
    configs = [
        DescentConfig("focus_sdf", args.steps, args.lr, "focus_sdf", params, args.eval_every),
        DescentConfig("uniform_lp", args.steps, args.lr, "uniform_lp", params, args.eval_every),
    ]
    report = compare(shape, perturb, configs)
    with open(args.out, "w", newline="") as fh:
        fh.write(report.to_csv())
    print(report.summary_table())
    failed = [r for r in report.results if r.error is not None]
    for r in failed:
        print(f"demo: config {r.config.name} failed: {r.error}", file=sys.stderr)
    return EXIT_COMPUTE if failed else EXIT_OK


# -- parser ---------------------------------------------------------------


def _add_loss_flags(p: argparse.ArgumentParser, default_p: int = losses.DEFAULT_P) -> None:
    p.add_argument("--gamma", type=float, default=losses.DEFAULT_GAMMA, help="weight decay per pixel of distance")
    p.add_argument("--lambda", dest="lam", type=float, default=losses.DEFAULT_LAMBDA, help="gradient-term balance")
    p.add_argument("--p", type=int, choices=(1, 2), default=default_p, help="error exponent")


def _add_format_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--out", default=None, help="write to this file instead of stdout")


def _add_shape_flags(p: argparse.ArgumentParser, height: int, width: int) -> None:
    p.add_argument("--height", type=int, default=height)
    p.add_argument("--width", type=int, default=width)
    p.add_argument("--center", type=float, nargs=2, metavar=("ROW", "COL"), default=None,
                   help="shape center (default: grid center)")
    p.add_argument("--radius", type=float, default=None, help="disk radius")
    p.add_argument("--r-out", dest="r_out", type=float, default=None, help="annulus outer radius")
    p.add_argument("--r-in", dest="r_in", type=float, default=None, help="annulus inner radius")
    p.add_argument("--thickness", type=float, default=None, help="annulus thickness (r_out - r_in)")
    p.add_argument("--points", type=int, default=None, help="curve control points")
    p.add_argument("--half-width", dest="half_width", type=float, default=None, help="curve half width")
    p.add_argument("--count", type=int, default=None, help="multi_blob disk count")
    p.add_argument("--r-min", dest="r_min", type=float, default=None, help="multi_blob min radius")
    p.add_argument("--r-max", dest="r_max", type=float, default=None, help="multi_blob max radius")
    p.add_argument("--seed", type=int, default=0, help="shape seed")


def _add_perturb_flags(p: argparse.ArgumentParser, sigma: float, bias: float, smooth: int, seed: int) -> None:
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=sigma, help="SDF noise std (px)")
    p.add_argument("--bias", type=float, default=bias, help="uniform SDF offset (px)")
    p.add_argument("--smooth-radius", dest="smooth_radius", type=int, default=smooth,
                   help="box-blur passes over the noise")
    p.add_argument("--noise-seed", dest="noise_seed", type=int, default=seed, help="perturbation seed")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="boundary-sdf", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sdf", help="mask -> SDF1 signed distance file", formatter_class=fmt)
    p.add_argument("mask")
    p.add_argument("out")
    p.add_argument("--normalize", action="store_true", help="z-score and record (mean, std)")
    p.set_defaults(func=cmd_sdf)

    p = sub.add_parser("loss", help="FocusSDF loss between two SDF1 files", formatter_class=fmt)
    p.add_argument("pred")
    p.add_argument("gt")
    _add_loss_flags(p)
    _add_format_flags(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("metrics", help="Dice / IoU / HD95 between two masks", formatter_class=fmt)
    p.add_argument("a")
    p.add_argument("b")
    _add_format_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gradcheck", help="finite-difference check of loss gradients", formatter_class=fmt)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--p", type=int, choices=(1, 2), default=2, help="error exponent")
    _add_format_flags(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="generate a synthetic mask and its SDF", formatter_class=fmt)
    p.add_argument("--kind", choices=SHAPE_KINDS, default="disk")
    _add_shape_flags(p, 64, 64)
    p.add_argument("--mask-out", dest="mask_out", default=None, help="PGM mask output")
    p.add_argument("--sdf-out", dest="sdf_out", default=None, help="SDF1 ground-truth output")
    p.add_argument("--normalize", action="store_true", help="z-score the ground-truth SDF")
    p.add_argument("--pred-out", dest="pred_out", default=None, help="SDF1 perturbed prediction output")
    _add_perturb_flags(p, 0.0, 0.0, 0, 0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("demo", help="descend FocusSDF vs uniform Lp from one start", formatter_class=fmt)
    p.add_argument("--shape", choices=SHAPE_KINDS, default="annulus")
    _add_shape_flags(p, 128, 128)
    _add_perturb_flags(p, 2.0, 1.5, 2, 7)
    _add_loss_flags(p)
    p.add_argument("--steps", type=int, default=DEMO_STEPS)
    p.add_argument("--lr", type=float, default=DEMO_LR)
    p.add_argument("--eval-every", dest="eval_every", type=int, default=DEMO_EVAL_EVERY)
    p.add_argument("--out", default="trajectory.csv", help="trajectory CSV path")
    p.set_defaults(func=cmd_demo)
    return parser


def _demo_shape_defaults(args) -> None:
    if args.command == "demo" and args.shape == "annulus" and args.r_out is None:
        args.r_out = 40.0
        if args.r_in is None and args.thickness is None:
            args.thickness = 3.0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _demo_shape_defaults(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ToolkitError, ValueError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
