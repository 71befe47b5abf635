"""Command-line front end: ``nnkop <command> [options]``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from fractions import Fraction

import numpy as np

from nnkop import __version__
from nnkop.baselines import resize_bicubic, resize_bilinear
from nnkop.experiments import (
    BENCH_N_VALUES,
    BenchmarkRow,
    convergence_study,
    rescale_benchmark,
    rows_to_csv,
)
from nnkop.imaging import DB_WINDOW, model_image, rescale_image, sar_to_gray
from nnkop.io import read_image, read_rf32, write_image
from nnkop.metrics import metrics_report
from nnkop.operators import Box, StepFunction
from nnkop.sigmoid import DEFAULT_TOL, DensityKernel, SigmoidFamily


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _int_list(text: str) -> list:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _scale(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a positive rational scale, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"scale must be positive, got {text}")
    return v


def _tol(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (0, 1), got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {v}")
    return v


def _kernel_opts(p: argparse.ArgumentParser):
    p.add_argument("--kernel", choices=[f.value for f in SigmoidFamily], default="tanh",
                   help="sigmoid generating the density (default: tanh)")
    p.add_argument("--tol", type=_tol, default=DEFAULT_TOL, help="kernel truncation tolerance")


def _ssim_opt(p: argparse.ArgumentParser):
    p.add_argument("--ssim-mode", choices=["windowed", "global"], default="windowed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nnkop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("model", help="model an image with the operator at its pixel centers")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=_positive_int, default=5)
    p.add_argument("--report", help="CSV file for metrics against the input")
    _kernel_opts(p)
    _ssim_opt(p)

    p = sub.add_parser("rescale", help="resample an image by a scale factor")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--scale", type=_scale, required=True)
    p.add_argument("--n", type=_positive_int, default=15)
    p.add_argument("--method", choices=["nn", "bilinear", "bicubic"], default="nn")
    p.add_argument("--reference", help="image to score the result against")
    p.add_argument("--report", help="CSV file for metrics (needs --reference)")
    _kernel_opts(p)
    _ssim_opt(p)

    p = sub.add_parser("compare", help="metrics between two images")
    p.add_argument("--input", required=True, help="candidate image")
    p.add_argument("--reference", required=True)
    p.add_argument("--report", help="CSV file (default: standard output)")
    _ssim_opt(p)

    p = sub.add_parser("bench", help="downscale/upscale benchmark against bilinear and bicubic")
    p.add_argument("--input", required=True, help="reference image")
    p.add_argument("--factor", type=_positive_int, default=2)
    p.add_argument("--n-list", type=_int_list, default=list(BENCH_N_VALUES))
    p.add_argument("--report", help="CSV file (default: standard output)")
    p.add_argument("--timing", action="store_true", help="fill the seconds column (makes output run-dependent)")
    _kernel_opts(p)
    _ssim_opt(p)

    p = sub.add_parser("convergence", help="empirical convergence study on a test function")
    p.add_argument("--function", choices=["abs", "sincos", "step"], default="abs",
                   help="abs: |x-1/2| on [0,1]; sincos: sin(3x)cos(2y) on [0,1]^2; step: 1_{x>1/3} on [0,1]")
    p.add_argument("--n-list", type=_int_list, default=[10, 20, 40, 80, 160, 320])
    p.add_argument("--report", help="CSV file (default: standard output)")
    _kernel_opts(p)

    p = sub.add_parser("sar2gray", help="convert RF32 linear backscatter to an 8-bit dB image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--db-window", type=_positive_float, default=DB_WINDOW)
    return parser


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kernel(args) -> DensityKernel:
    return DensityKernel(args.kernel, args.tol)


def _cmd_model(args):
    img = read_image(args.input)
    t0 = time.perf_counter()
    out, _ = model_image(img, args.n, _kernel(args))
    dt = time.perf_counter() - t0
    write_image(args.output, out)
    if args.report:
        row = BenchmarkRow(f"nn-{args.kernel}", args.n, metrics_report(img, out, args.ssim_mode), dt)
        _emit(rows_to_csv([row]), args.report)


def _cmd_rescale(args, parser):
    if args.report and not args.reference:
        parser.error("rescale --report needs --reference")
    img = read_image(args.input)
    t0 = time.perf_counter()
    if args.method == "nn":
        out, _ = rescale_image(img, args.scale, args.n, _kernel(args))
    elif args.method == "bilinear":
        out = resize_bilinear(img, args.scale)
    else:
        out = resize_bicubic(img, args.scale)
    dt = time.perf_counter() - t0
    write_image(args.output, out)
    if args.report:
        ref = read_image(args.reference)
        label = f"nn-{args.kernel}" if args.method == "nn" else args.method
        n = args.n if args.method == "nn" else None
        _emit(rows_to_csv([BenchmarkRow(label, n, metrics_report(ref, out, args.ssim_mode), dt)]), args.report)


def _cmd_compare(args):
    cand = read_image(args.input)
    ref = read_image(args.reference)
    row = BenchmarkRow("compare", None, metrics_report(ref, cand, args.ssim_mode), 0.0)
    _emit(rows_to_csv([row]), args.report)


def _cmd_bench(args):
    img = read_image(args.input)
    rows = rescale_benchmark(img, args.factor, args.n_list, args.ssim_mode, _kernel(args))
    _emit(rows_to_csv(rows, timing=args.timing), args.report)


def _test_function(name: str):
    if name == "abs":
        return (lambda x: np.abs(x - 0.5)), Box.unit(1)
    if name == "sincos":
        return (lambda x, y: np.sin(3 * x) * np.cos(2 * y)), Box.unit(2)
    f = StepFunction([np.array([0.0, 1.0 / 3.0, 1.0])], np.array([0.0, 1.0]))
    return f, f.box


def _cmd_convergence(args):
    f, box = _test_function(args.function)
    study = convergence_study(f, _kernel(args), sorted(args.n_list), box)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sup_error", "l1_error", "l2_error"])
    for r in study.records:
        w.writerow([r.n, f"{r.sup_error:.6g}", f"{r.l1_error:.6g}", f"{r.l2_error:.6g}"])
    _emit(buf.getvalue(), args.report)
    print(f"empirical order (sup error): {study.order:.4g}", file=sys.stderr)


def _cmd_sar2gray(args):
    write_image(args.output, sar_to_gray(read_rf32(args.input), args.db_window))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "model":
            _cmd_model(args)
        elif args.command == "rescale":
            _cmd_rescale(args, parser)
        elif args.command == "compare":
            _cmd_compare(args)
        elif args.command == "bench":
            _cmd_bench(args)
        elif args.command == "convergence":
            _cmd_convergence(args)
        elif args.command == "sar2gray":
            _cmd_sar2gray(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"nnkop {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
