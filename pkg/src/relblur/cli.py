"""Command-line interface: estimate, synth-eval, evaluate-pair, optics, decimate."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import REPORT_SCHEMA, RunConfig
from .errors import RelblurError
from .estimation import blur_map_to_gray, estimate_blur_map, save_blur_map
from .framework import cached_weight_matrix
from .imgio import load_gray, save_gray
from .optics import (
    CameraSettings,
    c_max_bounded,
    c_max_foreground,
    recommend_decimation,
)
from .partition import evaluate_pair, fusion_view, write_evaluation_csv
from .reconstruct import reconstruction_report
from .resample import kaiser_sinc_taps, decimate
from .synth import linear_sigma_field, synthetic_accuracy_run


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    grid = parser.add_argument_group("framework grids")
    grid.add_argument("--sigma-count", type=int, default=50)
    grid.add_argument("--sigma-min", type=float, default=0.1)
    grid.add_argument("--sigma-max", type=float, default=5.0)
    grid.add_argument("--radial-count", type=int, default=100)
    grid.add_argument("--tie-tol", type=float, default=1e-4)
    grid.add_argument("--eq-tol", type=float, default=1e-6)
    grid.add_argument("--window", type=int, default=5,
                      help="disambiguation neighborhood side (odd, >= 3)")
    grid.add_argument("--workers", type=int, default=1,
                      help="worker cap; results are identical for any value")


def _config_from(args: argparse.Namespace, output_dir: Path) -> RunConfig:
    return RunConfig(
        sigma_count=args.sigma_count,
        radial_count=args.radial_count,
        sigma_min=args.sigma_min,
        sigma_max=args.sigma_max,
        tie_tol=args.tie_tol,
        eq_tol=args.eq_tol,
        worker_count=args.workers,
        output_dir=output_dir,
    )


def _framework(config: RunConfig):
    weights = cached_weight_matrix(config.sigma_grid(), config.radial_grid())
    return weights, config.quadrature()


def _write_report(path: Path, config: RunConfig, payload: dict) -> None:
    report = {"schema": REPORT_SCHEMA, "config": config.to_dict(), **payload}
    path.write_text(json.dumps(report, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relblur",
        description="Estimate per-pixel relative Gaussian defocus blur between image pairs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the blur map of a registered pair")
    p.add_argument("--left", required=True, help="sharper reference image (PNG/PGM)")
    p.add_argument("--right", required=True, help="blurrier target image (PNG/PGM)")
    p.add_argument("--mask", default=None, help="optional mask image (nonzero = estimate)")
    p.add_argument("--out", default="relblur-out", help="output directory")
    _add_grid_options(p)

    p = sub.add_parser("synth-eval", help="known-blur accuracy experiment on one image")
    p.add_argument("--image", required=True, help="base image (PNG/PGM)")
    p.add_argument("--range", default="1:2", help="sigma ramp as start:end (default 1:2)")
    p.add_argument("--axis", choices=("vertical", "horizontal"), default="vertical")
    p.add_argument("--out", default="relblur-synth", help="output directory")
    _add_grid_options(p)

    p = sub.add_parser("evaluate-pair", help="sharpness-partition evaluation of a pair")
    p.add_argument("--ib", help="background-focused image (PNG/PGM)")
    p.add_argument("--if", dest="if_", help="foreground-focused image (PNG/PGM)")
    p.add_argument("--manifest", default=None,
                   help="CSV of dataset_id,ib_path,if_path rows (instead of --ib/--if)")
    p.add_argument("--dataset-id", default="pair", help="identifier for the CSV row")
    p.add_argument("--decimate", type=int, default=1, help="decimation factor before evaluation")
    p.add_argument("--csv", default="evaluation.csv", help="output CSV path")
    p.add_argument("--fusion-out", default=None, help="optional directory for fusion views")
    _add_grid_options(p)

    p = sub.add_parser("optics", help="thin-lens blur-circle report")
    p.add_argument("--f", type=float, required=True, help="focal length, mm")
    p.add_argument("--fn", type=float, required=True, help="f-number")
    p.add_argument("--df", type=float, required=True, help="focus/foreground distance, mm")
    p.add_argument("--db", type=float, default=None, help="background distance, mm (default infinity)")
    p.add_argument("--pitch", type=float, required=True, help="pixel pitch, micrometers")
    p.add_argument("--eta", type=float, default=None, help="relative depth bound in (0, 1)")
    p.add_argument("--out", default=None, help="optional JSON output path (default stdout)")

    p = sub.add_parser("decimate", help="anti-aliased decimation of an image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--half-length", type=int, default=8, help="filter half length L")
    p.add_argument("--beta", type=float, default=10.0, help="Kaiser shape parameter")

    return parser


def cmd_estimate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _config_from(args, out)
    left = load_gray(args.left)
    right = load_gray(args.right)
    mask = None
    if args.mask is not None:
        mask = load_gray(args.mask) > 0
    weights, quadrature = _framework(config)
    blur = estimate_blur_map(left, right, weights, quadrature, mask=mask,
                             tie_tol=config.tie_tol, window=args.window)
    save_blur_map(blur, out / "blurmap.dfbm")
    save_gray(blur_map_to_gray(blur), out / "blurmap.pgm")
    recon = reconstruction_report(left, right, blur)
    save_gray(recon.r_hat, out / "reconstruction.png")
    valid_res = blur.residual[blur.valid]
    _write_report(out / "report.json", config, {
        "coverage": blur.coverage,
        "floored_fraction": float(blur.floored.mean()),
        "residual_mean": float(valid_res.mean()) if valid_res.size else None,
        "reconstruction": recon.to_dict(),
    })
    print(f"coverage {blur.coverage:.3f}  recon MAE {recon.mae:.6f}  -> {out}")
    return 0


def cmd_synth_eval(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _config_from(args, out)
    image = load_gray(args.image)
    try:
        start, end = (float(v) for v in args.range.split(":"))
    except ValueError:
        raise RelblurError(f"--range expects start:end, got {args.range!r}") from None
    h, w = image.shape
    field = linear_sigma_field(w, h, start, end, axis=args.axis)
    weights, quadrature = _framework(config)
    report = synthetic_accuracy_run(image, field, weights, quadrature,
                                    tie_tol=config.tie_tol, window=args.window)
    save_gray(np.clip(report.blurred, 0, 1), out / "blurred.png")
    save_gray(blur_map_to_gray(report.blur), out / "sigma_estimate.pgm")
    save_blur_map(report.blur, out / "sigma_estimate.dfbm")
    np.save(out / "sigma_truth.npy", field.values)
    _write_report(out / "report.json", config, report.to_dict())
    print(f"sigma MAE {report.sigma_mae_percent:.3f}%  recon MAE {report.recon_mae:.2e}"
          f"  coverage {report.coverage:.3f}  -> {out}")
    return 0


def _evaluate_one(ib_path: str, if_path: str, dataset_id: str,
                  args: argparse.Namespace, config: RunConfig, weights, quadrature):
    img_b = load_gray(ib_path)
    img_f = load_gray(if_path)
    if args.decimate > 1:
        img_b = decimate(img_b, args.decimate)
        img_f = decimate(img_f, args.decimate)
    pe = evaluate_pair(img_b, img_f, weights, quadrature,
                       eq_tol=config.eq_tol, tie_tol=config.tie_tol,
                       window=args.window, keep_reconstructions=args.fusion_out is not None)
    if args.fusion_out is not None:
        fdir = Path(args.fusion_out)
        fdir.mkdir(parents=True, exist_ok=True)
        original = fusion_view(img_b, img_f, pe.partition)
        estimated = fusion_view(img_b, img_f, pe.partition,
                                b_values=pe.b_hat, f_values=pe.f_hat)
        save_gray(np.clip(original, 0, 1), fdir / f"{dataset_id}-fusion.png")
        save_gray(np.clip(estimated, 0, 1), fdir / f"{dataset_id}-fusion-estimated.png")
    return pe


def cmd_evaluate_pair(args: argparse.Namespace) -> int:
    config = _config_from(args, Path("."))
    weights, quadrature = _framework(config)
    jobs: list[tuple[str, str, str]] = []
    if args.manifest is not None:
        with open(args.manifest, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith("#"):
                    continue
                if len(row) != 3:
                    raise RelblurError(f"manifest rows need dataset_id,ib,if: {row}")
                jobs.append((row[0].strip(), row[1].strip(), row[2].strip()))
    elif args.ib and args.if_:
        jobs.append((args.dataset_id, args.ib, args.if_))
    else:
        raise RelblurError("provide either --ib and --if, or --manifest")
    rows = []
    for dataset_id, ib_path, if_path in jobs:
        pe = _evaluate_one(ib_path, if_path, dataset_id, args, config, weights, quadrature)
        rows.append((dataset_id, pe))
        e_b = "n/a" if pe.e_b is None else f"{pe.e_b:.4f}"
        e_f = "n/a" if pe.e_f is None else f"{pe.e_f:.4f}"
        print(f"{dataset_id}: {pe.resolution[0]}x{pe.resolution[1]}"
              f"  B-sharper {pe.pct_b_sharper:.1f}%  F-sharper {pe.pct_f_sharper:.1f}%"
              f"  e_B {e_b}  e_F {e_f}")
    write_evaluation_csv(rows, args.csv)
    print(f"wrote {args.csv}")
    return 0


def cmd_optics(args: argparse.Namespace) -> int:
    settings = CameraSettings.from_f_number(args.f, args.fn, args.df, pixel_pitch_um=args.pitch)
    d_b = math.inf if args.db is None else args.db
    bound = c_max_foreground(args.df, d_b, args.f, args.fn)
    approx_pitches = settings.to_pitches(bound.approx)
    report = {
        "schema": REPORT_SCHEMA,
        "settings": {
            "focal_mm": args.f,
            "f_number": args.fn,
            "aperture_mm": settings.aperture_a,
            "focus_dist_mm": args.df,
            "background_mm": None if math.isinf(d_b) else d_b,
            "pixel_pitch_um": args.pitch,
        },
        "c_zero_mm": settings.c_zero,
        "c_max_exact_mm": bound.exact,
        "c_max_approx_mm": bound.approx,
        "c_max_exact_pitches": settings.to_pitches(bound.exact),
        "c_max_approx_pitches": approx_pitches,
        "recommended_decimation": recommend_decimation(approx_pitches),
    }
    if args.eta is not None:
        report["c_max_bounded_mm"] = c_max_bounded(settings, args.eta)
        report["c_max_bounded_pitches"] = settings.to_pitches(report["c_max_bounded_mm"])
    text = json.dumps(report, indent=2)
    if args.out is None:
        print(text)
    else:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_decimate(args: argparse.Namespace) -> int:
    image = load_gray(args.input)
    fir = kaiser_sinc_taps(args.factor, args.half_length, args.beta)
    small = decimate(image, args.factor, fir)
    save_gray(np.clip(small, 0.0, 1.0), args.output)
    print(f"{image.shape[1]}x{image.shape[0]} -> {small.shape[1]}x{small.shape[0]}"
          f"  wrote {args.output}")
    return 0


_HANDLERS = {
    "estimate": cmd_estimate,
    "synth-eval": cmd_synth_eval,
    "evaluate-pair": cmd_evaluate_pair,
    "optics": cmd_optics,
    "decimate": cmd_decimate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except RelblurError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
