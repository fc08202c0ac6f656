"""Command-line front end.

Exit codes: 0 success, 1 runtime failure or malformed input, 2 dimension
mismatch (reconstruct), 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import lightfield, resin
from .core import AngleGrid, CalibrationCurve, load_image, save_image
from .io import FormatError, read_cals, write_cals, write_sinogram_csv
from .optimize import OptimizeConfig, ThresholdModel, normalize_dose, optimize
from .positivity import HEURISTICS, dose_contrast
from .transform import (
    NO_FILTER,
    PURE_RAMP,
    RAMP_EXP,
    FilterSpec,
    apply_filter,
    backproject,
    fbp_scale,
    radon,
    set_threads,
)
from .volume import VolumeTarget, assemble_frames, optimize_volume

EX_OK, EX_RUNTIME, EX_MISMATCH, EX_USAGE = 0, 1, 2, 64
SCHEMA = "calitho.run/1"

FILTER_NAMES = {"ramp-exp": RAMP_EXP, RAMP_EXP: RAMP_EXP, "ramp": PURE_RAMP,
                PURE_RAMP: PURE_RAMP, NO_FILTER: NO_FILTER}


class UsageError(Exception):
    pass


class DimensionMismatch(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- run config

_OPT_KEYS = {"angles", "range", "start", "model", "init", "eta", "iters", "tolerance",
             "quantize_each_iter", "filter", "k0", "update_k0", "pad_factor", "seed", "calibration"}
_RUN_KEYS = {"schema", "command", "target", "out"} | _OPT_KEYS


def load_run_config(path) -> dict:
    """Read a RunConfig JSON document; unknown keys and other schema versions are rejected."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise UsageError("run config must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise UsageError(f"run config schema must be {SCHEMA!r}, got {doc.get('schema')!r}")
    unknown = set(doc) - _RUN_KEYS
    if unknown:
        raise UsageError(f"unknown run config keys: {sorted(unknown)}")
    return doc


def optimize_config(opts: dict) -> OptimizeConfig:
    cal = CalibrationCurve.linear()
    spec_cal = opts.get("calibration")
    if isinstance(spec_cal, dict):
        cal = CalibrationCurve(tuple(spec_cal["values"]), tuple(spec_cal["intensities"]))
    elif spec_cal:
        cal = CalibrationCurve.from_csv(spec_cal)
    if "angles" not in opts:
        raise UsageError("number of angles is required (--angles)")
    base = OptimizeConfig(AngleGrid(int(opts["angles"])))
    spec = base.filter
    if any(k in opts for k in ("filter", "k0", "pad_factor")):
        spec = FilterSpec(FILTER_NAMES[opts.get("filter", spec.kind)], opts.get("k0", spec.k0),
                          int(opts.get("pad_factor", spec.pad_factor)))
    return OptimizeConfig(
        grid=AngleGrid(int(opts["angles"]), float(opts.get("range", 180.0)),
                       float(opts.get("start", 0.0))),
        model=ThresholdModel.parse(opts.get("model", "hard:0.5")),
        init=opts.get("init", "ct"),
        step_size=float(opts.get("eta", base.step_size)),
        max_iters=int(opts.get("iters", base.max_iters)),
        quantize_each_iter=bool(opts.get("quantize_each_iter", True)),
        calibration=cal,
        error_tolerance=float(opts.get("tolerance", 0.0)),
        filter=spec,
        update_k0=None if opts.get("update_k0") is None else float(opts["update_k0"]),
        seed=int(opts.get("seed", 0)),
    )


def _write_config(out: Path, doc: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------- commands

def cmd_reconstruct(args) -> int:
    if args.target is None and args.sinogram is None:
        raise UsageError("reconstruct needs --target or --sinogram")
    out = Path(args.out)
    target = load_image(args.target) if args.target else None
    if args.sinogram:
        sino = read_cals(args.sinogram)
        if target is not None and target.shape[0] != sino.n_x:
            raise DimensionMismatch(
                f"target is {target.shape[0]} px, sinogram has {sino.n_x} detector samples")
    else:
        sino = radon(target, AngleGrid(args.angles, args.range, args.start))
    spec = FilterSpec(FILTER_NAMES[args.filter], args.k0, args.pad_factor)
    filtered = apply_filter(sino, spec)
    if args.heuristic != "none":
        filtered = HEURISTICS[args.heuristic](filtered)
    recon = backproject(filtered, sino.n_x) * fbp_scale(sino.grid)

    _write_config(out, {"schema": SCHEMA, "command": "reconstruct", "target": args.target,
                        "sinogram": args.sinogram, "angles": sino.count,
                        "range": sino.grid.range, "start": sino.grid.start,
                        "filter": spec.kind, "k0": spec.k0, "pad_factor": spec.pad_factor,
                        "heuristic": args.heuristic})
    write_cals(out / "sinogram.cals", sino)
    write_cals(out / "filtered.cals", filtered)
    write_sinogram_csv(out / "filtered.csv", filtered)
    np.savetxt(out / "reconstruction.csv", recon, delimiter=",", fmt="%.9g")
    save_image(out / "reconstruction.png", np.clip(recon, 0, None), scale="max")
    rows = [("min_filtered", _fmt(filtered.data.min())), ("max_filtered", _fmt(filtered.data.max()))]
    if target is not None:
        rmse = float(np.sqrt(np.mean((recon - target) ** 2)))
        rows.append(("rmse", _fmt(rmse)))
        if 0 < target.mean() < 1:
            rows.append(("dose_contrast", _fmt(dose_contrast(recon, target > 0.5))))
        print(f"round-trip rmse {_fmt(rmse)}")
    _write_csv(out / "metrics.csv", ["metric", "value"], rows)
    return EX_OK


def _run_optimize(target, cfg: OptimizeConfig, out: Path, doc: dict):
    res = optimize(target, cfg)
    _write_config(out, doc)
    write_cals(out / "projections.cals", res.projections)
    save_image(out / "dose.png", res.dose, scale="max")
    save_image(out / "developed.png", normalize_dose(res.dose) >= cfg.model.center)
    _write_csv(out / "error_history.csv", ["iter", "error"],
               [(i, _fmt(e)) for i, e in enumerate(res.error_history)])
    return res


def _opt_args_to_dict(args) -> dict:
    doc = {"angles": args.angles, "range": args.range, "start": args.start,
           "model": args.model, "init": args.init, "eta": args.eta, "iters": args.iters,
           "tolerance": args.tolerance, "seed": args.seed, "calibration": args.calibration,
           "filter": args.filter, "k0": args.k0, "update_k0": args.update_k0,
           "quantize_each_iter": False if args.defer_quantize else None}
    # unset flags leave config-file values (or defaults) in place
    return {k: v for k, v in doc.items() if v is not None}


def _resolved(cfg: OptimizeConfig) -> dict:
    """The fully resolved optimizer settings, as recorded beside artifacts."""
    return {"angles": cfg.grid.count, "range": cfg.grid.range, "start": cfg.grid.start,
            "model": str(cfg.model), "init": cfg.init, "eta": cfg.step_size,
            "iters": cfg.max_iters, "tolerance": cfg.error_tolerance,
            "quantize_each_iter": cfg.quantize_each_iter, "filter": cfg.filter.kind,
            "k0": cfg.filter.k0, "update_k0": cfg.update_k0,
            "pad_factor": cfg.filter.pad_factor, "seed": cfg.seed,
            "calibration": {"values": list(cfg.calibration.values),
                            "intensities": list(cfg.calibration.intensities)}}


def cmd_optimize(args) -> int:
    opts = load_run_config(args.config) if args.config else {}
    opts.update(_opt_args_to_dict(args))
    target_path = args.target or opts.get("target")
    out = Path(args.out or opts.get("out") or "out")
    if target_path is None:
        raise UsageError("optimize needs --target")
    cfg = optimize_config(opts)
    target = (load_image(target_path) > 0.5).astype(float)
    doc = {"schema": SCHEMA, "command": "optimize", "target": str(target_path),
           "out": str(out), **_resolved(cfg)}
    res = _run_optimize(target, cfg, out, doc)
    it = res.iterations_to(cfg.error_tolerance)
    print(f"final error {_fmt(res.error)} at iteration {res.best_iter}"
          + ("" if it is None else f"; tolerance reached at iteration {it}"))
    return EX_OK


def cmd_frames(args) -> int:
    vol = VolumeTarget.from_dir(args.volume)
    opts = _opt_args_to_dict(args)
    cfg = optimize_config(opts)
    results = optimize_volume(vol, cfg)
    frames = assemble_frames(results, cfg.grid, args.speed)
    out = Path(args.out)
    _write_config(out, {"schema": SCHEMA, "command": "frames", "volume": str(args.volume),
                        "speed": args.speed, **_resolved(cfg)})
    frames.write(out)
    _write_csv(out / "slice_errors.csv", ["slice", "error"],
               [(z, _fmt(r.error)) for z, r in enumerate(results)])
    m = frames.manifest
    print(f"{len(frames.frames)} frames at {m['frame_rate_hz']:.4f} Hz, "
          f"{360.0 / args.speed:.4g} s per revolution")
    return EX_OK


def cmd_resin_cal(args) -> int:
    p = resin.ResinParams()
    if args.params:
        p = resin.ResinParams.from_json(Path(args.params).read_text())
    intens = _floats(args.intensities)
    times = _floats(args.times)
    if any(v < 0 for v in intens + times):
        raise UsageError("intensities and times must be non-negative")
    cured = resin.dose_matrix(intens, times, p)
    doc = resin.doc_matrix(intens, times, p)
    out = Path(args.out)
    _write_config(out, {"schema": SCHEMA, "command": "resin-cal", "intensities": intens,
                        "times": times, "params": p.to_json()})
    save_image(out / "cured.pgm", cured.astype(float))
    _write_csv(out / "doc.csv", ["intensity_w_cm2", "time_s", "doc", "cured"],
               [(_fmt(i), _fmt(t), _fmt(doc[a, b]), int(cured[a, b]))
                for a, i in enumerate(intens) for b, t in enumerate(times)])
    print(f"{int(cured.sum())} of {cured.size} cells cured")
    return EX_OK


def cmd_lightfield(args) -> int:
    if args.solve == "R":
        if args.lam is None:
            raise UsageError("--solve R needs --lambda")
        R = lightfield.solve_outer_radius(args.r, args.N, args.lam)
        report = {"r": args.r, "N": args.N, "lambda": args.lam, "R": R,
                  "design": lightfield.design_from_radii(args.r, R, args.N).to_dict()}
    else:
        if args.R is None:
            raise UsageError("lightfield needs --R (or --solve R with --lambda)")
        report = lightfield.design_from_radii(args.r, args.R, args.N).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        _write_config(out, {"schema": SCHEMA, "command": "lightfield", "r": args.r,
                            "R": args.R, "N": args.N, "lambda": args.lam, "solve": args.solve,
                            "sweep": args.sweep})
        (out / "report.json").write_text(text + "\n")
        if args.sweep:
            R = report.get("R", args.R)
            rows = []
            for n in (int(v) for v in _floats(args.sweep)):
                d = lightfield.design_from_radii(args.r, R, n)
                rows.append((n, d.n_angular, _fmt(d.angular_spacing_deg), d.subpixels_per_lens,
                             _fmt(d.lens_pitch), _fmt(d.subpixel_size)))
            _write_csv(out / "sweep.csv", ["N", "n_angular", "angular_spacing_deg",
                                           "subpixels_per_lens", "lens_pitch_m",
                                           "subpixel_size_m"], rows)
    return EX_OK


def cmd_repro(args) -> int:
    from . import presets

    out = Path(args.out)
    _write_config(out / args.figure, {"schema": SCHEMA, "command": "repro", "figure": args.figure,
                                      "quick": args.quick, "cases": presets.PRESETS[args.figure]})
    results = presets.run(args.figure, out, quick=args.quick)
    for name, err in results:
        print(f"{name}: final error {_fmt(err)}")
    return EX_OK


# ---------------------------------------------------------------- parser

def _add_opt_flags(p, with_target=True):
    if with_target:
        p.add_argument("--target", help="target image (PNG/PGM), binarized at 0.5")
    p.add_argument("--angles", type=int, default=None if with_target else 500)
    p.add_argument("--range", type=float, default=None if with_target else 360.0)
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--model", default=None, help="hard:T | double:XL,XU | sigmoid:MU,SIGMA")
    p.add_argument("--init", choices=("ct", "random"), default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--defer-quantize", action="store_true", default=None,
                   help="keep iterates real-valued and quantize only the result")
    p.add_argument("--filter", choices=sorted(FILTER_NAMES), default=None)
    p.add_argument("--k0", type=float, default=None, help="init filter window (cycles/pixel)")
    p.add_argument("--update-k0", type=float, default=None,
                   help="residual filter window (default: a quarter of the init window rule)")
    p.add_argument("--calibration", default=None, help="CSV dlp_value,intensity_w_cm2")
    p.add_argument("--out", default=None if with_target else "frames")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="calitho", description="Computed axial lithography projection tools")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $CAL_THREADS, else all cores)")
    p.add_argument("--seed", type=int, default=None, help="seed for random init (default 0)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reconstruct", help="sinogram, filtering and FBP of a target")
    r.add_argument("--target")
    r.add_argument("--sinogram", help="CALS sinogram file")
    r.add_argument("--angles", type=int, default=202)
    r.add_argument("--range", type=float, default=180.0)
    r.add_argument("--start", type=float, default=0.0)
    r.add_argument("--filter", choices=sorted(FILTER_NAMES), default="ramp-exp")
    r.add_argument("--k0", type=float, default=None)
    r.add_argument("--pad-factor", type=int, default=4)
    r.add_argument("--heuristic", choices=("none",) + tuple(sorted(HEURISTICS)), default="none")
    r.add_argument("--out", default="reconstruct")
    r.set_defaults(func=cmd_reconstruct)

    o = sub.add_parser("optimize", help="projected gradient descent on a 2D target")
    _add_opt_flags(o)
    o.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    o.set_defaults(func=cmd_optimize)

    f = sub.add_parser("frames", help="optimize every z-slice and export projector frames")
    f.add_argument("--volume", required=True, help="directory of slice images")
    f.add_argument("--speed", type=float, default=25.0, help="rotation speed, deg/s")
    _add_opt_flags(f, with_target=False)
    f.set_defaults(func=cmd_frames)

    c = sub.add_parser("resin-cal", help="simulated intensity/time dose matrix")
    c.add_argument("--intensities", required=True, help="W/cm^2, comma-separated")
    c.add_argument("--times", required=True, help="s, comma-separated")
    c.add_argument("--params", help="ResinParams JSON")
    c.add_argument("--out", default="resin-cal")
    c.set_defaults(func=cmd_resin_cal)

    lf = sub.add_parser("lightfield", help="microlens projector sizing")
    lf.add_argument("--r", type=float, required=True, help="target radius, m")
    lf.add_argument("--R", type=float, help="outer radius, m")
    lf.add_argument("--N", type=int, required=True, help="spatial samples")
    lf.add_argument("--lambda", dest="lam", type=float, help="subpixel size, m")
    lf.add_argument("--solve", choices=("R",))
    lf.add_argument("--sweep", help="comma-separated N values for a CSV sweep")
    lf.add_argument("--out")
    lf.set_defaults(func=cmd_lightfield)

    rp = sub.add_parser("repro", help="rerun a benchmark preset")
    rp.add_argument("figure", choices=("fig5", "fig6", "fig7", "annulus"))
    rp.add_argument("--out", default="repro")
    rp.add_argument("--quick", action="store_true", help="fewer iterations, for smoke tests")
    rp.set_defaults(func=cmd_repro)
    return p


def _threads(arg) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("CAL_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"CAL_THREADS must be an integer, got {env!r}") from None
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        n = _threads(args.threads)
        if n is not None and n < 1:
            raise UsageError("--threads must be >= 1")
        set_threads(n)
        return args.func(args)
    except UsageError as exc:
        print(f"calitho: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except DimensionMismatch as exc:
        print(f"calitho: dimension mismatch: {exc}", file=sys.stderr)
        return EX_MISMATCH
    except (FormatError, ValueError, OSError) as exc:
        print(f"calitho: error: {exc}", file=sys.stderr)
        return EX_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
