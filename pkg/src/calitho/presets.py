"""Named benchmark sweeps over OptimizeConfig: angle counts, threshold models and a thin ring.

Each preset is data (a target builder plus a list of labelled config overrides);
``run`` executes it and writes one error-history CSV per case plus a summary.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import phantoms
from .core import AngleGrid, save_image
from .io import write_cals
from .optimize import OptimizeConfig, ThresholdModel, init_projections, normalize_dose, optimize
from .positivity import dose_contrast

N = 128
RECT = {"half_width": 32, "half_height": 20}
ANNULUS = {"r_in": 40, "r_out": 48}
SOFT_SIGMA = 0.1
SHARP_SIGMA = 0.01


def rectangle_target(n: int = N) -> np.ndarray:
    return phantoms.rectangle(n, **RECT)


def annulus_target(n: int = N) -> np.ndarray:
    return phantoms.annulus(n, **ANNULUS)


def _case(label, angles=202, model="hard:0.5", init="ct", seed=0, target="rectangle", iters=50):
    return {"label": label, "angles": angles, "model": model, "init": init, "seed": seed,
            "target": target, "iters": iters}


TARGETS = {"rectangle": rectangle_target, "annulus": annulus_target}


PRESETS = {
    "fig5": [_case(f"angles{n}", angles=n) for n in (16, 64, 202)],
    "fig6": [_case(f"double_{lo:g}_{hi:g}_{init}", model=f"double:{lo},{hi}", init=init)
             for lo, hi in ((0.5, 0.5), (0.45, 0.55), (0.4, 0.6)) for init in ("ct", "random")],
    "fig7": [_case("sigmoid_soft", model=f"sigmoid:0.5,{SOFT_SIGMA}"),
             _case("sigmoid_sharp", model=f"sigmoid:0.5,{SHARP_SIGMA}")],
    # thin ring needs more iterations than the rectangle
    "annulus": [_case("annulus", target="annulus", iters=200)],
}


def config_for(case: dict, max_iters: int = 50) -> OptimizeConfig:
    return OptimizeConfig(AngleGrid(case["angles"], 180.0),
                          model=ThresholdModel.parse(case["model"]),
                          init=case["init"], seed=case["seed"], max_iters=max_iters)


def run(name: str, out_dir, quick: bool = False) -> list[tuple[str, float]]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    out = Path(out_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for case in PRESETS[name]:
        target = TARGETS[case["target"]]()
        iters = min(5, case["iters"]) if quick else case["iters"]
        cfg = config_for(case, iters)
        init = init_projections(target, cfg.grid, cfg.init, cfg.seed, cfg.filter)
        res = optimize(target, cfg, init)
        stem = out / case["label"]
        with open(f"{stem}_history.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "error"])
            w.writerows((i, f"{e:.9g}") for i, e in enumerate(res.error_history))
        write_cals(f"{stem}.cals", res.projections)
        save_image(f"{stem}_dose.png", res.dose, scale="max")
        # 1D cut through the dose center, as in the sigmoid comparison
        cut = normalize_dose(res.dose)[N // 2]
        np.savetxt(f"{stem}_cut.csv", cut, fmt="%.9g")
        summary.append({"label": case["label"], "final_error": res.error,
                        "best_iter": res.best_iter,
                        "iterations_to_zero": res.iterations_to(0.0),
                        "dose_contrast": dose_contrast(res.dose, target)})
    (out / "summary.json").write_text(json.dumps(
        {"preset": name, "quick": quick, "cases": PRESETS[name],
         "targets": {"rectangle": RECT, "annulus": ANNULUS},
         "results": summary}, indent=2, sort_keys=True) + "\n")
    return [(s["label"], s["final_error"]) for s in summary]
