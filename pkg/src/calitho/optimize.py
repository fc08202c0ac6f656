"""Projected gradient descent on 8-bit projection sets.

One iteration: backproject the calibrated projections into a dose map, develop
it with a threshold model, take the residual against the target, carry the
residual back to the projection domain (Radon transform + ramp filter) and
subtract it, then project onto {0, ..., 255}.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    DOMAIN_QUANTIZED,
    AngleGrid,
    CalibrationCurve,
    Sinogram,
    check_square,
    quantize,
)
from .positivity import clamp_negatives
from .transform import RAMP_EXP, FilterSpec, apply_filter, backproject, default_k0, fbp_scale, radon

log = logging.getLogger(__name__)

# Update tuning. The residual is filtered with a window narrower than the one used
# for reconstruction, and the nominal step (step_size=1) is damped by UPDATE_GAIN.
# Wider windows or larger gains oscillate on thin features; see scripts/sweep_update.py.
UPDATE_WINDOW = 0.25
UPDATE_GAIN = 0.4

HARD = "hard"
DOUBLE = "double"
SIGMOID = "sigmoid"


@dataclass(frozen=True)
class ThresholdModel:
    """Development model on max-normalized dose.

    ``hard``: step at ``a``; ``double``: 0 below ``a``, 1 above ``b``, linear
    between; ``sigmoid``: 1 / (1 + exp(-(x - a) / b)).
    """

    kind: str = HARD
    a: float = 0.5
    b: float = 0.0

    def __post_init__(self):
        if self.kind == HARD:
            if not 0 < self.a < 1:
                raise ValueError(f"hard threshold must lie in (0, 1), got {self.a}")
        elif self.kind == DOUBLE:
            if not 0 < self.a <= self.b:
                raise ValueError(f"double threshold needs 0 < x_l <= x_u, got {self.a}, {self.b}")
        elif self.kind == SIGMOID:
            if not 0 < self.a < 1 or self.b <= 0:
                raise ValueError(f"sigmoid needs mu in (0, 1) and sigma > 0, got {self.a}, {self.b}")
        else:
            raise ValueError(f"unknown threshold model {self.kind!r}")

    @classmethod
    def hard(cls, t: float = 0.5) -> "ThresholdModel":
        return cls(HARD, t)

    @classmethod
    def double(cls, x_l: float = 0.45, x_u: float = 0.55) -> "ThresholdModel":
        return cls(DOUBLE, x_l, x_u)

    @classmethod
    def sigmoid(cls, mu: float = 0.5, sigma: float = 0.02) -> "ThresholdModel":
        return cls(SIGMOID, mu, sigma)

    @classmethod
    def parse(cls, text: str) -> "ThresholdModel":
        """Parse ``hard:0.5``, ``double:0.45,0.55`` or ``sigmoid:0.5,0.02``."""
        kind, _, params = text.partition(":")
        values = [float(v) for v in params.split(",")] if params else []
        if kind == HARD and len(values) <= 1:
            return cls.hard(*values)
        if kind in (DOUBLE, SIGMOID) and len(values) in (0, 2):
            return getattr(cls, kind)(*values)
        raise ValueError(f"cannot parse threshold model {text!r}")

    def __str__(self) -> str:
        if self.kind == HARD:
            return f"hard:{self.a:g}"
        return f"{self.kind}:{self.a:g},{self.b:g}"

    @property
    def center(self) -> float:
        """Threshold used for hard development when scoring."""
        if self.kind == DOUBLE:
            return 0.5 * (self.a + self.b)
        return self.a


def apply_threshold(dose, model: ThresholdModel) -> np.ndarray:
    """Develop normalized dose into a cure fraction in [0, 1]."""
    x = np.asarray(dose, dtype=float)
    if model.kind == HARD:
        return (x >= model.a).astype(float)
    if model.kind == DOUBLE:
        if model.b == model.a:
            return (x >= model.a).astype(float)
        return np.clip((x - model.a) / (model.b - model.a), 0.0, 1.0)
    z = np.clip(-(x - model.a) / model.b, -700.0, 700.0)
    return 1.0 / (1.0 + np.exp(z))


def normalize_dose(dose) -> np.ndarray:
    dose = np.asarray(dose, dtype=float)
    m = dose.max(initial=0.0)
    return dose / m if m > 0 else np.zeros_like(dose)


def forward_dose(proj: Sinogram, cal: CalibrationCurve, size: int) -> np.ndarray:
    """Accumulated dose: calibrated intensities backprojected with the angular weight."""
    intensity = proj.with_data(cal(proj.data), "real")
    return np.maximum(backproject(intensity, size), 0.0) * fbp_scale(proj.grid)


def develop_error(dose, target, threshold: float = 0.5) -> float:
    """Fraction of pixels whose hard development disagrees with the target."""
    cured = normalize_dose(dose) >= threshold
    return float(np.mean(cured != (np.asarray(target) > 0.5)))


@dataclass(frozen=True)
class OptimizeConfig:
    grid: AngleGrid
    model: ThresholdModel = field(default_factory=ThresholdModel.hard)
    init: str = "ct"
    step_size: float = 1.0
    max_iters: int = 50
    quantize_each_iter: bool = True
    calibration: CalibrationCurve = field(default_factory=CalibrationCurve.linear)
    error_tolerance: float = 0.0
    filter: FilterSpec = field(default_factory=FilterSpec)
    update_k0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step size must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.init not in ("ct", "random"):
            raise ValueError(f"unknown init mode {self.init!r}")
        if self.update_k0 is not None and not 0 < self.update_k0 <= 0.5:
            raise ValueError(f"update_k0 must lie in (0, 0.5], got {self.update_k0}")

    def update_filter(self, n: int) -> FilterSpec:
        """Filter applied to the projected residual (the init uses ``filter``)."""
        if self.filter.kind != RAMP_EXP:
            return self.filter
        k0 = self.update_k0
        if k0 is None:
            k0 = UPDATE_WINDOW * default_k0(n, self.grid)
        return FilterSpec(self.filter.kind, k0, self.filter.pad_factor)

    def replace(self, **changes) -> "OptimizeConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class OptimizeResult:
    projections: Sinogram
    dose: np.ndarray
    error_history: tuple
    best_iter: int

    @property
    def error(self) -> float:
        return self.error_history[self.best_iter]

    def iterations_to(self, tolerance: float = 0.0) -> int | None:
        """Index of the first iterate whose error is <= tolerance."""
        for i, e in enumerate(self.error_history):
            if e <= tolerance:
                return i
        return None


def init_projections(target, grid: AngleGrid, mode: str = "ct", seed: int = 0,
                     spec: FilterSpec = FilterSpec()) -> Sinogram:
    target = check_square(target)
    n = target.shape[0]
    if mode == "random":
        rng = np.random.default_rng(seed)
        data = rng.integers(0, 256, size=(grid.count, n)).astype(float)
        return Sinogram(data, grid, DOMAIN_QUANTIZED)
    if mode != "ct":
        raise ValueError(f"unknown init mode {mode!r}")
    filtered = clamp_negatives(apply_filter(radon(target, grid), spec)).data
    m = filtered.max(initial=0.0)
    data = quantize(filtered * (255.0 / m)) if m > 0 else np.zeros_like(filtered)
    return Sinogram(data, grid, DOMAIN_QUANTIZED)


def _update(proj: Sinogram, dose, target, cfg: OptimizeConfig) -> Sinogram:
    """Residual -> projection-domain correction -> projected update."""
    developed = apply_threshold(normalize_dose(dose), cfg.model)
    residual = developed - target
    if not residual.any():
        return proj
    # The correction is scaled so that backprojecting it (through the calibration)
    # moves the normalized dose by about -step_size * residual.
    d_max = float(np.max(dose))
    slope = cfg.calibration.i_max / 255.0
    reach = d_max / slope if d_max > 0 else np.pi * 255.0
    spec = cfg.update_filter(proj.n_x)
    correction = apply_filter(radon(residual, proj.grid), spec).data * (UPDATE_GAIN * reach)
    raw = proj.data - cfg.step_size * correction
    if cfg.quantize_each_iter:
        return proj.with_data(quantize(raw), DOMAIN_QUANTIZED)
    return proj.with_data(np.clip(raw, 0.0, 255.0), "real")


def pgd_step(proj: Sinogram, target, cfg: OptimizeConfig) -> Sinogram:
    target = check_square(target)
    dose = forward_dose(proj, cfg.calibration, target.shape[0])
    return _update(proj, dose, target, cfg)


def optimize(target, cfg: OptimizeConfig, init: Sinogram | None = None) -> OptimizeResult:
    """Iterate until the developed error reaches the tolerance or ``max_iters``.

    Returns the lowest-error iterate, quantized to 8 bits.
    """
    target = check_square(target)
    n = target.shape[0]
    proj = init if init is not None else init_projections(
        target, cfg.grid, cfg.init, cfg.seed, cfg.filter)
    history = []
    best = None
    for it in range(cfg.max_iters):
        dose = forward_dose(proj, cfg.calibration, n)
        err = develop_error(dose, target, cfg.model.center)
        history.append(err)
        if best is None or err < best[0]:
            best = (err, it, proj, dose)
        log.debug("iter %d error %.6f", it, err)
        if err <= cfg.error_tolerance or it == cfg.max_iters - 1:
            break
        proj = _update(proj, dose, target, cfg)

    err, best_it, proj, dose = best
    if proj.domain != DOMAIN_QUANTIZED:
        proj = proj.with_data(quantize(proj.data), DOMAIN_QUANTIZED)
        dose = forward_dose(proj, cfg.calibration, n)
        history[best_it] = develop_error(dose, target, cfg.model.center)
    return OptimizeResult(proj, dose, tuple(history), best_it)


def exposure_sweep(proj: Sinogram, scales, model: ThresholdModel,
                   cal: CalibrationCurve = CalibrationCurve.linear(),
                   reference: float | None = None) -> list:
    """Cured masks for dose multiplied by each scale.

    The threshold sits at ``model.center`` times ``reference`` (default: the
    unscaled dose maximum), so scale 1 is the optimized operating point.
    """
    n = proj.n_x
    dose = forward_dose(proj, cal, n)
    ref = float(dose.max()) if reference is None else float(reference)
    level = model.center * ref
    out = []
    for s in scales:
        if s <= 0:
            raise ValueError("exposure scales must be positive")
        out.append((s * dose >= level).astype(float) if level > 0 else np.zeros_like(dose))
    return out
