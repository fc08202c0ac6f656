"""Projection optimization for computed axial lithography (tomographic volumetric printing)."""
from .core import AngleGrid, CalibrationCurve, Sinogram, quantize
from .optimize import OptimizeConfig, OptimizeResult, ThresholdModel, optimize
from .transform import FilterSpec, apply_filter, backproject, fbp_reconstruct, radon

__all__ = [
    "AngleGrid", "CalibrationCurve", "Sinogram", "quantize",
    "OptimizeConfig", "OptimizeResult", "ThresholdModel", "optimize",
    "FilterSpec", "apply_filter", "backproject", "fbp_reconstruct", "radon",
]
