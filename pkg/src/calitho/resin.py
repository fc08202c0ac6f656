"""Free-radical photopolymerization: cure kinetics, inhibition and development.

The rate constants are lumped: ``kp_over_sqrt_kt`` multiplies sqrt(phi * I) in
the exponent of the constant-intensity degree-of-cure solution. Inhibition is a
sharp induction period: the accumulated radical generation sqrt(phi * I) * t
must exceed ``inhibitor_budget`` before any crosslinking happens.

The defaults are desk-scale placeholders, not measured values.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

# JSON keys carry their units.
_JSON_KEYS = {
    "kp_over_sqrt_kt": "kp_over_sqrt_kt_per_s_sqrt_cm2_per_W",
    "phi": "quantum_yield",
    "M0": "M0_mol_per_L",
    "gel_point": "gel_point_doc",
    "inhibitor_budget": "inhibitor_budget_sqrt_W_per_cm2_s",
}


@dataclass(frozen=True)
class ResinParams:
    kp_over_sqrt_kt: float = 0.5
    phi: float = 0.6
    M0: float = 4.0
    gel_point: float = 0.3
    inhibitor_budget: float = 0.0

    def __post_init__(self):
        if self.kp_over_sqrt_kt <= 0 or self.phi <= 0 or self.M0 <= 0:
            raise ValueError("rate constant, quantum yield and M0 must be positive")
        if not 0 < self.gel_point < 1:
            raise ValueError("gel point must lie in (0, 1)")
        if self.inhibitor_budget < 0:
            raise ValueError("inhibitor budget must be non-negative")

    def to_json(self) -> dict:
        return {_JSON_KEYS[k]: v for k, v in asdict(self).items()}

    @classmethod
    def from_json(cls, doc) -> "ResinParams":
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        reverse = {v: k for k, v in _JSON_KEYS.items()}
        unknown = set(doc) - set(reverse)
        if unknown:
            raise ValueError(f"unknown resin parameter keys: {sorted(unknown)}")
        return cls(**{reverse[k]: float(v) for k, v in doc.items()})


def propagation_rate(intensity, monomer, p: ResinParams):
    """R_p = (k_p / sqrt(k_t)) [M] sqrt(phi I), mol/(L s)."""
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0) or np.any(np.asarray(monomer) < 0):
        raise ValueError("intensity and concentration must be non-negative")
    return p.kp_over_sqrt_kt * np.asarray(monomer, dtype=float) * np.sqrt(p.phi * intensity)


def induction_time(intensity, p: ResinParams):
    """Time to use up the inhibitor at constant intensity (inf when dark)."""
    rate = np.sqrt(p.phi * np.asarray(intensity, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(rate > 0, p.inhibitor_budget / np.where(rate > 0, rate, 1.0), np.inf)
    return np.where(p.inhibitor_budget == 0, 0.0, t)


def doc_constant_intensity(intensity, t, p: ResinParams):
    """Degree of cure after exposure time ``t`` at constant intensity."""
    intensity = np.asarray(intensity, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(intensity < 0) or np.any(t < 0):
        raise ValueError("intensity and time must be non-negative")
    rate = np.sqrt(p.phi * intensity)
    t_eff = np.maximum(0.0, t - induction_time(intensity, p))
    t_eff = np.where(rate > 0, t_eff, 0.0)
    return -np.expm1(-p.kp_over_sqrt_kt * rate * t_eff)


def doc_matrix(intensities, times, p: ResinParams) -> np.ndarray:
    """DOC for every (intensity, time) pair; rows follow ``intensities``, columns ``times``."""
    intensities = np.asarray(intensities, dtype=float).ravel()
    times = np.asarray(times, dtype=float).ravel()
    if intensities.size == 0 or times.size == 0:
        raise ValueError("need at least one intensity and one time")
    return doc_constant_intensity(intensities[:, None], times[None, :], p)


def dose_matrix(intensities, times, p: ResinParams) -> np.ndarray:
    """Boolean grid of the square-array exposure experiment: True where DOC >= gel point."""
    return doc_matrix(intensities, times, p) >= p.gel_point


def integrate_doc(intensity: float, t: float, p: ResinParams, rtol: float = 1e-10) -> float:
    """DOC from integrating d[M]/dt = -R_p numerically (a check on the closed form)."""
    from scipy.integrate import solve_ivp

    t_ind = float(induction_time(intensity, p))
    if intensity <= 0 or t <= t_ind:
        return 0.0

    def rhs(_, m):
        return -propagation_rate(intensity, np.maximum(m, 0.0), p)

    sol = solve_ivp(rhs, (t_ind, t), [p.M0], method="DOP853", rtol=rtol, atol=1e-14 * p.M0)
    return float(1.0 - sol.y[0, -1] / p.M0)


def develop(doc_map, gel_point: float):
    """Solvent rinse: material at or above the gel point stays."""
    return (np.asarray(doc_map, dtype=float) >= gel_point).astype(float)
