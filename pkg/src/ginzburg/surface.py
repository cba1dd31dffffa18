"""Evanescent fields outside the medium and their reach to a passing detector.

Outside the dielectric a mode with wave number k_z along the surface and
frequency near the resonance Omega decays as exp(-z / ell) with
ell = 1 / sqrt(k_z^2 - Omega^2).  A detector at distance d sees a rate
suppressed by exp(-2 d / ell), since the rate is quadratic in the field.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .medium import MediumParams
from .units import inverse_energy_to_length


class InfeasibleError(ValueError):
    """No sub-luminal detector velocity can satisfy the excitation condition."""


class NotEvanescentError(ValueError):
    """k_z <= Omega: the field propagates instead of decaying."""


class GeometryKind(str, enum.Enum):
    PLATE = "plate_distance"
    HOLE = "hole_radius"


@dataclass(frozen=True)
class SurfaceGeometry:
    """Either a detector at fixed distance from a plate (nm) or a beam through a hole (mm)."""

    kind: GeometryKind
    value: float

    def __post_init__(self):
        object.__setattr__(self, "kind", GeometryKind(self.kind))
        if self.kind is GeometryKind.PLATE and not self.value >= 0:
            raise ValueError(f"plate distance must be >= 0 nm, got {self.value}")
        if self.kind is GeometryKind.HOLE and not self.value > 0:
            raise ValueError(f"hole radius must be > 0 mm, got {self.value}")

    @classmethod
    def plate(cls, distance_nm: float) -> "SurfaceGeometry":
        return cls(GeometryKind.PLATE, distance_nm)

    @classmethod
    def hole(cls, radius_mm: float) -> "SurfaceGeometry":
        return cls(GeometryKind.HOLE, radius_mm)

    def suppression(self, ell_nm: float) -> float:
        if self.kind is GeometryKind.PLATE:
            return suppression_at_distance(self.value, ell_nm)
        return beam_average_suppression(self.value, ell_nm)


def _gamma(v: float) -> float:
    return 1.0 / math.sqrt(1.0 - v * v)


def excitation_condition(omega: float, m: MediumParams, v: float, k_z: float) -> bool:
    """True iff k_z v >= omega/gamma + Omega (Doppler shift lifts a resonant mode over the gap)."""
    if not abs(v) < 1:
        raise ValueError(f"|v| must be < 1, got {v}")
    return k_z * v >= omega / _gamma(v) + m.omega_res


def min_velocity(omega: float, m: MediumParams, k_max: float, relativistic: bool = True) -> float:
    """Smallest v with v k_max = omega/gamma(v) + Omega.

    With ``relativistic=False`` gamma is set to 1 and v = (omega + Omega)/k_max.

    Raises
    ------
    InfeasibleError
        If no v < 1 solves the condition.
    """
    Om = m.omega_res
    if not relativistic:
        v = (omega + Om) / k_max
        if not v < 1:
            raise InfeasibleError(f"(omega + Omega)/k_max = {v} >= 1")
        return v
    if not k_max > Om:
        raise InfeasibleError(f"k_max = {k_max} must exceed Omega = {Om}")

    def f(v):
        return v * k_max - omega * math.sqrt(1.0 - v * v) - Om

    return brentq(f, 0.0, 1.0, xtol=1e-15, rtol=1e-15)


def efolding_length(k_z: float, m: MediumParams) -> float:
    """ell = hbar c / sqrt(k_z^2 - Omega^2) in nm."""
    Om = m.omega_res
    if not k_z > Om:
        raise NotEvanescentError(f"k_z = {k_z} <= Omega = {Om}: no evanescent decay")
    return inverse_energy_to_length(math.sqrt((k_z - Om) * (k_z + Om)))


def suppression_at_distance(d_nm: float, ell_nm: float) -> float:
    """exp(-2 d / ell)."""
    if d_nm < 0 or not ell_nm > 0:
        raise ValueError("need d >= 0 and ell > 0")
    return math.exp(-2.0 * d_nm / ell_nm)


def beam_average_suppression(radius_mm: float, ell_nm: float) -> float:
    """Disk average of exp(-2 (R - r) / ell) over a beam filling a hole of radius R.

    With x = 2R / ell the average is
    (2/x)(1 - e^-x) - (2/x^2)(1 - e^-x (1 + x)), which tends to ell/R for
    ell << R and to 1 for ell >> R.
    """
    if not (radius_mm > 0 and ell_nm > 0):
        raise ValueError("need R > 0 and ell > 0")
    x = 2.0 * radius_mm * 1e6 / ell_nm
    if x < 0.1:
        # sum_n 2 (-x)^n / (n + 2)!
        term, total = 1.0, 0.0
        for n in range(14):
            total += 2.0 * term / math.factorial(n + 2)
            term *= -x
        return total
    em = -math.expm1(-x)
    return 2.0 / x * em - 2.0 / (x * x) * (em - x * math.exp(-x))
