"""Detector rates in the 3D medium, with optional wave-number cutoff.

The detector moves along +z with velocity v.  After the energy delta fixes
|k| = k*(kappa, eta) = (omega/gamma + kappa) / (eta |v|), with eta the cosine
between k and the motion, the rate is a double integral over (kappa, eta).
For small v and weak dissipation it collapses to

    (g^2 omega^2 / 4 pi) Omega / (Omega + omega)^2 |v|
        * [3/8 (|d_x|^2 + |d_y|^2) + 1/4 |d_z|^2],

where 3/8 and 1/4 are the eta-integrals of the transverse and longitudinal
angular weights.  A cutoff k < k_max restricts eta to [eta_min, 1].

Rates are in eV (natural units) unless converted with :func:`rate_to_si`.
Dipoles are given in e*a0 and converted with Heaviside-Lorentz charge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .detector1d import RateResult, _branch_crossings
from .medium import MediumParams
from .quadrature import QuadratureConfig, integrate_interval, integrate_panels, integrate_semi_infinite, peak_breakpoints
from .units import (
    dipole_ea0_to_natural,
    dipole_ea0_to_si,
    energy_to_angular_frequency,
    si_rate_factor,
    velocity_to_cm_per_s,
    velocity_to_si,
)

TRANSVERSE_WEIGHT = 3.0 / 8.0
LONGITUDINAL_WEIGHT = 1.0 / 4.0
DEFAULT_CONFIG = QuadratureConfig(rel_tol=1e-9)


class OutOfValidityError(ValueError):
    """Formula evaluated outside the parameter range it was derived for."""


@dataclass(frozen=True)
class DetectorSpec3D:
    """Detector moving along z.

    Parameters
    ----------
    gap : float
        Energy gap omega in eV.
    dipoles : tuple of float
        Transition dipole magnitudes (|d_x|, |d_y|, |d_z|) in e*a0, z along
        the motion.
    velocity : float
        Fraction of c, |v| < 1.
    """

    gap: float
    dipoles: tuple = (1.0, 1.0, 1.0)
    velocity: float = 0.0

    def __post_init__(self):
        if not (self.gap > 0 and math.isfinite(self.gap)):
            raise ValueError(f"gap must be > 0, got {self.gap}")
        if not abs(self.velocity) < 1:
            raise ValueError(f"|velocity| must be < 1, got {self.velocity}")
        dip = tuple(float(x) for x in self.dipoles)
        if len(dip) != 3 or any(not (x >= 0 and math.isfinite(x)) for x in dip):
            raise ValueError(f"dipoles must be three finite magnitudes >= 0, got {self.dipoles}")
        object.__setattr__(self, "dipoles", dip)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.velocity**2)

    def with_velocity(self, v: float) -> "DetectorSpec3D":
        return replace(self, velocity=v)

    def natural_dipoles_sq(self) -> tuple[float, float]:
        """(|d_x|^2 + |d_y|^2, |d_z|^2) in 1/eV^2."""
        dx, dy, dz = (float(dipole_ea0_to_natural(x)) for x in self.dipoles)
        return dx * dx + dy * dy, dz * dz


@dataclass(frozen=True)
class CutoffSpec:
    """Optional upper bound on the medium wave number, in eV."""

    k_max: float | None = None

    def __post_init__(self):
        if self.k_max is not None and not self.k_max > 0:
            raise ValueError(f"k_max must be > 0, got {self.k_max}")


def eta_min(omega: float, m: MediumParams, v: float, k_max: float) -> float:
    """(omega + Omega) / (|v| k_max); values >= 1 leave no resonant phase space."""
    if v == 0:
        raise ValueError("eta_min undefined for v = 0")
    if not k_max > 0:
        raise ValueError("k_max must be > 0")
    return (omega + m.omega_res) / (abs(v) * k_max)


def cutoff_prefactor(eta_lo: float) -> float:
    """int_{eta_lo}^1 eta (1 + eta^2) / 2 d eta = 3/8 - eta_lo^2/4 - eta_lo^4/8, floored at 0."""
    if eta_lo <= 0:
        return TRANSVERSE_WEIGHT
    if eta_lo >= 1:
        return 0.0
    return TRANSVERSE_WEIGHT - eta_lo**2 / 4.0 - eta_lo**4 / 8.0


def _closed(d: DetectorSpec3D, m: MediumParams, w_t: float, w_l: float) -> float:
    s_t, s_l = d.natural_dipoles_sq()
    Om, om = m.omega_res, d.gap
    return (m.coupling_g * om) ** 2 / (4 * math.pi) * Om / (Om + om) ** 2 * abs(d.velocity) * (w_t * s_t + w_l * s_l)


def excitation_rate_3d_closed(d: DetectorSpec3D, m: MediumParams) -> RateResult:
    """Small-v, weak-G rate without cutoff; linear in |v|."""
    return RateResult(_closed(d, m, TRANSVERSE_WEIGHT, LONGITUDINAL_WEIGHT), "closed")


def excitation_rate_3d_cutoff(d: DetectorSpec3D, m: MediumParams, cut: CutoffSpec) -> RateResult:
    """Closed form with the transverse weight 3/8 replaced by the cutoff prefactor.

    The longitudinal channel carries a (1 - eta^2) weight that vanishes near
    eta = 1 where the cutoff leaves phase space, so it is dropped.
    """
    if cut.k_max is None:
        raise ValueError("cutoff rate needs k_max")
    if d.velocity == 0:
        return RateResult(0.0, "cutoff")
    pre = cutoff_prefactor(eta_min(d.gap, m, d.velocity, cut.k_max))
    return RateResult(_closed(d, m, pre, 0.0), "cutoff")


def excitation_rate_3d_exact(d: DetectorSpec3D, m: MediumParams, cut: CutoffSpec | None = None,
                             cfg: QuadratureConfig | None = None) -> RateResult:
    """Double integral over (kappa, eta) with gamma kept exact.

    rate = g^2 G^2 omega^2 / (8 pi^2 gamma^2) * 2 int_0^inf dkappa int_0^1 d eta
           kappa^3 k*^2 / (eta |v| |zeta(k*, kappa)|^2)
           * [(1 + eta^2)/2 (|d_x|^2 + |d_y|^2) + (1 - eta^2) |d_z|^2]

    With a cutoff, points with k* >= k_max contribute nothing.  The phase
    space is empty, and the rate exactly 0, when |v| k_max <= omega/gamma.
    """
    cfg = cfg or DEFAULT_CONFIG
    cut = cut or CutoffSpec()
    v = abs(d.velocity)
    s_t, s_l = d.natural_dipoles_sq()
    if v == 0 or m.coupling_g == 0 or (s_t == 0 and s_l == 0):
        return RateResult(0.0, "exact")
    if m.coupling_G_sq == 0:
        raise ValueError("exact rate needs G > 0; use excitation_rate_3d_closed for the lossless limit")
    Om, g, G2 = m.omega_res, m.coupling_g, m.coupling_G_sq
    w_gamma = d.gap / d.gamma
    k_max = math.inf if cut.k_max is None else cut.k_max
    if v * k_max <= w_gamma:
        return RateResult(0.0, "exact")
    inner_cfg = replace(cfg, rel_tol=cfg.rel_tol * 1e-2, peak_hints=())
    res_hint = (Om, max(m.damping_rate, 1e-12 * Om))

    def inner(eta):
        ve = eta * v
        kap_hi = ve * k_max - w_gamma  # k* < k_max  <=>  kappa < kap_hi
        if kap_hi <= 0:
            return 0.0, 0.0
        hints = [res_hint, *_branch_crossings(w_gamma, ve, m, 4.0 * (m.upper_edge + d.gap) / ve, n_scan=800)]

        def f(kap):
            return kernels.rate3d(np.ascontiguousarray(kap, dtype=float), eta, w_gamma, v, Om, g, G2, k_max)

        c = replace(inner_cfg, peak_hints=tuple(hints))
        if math.isfinite(kap_hi):
            r = integrate_interval(f, 0.0, kap_hi, c)
        else:
            r = integrate_semi_infinite(f, c, scale=Om)
        return r.value, r.error

    def angular(eta):
        return 0.5 * (1 + eta * eta) * s_t + (1 - eta * eta) * s_l

    errs = []

    def outer(etas):
        out = np.empty(etas.size)
        for i, e in enumerate(etas):
            val, err = inner(e)
            out[i] = val * angular(e)
            errs.append(err * angular(e))
        return out

    eta_lo = w_gamma / (v * k_max) if math.isfinite(k_max) else 0.0
    # eta where the resonance enters the allowed range under the cutoff
    pts = [eta_lo, 1.0]
    if math.isfinite(k_max):
        e_res = (w_gamma + Om) / (v * k_max)
        pts += [p for p in peak_breakpoints([(e_res, m.damping_rate / (v * k_max))]) if eta_lo < p < 1]
    res = integrate_panels(outer, pts, cfg)
    pref = (g * d.gap) ** 2 * G2 / (8 * math.pi**2 * d.gamma**2) * 2.0
    return RateResult(pref * res.value, "exact", pref * res.error, converged=res.converged)


def decay_rate_3d(d: DetectorSpec3D, m: MediumParams) -> RateResult:
    """Zero-velocity spontaneous decay (omega^3 / 3 pi) sqrt(1 + g^2/(Omega^2 - omega^2)) sum |d_i|^2.

    Raises
    ------
    OutOfValidityError
        For omega >= Omega, where the expression was not derived.
    """
    Om, om = m.omega_res, d.gap
    if om >= Om:
        raise OutOfValidityError(f"decay rate formula needs omega < Omega ({om} >= {Om})")
    s_t, s_l = d.natural_dipoles_sq()
    val = om**3 / (3 * math.pi) * math.sqrt(1 + m.coupling_g**2 / (Om * Om - om * om)) * (s_t + s_l)
    return RateResult(val, "decay")


def rate_ratio_2s3p(m: MediumParams, omega: float, v: float) -> float:
    """Excitation over decay for a purely transverse dipole (d_z = 0).

    (9/32) sqrt(1 - g^2/(Omega^2 - omega^2 + g^2)) g^2 / (Omega + omega)^2 (Omega/omega) |v|
    """
    Om, g = m.omega_res, m.coupling_g
    if omega >= Om:
        raise OutOfValidityError(f"ratio needs omega < Omega ({omega} >= {Om})")
    if not omega > 0:
        raise ValueError("omega must be > 0")
    return (9.0 / 32.0) * math.sqrt(1 - g * g / (Om * Om - omega * omega + g * g)) * g * g / (Om + omega) ** 2 \
        * (Om / omega) * abs(v)


@dataclass(frozen=True)
class SIRate:
    per_second: float
    per_cm: float


def rate_to_si(rate: RateResult, velocity: float) -> SIRate:
    """Rate in 1/s and per cm of flight path for a detector moving at ``velocity`` (fraction of c).

    Raises
    ------
    ValueError
        If the rate's unit system is not declared as natural_eV or SI.
    """
    if rate.units == "natural_eV":
        per_s = float(energy_to_angular_frequency(rate.value))
    elif rate.units == "SI":
        per_s = float(rate.value)
    else:
        raise ValueError(f"rate carries undeclared units {rate.units!r}")
    speed = float(velocity_to_cm_per_s(abs(velocity)))
    per_cm = per_s / speed if speed > 0 else 0.0
    return SIRate(per_s, per_cm)


def excitation_rate_3d_closed_si(d: DetectorSpec3D, m: MediumParams, weights=(TRANSVERSE_WEIGHT, LONGITUDINAL_WEIGHT)) -> RateResult:
    """The closed form evaluated directly in SI and multiplied by mu_0/(hbar c^2).

    Frequencies enter as angular frequencies, v in m/s, dipoles in C*m.  This
    is an independent route to the same number as rate_to_si applied to the
    natural-unit result.
    """
    Om = float(energy_to_angular_frequency(m.omega_res))
    om = float(energy_to_angular_frequency(d.gap))
    g = float(energy_to_angular_frequency(m.coupling_g))
    dx, dy, dz = (float(dipole_ea0_to_si(x)) for x in d.dipoles)
    v = float(velocity_to_si(abs(d.velocity)))
    w_t, w_l = weights
    val = (g * om) ** 2 / (4 * math.pi) * Om / (Om + om) ** 2 * v * (w_t * (dx * dx + dy * dy) + w_l * dz * dz)
    return RateResult(val * si_rate_factor(), "closed", units="SI")
