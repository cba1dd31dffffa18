"""Dissipative Hopfield medium: spectral function, permittivity, dispersion."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq


class ResonanceSingularityError(ArithmeticError):
    """Lossless medium evaluated exactly on its resonance."""


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MediumParams:
    """Single-resonance medium.

    Parameters
    ----------
    omega_res : float
        Resonance Omega in eV, > 0.
    coupling_g : float
        Light-matter coupling g in eV, >= 0.
    coupling_G_sq : float
        Squared dissipation coupling G**2 in eV, >= 0.  The damping rate is
        G**2 / 4 and must stay below Omega (underdamped).
    """

    omega_res: float
    coupling_g: float
    coupling_G_sq: float = 0.0

    def __post_init__(self):
        if not (self.omega_res > 0 and math.isfinite(self.omega_res)):
            raise ValueError(f"omega_res must be > 0, got {self.omega_res}")
        if not (self.coupling_g >= 0 and math.isfinite(self.coupling_g)):
            raise ValueError(f"coupling_g must be >= 0, got {self.coupling_g}")
        if not (self.coupling_G_sq >= 0 and math.isfinite(self.coupling_G_sq)):
            raise ValueError(f"coupling_G_sq must be >= 0, got {self.coupling_G_sq}")
        if self.damping_rate >= self.omega_res:
            raise ValueError(
                f"overdamped medium: Gamma = G^2/4 = {self.damping_rate} >= Omega = {self.omega_res}"
            )

    @property
    def damping_rate(self) -> float:
        return self.coupling_G_sq / 4.0

    @property
    def n0(self) -> float:
        """Low-frequency refractive index sqrt(1 + g^2/Omega^2)."""
        return math.sqrt(1.0 + (self.coupling_g / self.omega_res) ** 2)

    @property
    def upper_edge(self) -> float:
        """sqrt(Omega^2 + g^2), where Re eps crosses zero for G -> 0."""
        return math.hypot(self.omega_res, self.coupling_g)

    def with_G_sq(self, G_sq: float) -> "MediumParams":
        return replace(self, coupling_G_sq=G_sq)


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def denominator(kappa, m: MediumParams):
    """Oscillator factor Omega^2 - kappa^2 - i G^2 |kappa| / 2."""
    kappa = np.asarray(kappa, dtype=float)
    return m.omega_res**2 - kappa**2 - 0.5j * m.coupling_G_sq * np.abs(kappa)


def spectral_function(k, kappa, m: MediumParams):
    """zeta(k, kappa) whose zeros are the complex dispersion relation."""
    k = np.asarray(k, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    zeta = denominator(kappa, m) * (k**2 - kappa**2) - m.coupling_g**2 * kappa**2
    return _scalar_or_array(zeta)


def lorentz_permittivity(omega, omega_res, coupling_g, coupling_G_sq):
    """1 + g^2 / (Omega^2 - omega^2 - i G^2 |omega| / 2) from bare numbers.

    No validation and no pole check; meant for optimizers that roam outside
    the physical parameter region.  Use :func:`permittivity` otherwise.
    """
    omega = np.asarray(omega, dtype=float)
    d = omega_res**2 - omega**2 - 0.5j * coupling_G_sq * np.abs(omega)
    return 1.0 + coupling_g**2 / d


def permittivity(omega, m: MediumParams):
    """Relative permittivity 1 + g^2 / (Omega^2 - omega^2 - i G^2 |omega| / 2).

    Raises
    ------
    ResonanceSingularityError
        For a lossless, coupled medium evaluated at |omega| = Omega.
    """
    omega = np.asarray(omega, dtype=float)
    d = denominator(omega, m)
    if m.coupling_g > 0 and np.any(d == 0):
        raise ResonanceSingularityError(
            f"permittivity has a pole at |omega| = Omega = {m.omega_res} for G = 0"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = 1.0 + np.where(d == 0, 0.0, m.coupling_g**2 / np.where(d == 0, 1.0, d))
    return _scalar_or_array(eps)


def refractive_index(omega, m: MediumParams):
    """Complex n = sqrt(eps) on the principal branch (Im n >= 0 for passive media)."""
    return _scalar_or_array(np.sqrt(np.asarray(permittivity(omega, m), dtype=complex)))


def complex_wavenumber(kappa, m: MediumParams):
    """k = |kappa| sqrt(eps(kappa)), Re k >= 0 and Im k >= 0."""
    kappa = np.asarray(kappa, dtype=float)
    return _scalar_or_array(np.abs(kappa) * np.sqrt(np.asarray(permittivity(kappa, m), dtype=complex)))


def phase_velocity(kappa, m: MediumParams):
    """|kappa| / Re k(kappa) as a fraction of c."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa == 0):
        raise ValueError("phase velocity undefined at kappa = 0")
    k = np.asarray(complex_wavenumber(kappa, m))
    return _scalar_or_array(np.abs(kappa) / k.real)


def calibrate_g_from_n0(n0: float, omega_res: float) -> float:
    """Coupling g reproducing the static index n0: g = Omega sqrt(n0^2 - 1)."""
    if not n0 >= 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    return omega_res * math.sqrt(n0 * n0 - 1.0)


def _re_sqrt_1_plus_ia(a: float) -> float:
    # Re sqrt(1 + i a) = sqrt((sqrt(1 + a^2) + 1) / 2)
    return math.sqrt(0.5 * (math.hypot(1.0, a) + 1.0))


def calibrate_G_from_resonance_n(n_res_real: float, m: MediumParams) -> float:
    """G^2 such that Re n(Omega) = n_res_real for the given Omega and g.

    At omega = Omega the permittivity is 1 + i a with a = 2 g^2 / (G^2 Omega),
    so the problem is a monotone 1D root find in log(a).
    """
    if not n_res_real > 1:
        raise ValueError(f"target Re n(Omega) must be > 1, got {n_res_real}")
    if m.coupling_g <= 0:
        raise CalibrationError("no dispersion without coupling g")

    def resid(log_a):
        return _re_sqrt_1_plus_ia(math.exp(log_a)) - n_res_real

    lo, hi = -40.0, 40.0
    if resid(lo) * resid(hi) > 0:
        raise CalibrationError(f"target Re n(Omega) = {n_res_real} not bracketed")
    log_a = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    a = math.exp(log_a)
    G_sq = 2.0 * m.coupling_g**2 / (a * m.omega_res)
    check = np.real(refractive_index(m.omega_res, m.with_G_sq(G_sq)))
    if abs(check - n_res_real) > 1e-6:
        raise CalibrationError(f"calibration residual {check - n_res_real:g} too large")
    return G_sq
