"""Excitation rate of an inertial two-level detector moving through the 1D medium.

A detector with gap omega and velocity v gets excited by absorbing a medium
excitation (k, kappa) whose energy in the detector frame, gamma(|kappa| - k v),
is negative enough to pay for the gap.  Three levels of approximation are
exposed, each returning a :class:`RateResult` in natural units (eV):

* ``excitation_rate_exact``: the full single integral over kappa left after
  the energy delta fixes k;
* ``excitation_rate_smallv``: its lowest order in |v|, proportional to |v|^3;
* ``excitation_rate_weakG``: the G -> 0 limit of the small-v form, where the
  resonance Lorentzian collapses and the G^2 factors cancel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .medium import MediumParams, refractive_index
from .quadrature import QuadratureConfig, integrate_semi_infinite

DEFAULT_CONFIG = QuadratureConfig(rel_tol=1e-10)
SMALL_V_WARN = 0.1


class SmallVelocityWarning(UserWarning):
    """Small-velocity expansion used outside |v| << 1."""


@dataclass(frozen=True)
class DetectorSpec1D:
    """Two-level detector in one dimension.

    Parameters
    ----------
    gap : float
        Energy gap omega in eV, > 0.
    coupling_lambda : float
        Dimensionless coupling lambda (transition matrix element magnitude).
    velocity : float
        Velocity as a fraction of c, |v| < 1.
    """

    gap: float
    coupling_lambda: float = 1.0
    velocity: float = 0.0

    def __post_init__(self):
        if not (self.gap > 0 and math.isfinite(self.gap)):
            raise ValueError(f"gap must be > 0, got {self.gap}")
        if not abs(self.velocity) < 1:
            raise ValueError(f"|velocity| must be < 1, got {self.velocity}")
        if not math.isfinite(self.coupling_lambda):
            raise ValueError("coupling_lambda must be finite")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.velocity**2)

    def with_velocity(self, v: float) -> "DetectorSpec1D":
        return replace(self, velocity=v)


@dataclass(frozen=True)
class RateResult:
    """A rate together with how it was obtained.

    ``units`` is ``"natural_eV"`` (rate in eV, i.e. hbar/s) or ``"SI"``.
    """

    value: float
    method: str
    error: float = 0.0
    units: str = "natural_eV"
    converged: bool = True

    def __float__(self):
        return float(self.value)


def boosted_mode_energy(k, kappa, v):
    """gamma (|kappa| - k v): energy of mode (k, kappa) in the frame moving at v."""
    if not abs(v) < 1:
        raise ValueError(f"|v| must be < 1, got {v}")
    gamma = 1.0 / math.sqrt(1.0 - v * v)
    out = gamma * (np.abs(kappa) - np.multiply(k, v))
    return out.item() if np.ndim(out) == 0 else out


def is_anomalous(k, kappa, v):
    """True where |kappa| < k v, the anomalous-Doppler region."""
    out = np.abs(kappa) < np.multiply(k, v)
    return bool(out) if np.ndim(out) == 0 else out


def resonance_k(kappa, d: DetectorSpec1D):
    """Wave number k*(kappa) = (omega/gamma + |kappa|)/|v| picked out by the energy delta."""
    return (d.gap / d.gamma + np.abs(kappa)) / abs(d.velocity)


def _branch_crossings(w_gamma: float, v_abs: float, m: MediumParams, kappa_max: float, n_scan: int = 4000):
    """kappa where the delta line k = (w/gamma + kappa)/v meets k = kappa Re n(kappa).

    Returns (location, width) hints; the width is |Im zeta| / |d Re zeta / d kappa|
    along the line, i.e. the half-width of the |zeta|^-2 peak.
    """
    def f(kap):
        return kap * v_abs * np.real(refractive_index(kap, m)) - kap - w_gamma

    grid = np.concatenate([np.linspace(1e-9, kappa_max, n_scan),
                           m.omega_res + m.damping_rate * np.linspace(-50, 50, 201)])
    grid = np.unique(grid[(grid > 0) & (grid <= kappa_max)])
    if m.coupling_G_sq == 0:
        grid = grid[grid != m.omega_res]
    vals = f(grid)
    hints = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        root = brentq(f, grid[i], grid[i + 1], xtol=1e-14 * max(1.0, grid[i]))
        hints.append((root, _crossing_width(root, w_gamma, v_abs, m)))
    return hints


def _zeta_on_line(kap, w_gamma, v_abs, m):
    ks = (w_gamma + kap) / v_abs
    D = m.omega_res**2 - kap * kap - 0.5j * m.coupling_G_sq * kap
    return D * (ks * ks - kap * kap) - m.coupling_g**2 * kap * kap


def _crossing_width(root, w_gamma, v_abs, m):
    h = 1e-7 * max(root, 1e-3)
    z = _zeta_on_line(root, w_gamma, v_abs, m)
    dz = (_zeta_on_line(root + h, w_gamma, v_abs, m) - _zeta_on_line(root - h, w_gamma, v_abs, m)) / (2 * h)
    width = abs(z.imag) / max(abs(dz.real), 1e-300)
    return max(width, 1e-12 * max(root, 1.0))


def excitation_rate_exact(d: DetectorSpec1D, m: MediumParams, cfg: QuadratureConfig | None = None) -> RateResult:
    """Full rate with gamma kept exact.

    rate = lambda^2 g^2 G^2 omega^2 / (2 pi gamma^2 |v|)
           * int_0^inf dkappa kappa^3 / |zeta(k*(kappa), kappa)|^2

    Returns exactly 0 for v = 0 or g = 0.

    Raises
    ------
    ValueError
        For G = 0 with g > 0: the integrand then has non-integrable poles and
        only the closed weak-dissipation form applies.
    """
    cfg = cfg or DEFAULT_CONFIG
    v = abs(d.velocity)
    if v == 0 or m.coupling_g == 0 or d.coupling_lambda == 0:
        return RateResult(0.0, "exact")
    if m.coupling_G_sq == 0:
        raise ValueError("exact rate needs G > 0; use excitation_rate_weakG for the lossless limit")
    Om, g, G2 = m.omega_res, m.coupling_g, m.coupling_G_sq
    w_gamma = d.gap / d.gamma
    hints = [(Om, max(m.damping_rate, 1e-12 * Om))]
    hints += _branch_crossings(w_gamma, v, m, kappa_max=4.0 * (m.upper_edge + d.gap) / max(v, 1e-3))

    def f(kap):
        return kernels.rate1d_exact(np.ascontiguousarray(kap, dtype=float), w_gamma, v, Om, g, G2)

    res = integrate_semi_infinite(f, replace(cfg, peak_hints=cfg.peak_hints + tuple(hints)), scale=Om)
    pref = (d.coupling_lambda * g * d.gap) ** 2 * G2 / (2 * math.pi * d.gamma**2 * v)
    return RateResult(pref * res.value, "exact", pref * res.error, converged=res.converged)


def excitation_rate_smallv(d: DetectorSpec1D, m: MediumParams, cfg: QuadratureConfig | None = None) -> RateResult:
    """Lowest order in |v|:

    rate = lambda^2 g^2 G^2 omega^2 |v|^3 / (2 pi)
           * int_0^inf dkappa kappa^3 / ((kappa + omega)^4 [(kappa^2 - Omega^2)^2 + kappa^2 G^4 / 4])

    Warns with :class:`SmallVelocityWarning` above |v| = 0.1.
    """
    cfg = cfg or DEFAULT_CONFIG
    v = abs(d.velocity)
    if v > SMALL_V_WARN:
        warnings.warn(f"small-velocity form used at |v| = {v}", SmallVelocityWarning, stacklevel=2)
    if v == 0 or m.coupling_g == 0 or d.coupling_lambda == 0:
        return RateResult(0.0, "small_v")
    if m.coupling_G_sq == 0:
        raise ValueError("small-v rate needs G > 0; use excitation_rate_weakG for the lossless limit")
    Om, G2 = m.omega_res, m.coupling_G_sq

    def f(kap):
        return kernels.rate1d_smallv(np.ascontiguousarray(kap, dtype=float), d.gap, Om, G2)

    hints = ((Om, max(m.damping_rate, 1e-12 * Om)),)
    res = integrate_semi_infinite(f, replace(cfg, peak_hints=cfg.peak_hints + hints), scale=Om)
    pref = (d.coupling_lambda * m.coupling_g * d.gap) ** 2 * G2 * v**3 / (2 * math.pi)
    return RateResult(pref * res.value, "small_v", pref * res.error, converged=res.converged)


def excitation_rate_weakG(d: DetectorSpec1D, m: MediumParams) -> RateResult:
    """Closed form (lambda^2 g^2 omega^2 / 2) Omega / (Omega + omega)^4 |v|^3.

    G does not appear: the resonance Lorentzian integrates to 1/G^2, which
    cancels the G^2 of the coupling.
    """
    Om = m.omega_res
    val = 0.5 * (d.coupling_lambda * m.coupling_g * d.gap) ** 2 * Om / (Om + d.gap) ** 4 * abs(d.velocity) ** 3
    return RateResult(val, "weak_G")
