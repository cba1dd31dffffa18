"""Physical constants and natural-unit <-> SI conversions.

Internally every formula works in hbar = c = 1 with energies in eV.  SI only
appears at the API boundary: rates in 1/s, lengths in nm, dipoles in C*m.
Charges in natural units follow the Heaviside-Lorentz convention, so that
e**2 = 4*pi*alpha.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import constants as _c

# CODATA values (SI)
ELEMENTARY_CHARGE = _c.e  # C
HBAR = _c.hbar  # J s
SPEED_OF_LIGHT = _c.c  # m / s
MU_0 = _c.mu_0  # N / A^2
FINE_STRUCTURE = _c.alpha
BOHR_RADIUS = _c.physical_constants["Bohr radius"][0]  # m

# hbar*c in eV*nm (~197.327)
HBAR_C_EV_NM = HBAR * SPEED_OF_LIGHT / ELEMENTARY_CHARGE * 1e9
# e*a0 in C*m (~8.478e-30)
EA0_SI = ELEMENTARY_CHARGE * BOHR_RADIUS


class UnitSystem(str, enum.Enum):
    NATURAL_EV = "natural_eV"
    SI = "SI"


def energy_to_angular_frequency(energy_ev):
    """Angular frequency (1/s) of an energy given in eV."""
    return np.multiply(energy_ev, ELEMENTARY_CHARGE / HBAR)


def angular_frequency_to_energy(omega_si):
    """Inverse of :func:`energy_to_angular_frequency`."""
    return np.multiply(omega_si, HBAR / ELEMENTARY_CHARGE)


def inverse_energy_to_length(energy_ev):
    """Length hbar*c/E in nm.

    Raises
    ------
    ValueError
        If any energy is not strictly positive.
    """
    e = np.asarray(energy_ev, dtype=float)
    if np.any(~(e > 0)):
        raise ValueError("inverse_energy_to_length needs E > 0")
    out = HBAR_C_EV_NM / e
    return float(out) if out.ndim == 0 else out


def length_to_inverse_energy(length_nm):
    """Energy hbar*c/L in eV for a length in nm."""
    ell = np.asarray(length_nm, dtype=float)
    if np.any(~(ell > 0)):
        raise ValueError("length_to_inverse_energy needs L > 0")
    out = HBAR_C_EV_NM / ell
    return float(out) if out.ndim == 0 else out


def si_rate_factor() -> float:
    """mu_0 / (hbar c^2) in SI base units (s^3 C^-2 m^-3).

    Multiplying the 3D closed-form rate evaluated with angular frequencies in
    1/s, velocity in m/s and dipoles in C*m by this factor yields 1/s.
    """
    return MU_0 / (HBAR * SPEED_OF_LIGHT**2)


def dipole_ea0_to_si(d_ea0):
    """Dipole moment in e*a0 -> C*m."""
    return np.multiply(d_ea0, EA0_SI)


def dipole_ea0_to_natural(d_ea0):
    """Dipole moment in e*a0 -> natural units (1/eV), Heaviside-Lorentz charge."""
    a0_inv_ev = BOHR_RADIUS * 1e9 / HBAR_C_EV_NM
    return np.multiply(d_ea0, math.sqrt(4.0 * math.pi * FINE_STRUCTURE) * a0_inv_ev)


def velocity_to_si(v_c):
    """Velocity as a fraction of c -> m/s."""
    return np.multiply(v_c, SPEED_OF_LIGHT)


def velocity_to_cm_per_s(v_c):
    return np.multiply(v_c, SPEED_OF_LIGHT * 100.0)
