import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from ginzburg.medium import (
    CalibrationError,
    MediumParams,
    ResonanceSingularityError,
    calibrate_G_from_resonance_n,
    calibrate_g_from_n0,
    complex_wavenumber,
    permittivity,
    phase_velocity,
    refractive_index,
    spectral_function,
)

omegas = st.floats(0.1, 10.0)


@st.composite
def media(draw, lossy=True):
    Om = draw(omegas)
    g = draw(st.floats(0.01, 20.0))
    G_sq = draw(st.floats(1e-4, 3.9 * Om)) if lossy else 0.0
    return MediumParams(Om, g, G_sq)


reals = st.floats(-50.0, 50.0)


class TestParams:
    def test_properties(self):
        m = MediumParams(3.3, 10.0, 0.8)
        assert m.damping_rate == pytest.approx(0.2)
        assert m.n0 == pytest.approx(math.sqrt(1 + 100 / 3.3**2))
        assert m.with_G_sq(0.1).coupling_G_sq == 0.1

    @pytest.mark.parametrize("args", [(0.0, 1.0, 0.1), (-1.0, 1.0, 0.1), (1.0, -0.1, 0.1),
                                      (1.0, 1.0, -0.1), (1.0, 1.0, 4.0), (float("inf"), 1.0, 0.0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            MediumParams(*args)


class TestSpectralFunction:
    def test_origin(self):
        assert spectral_function(0.0, 0.0, MediumParams(2.0, 1.0, 0.3)) == 0

    def test_vacuum_example(self):
        assert spectral_function(3.0, 1.0, MediumParams(2.0, 0.0, 0.0)) == 24.0

    def test_light_line(self):
        m = MediumParams(2.0, 1.5, 0.7)
        assert spectral_function(1.3, 1.3, m) == pytest.approx(-(1.5**2) * 1.3**2, rel=1e-15)

    @given(media(), reals, reals)
    def test_evenness(self, m, k, kap):
        z = spectral_function(k, kap, m)
        assert spectral_function(-k, kap, m) == z
        assert spectral_function(k, -kap, m) == z

    @given(media(), reals, reals)
    def test_no_real_zeros(self, m, k, kap):
        assume(abs(kap) > 1e-3)
        assert abs(spectral_function(k, kap, m)) > 0


class TestPermittivity:
    def test_static_silicon(self):
        g = calibrate_g_from_n0(3.4, 3.3)
        assert permittivity(0.0, MediumParams(3.3, g, 0.5)) == pytest.approx(11.56, rel=1e-12)

    def test_high_frequency(self):
        assert abs(permittivity(1e6, MediumParams(1.0, 2.0, 0.5)) - 1) < 1e-11

    def test_at_resonance(self):
        m = MediumParams(2.0, 1.5, 0.3)
        eps = permittivity(2.0, m)
        assert eps == pytest.approx(1 + 2j * 1.5**2 / (0.3 * 2.0), rel=1e-14)

    def test_lossless_pole(self):
        m = MediumParams(2.0, 1.0, 0.0)
        with pytest.raises(ResonanceSingularityError):
            permittivity(2.0, m)
        with pytest.raises(ResonanceSingularityError):
            refractive_index(np.array([1.0, -2.0]), m)

    @given(media(), st.floats(0.0, 100.0))
    def test_passive(self, m, w):
        assert np.imag(permittivity(w, m)) >= 0

    def test_lossless_limit_away_from_resonance(self):
        m = MediumParams(1.0, 1.0, 1e-8)
        assert abs(np.imag(permittivity(0.5, m))) < 1e-8

    def test_vectorized(self):
        m = MediumParams(1.0, 1.0, 0.5)
        w = np.linspace(0, 3, 7)
        np.testing.assert_array_equal(permittivity(w, m), [permittivity(x, m) for x in w])


class TestWavenumber:
    @given(st.floats(-20, 20))
    def test_vacuum(self, kap):
        assert complex_wavenumber(kap, MediumParams(1.0, 0.0, 0.2)) == pytest.approx(abs(kap), abs=1e-15)

    def test_static_limit(self):
        m = MediumParams(1.0, 2.0, 0.5)
        n = complex_wavenumber(1e-7, m) / 1e-7
        assert n.real == pytest.approx(m.n0, rel=1e-9)
        assert abs(n.imag) < 1e-6

    @given(media(), st.floats(-30, 30))
    def test_branch(self, m, kap):
        k = complex_wavenumber(kap, m)
        assert k.real >= 0 and k.imag >= 0


class TestPhaseVelocity:
    def test_vacuum(self):
        assert phase_velocity(2.0, MediumParams(1.0, 0.0, 0.0)) == 1.0

    def test_static(self):
        m = MediumParams(1.0, 2.0, 0.5)
        assert phase_velocity(1e-6, m) == pytest.approx(1 / m.n0, rel=1e-9)

    def test_silicon_resonance(self, silicon):
        assert phase_velocity(3.3, silicon) == pytest.approx(1 / 6.8, rel=1e-9)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            phase_velocity(0.0, MediumParams(1.0, 1.0, 0.1))

    @given(media(), st.floats(0.01, 0.99))
    def test_subluminal_below_resonance(self, m, frac):
        assert phase_velocity(frac * m.omega_res, m) <= 1.0


class TestCalibration:
    def test_g_trivial(self):
        assert calibrate_g_from_n0(1.0, 5.0) == 0.0

    def test_g_silicon(self):
        assert calibrate_g_from_n0(3.4, 3.3) == pytest.approx(3.3 * math.sqrt(10.56), rel=1e-15)
        assert calibrate_g_from_n0(3.4, 3.3) == pytest.approx(10.72, abs=5e-3)

    def test_g_domain(self):
        with pytest.raises(ValueError):
            calibrate_g_from_n0(0.9, 1.0)

    @given(st.floats(1.0, 20.0), omegas)
    def test_g_inverse_of_static_permittivity(self, n0, Om):
        g = calibrate_g_from_n0(n0, Om)
        assert permittivity(0.0, MediumParams(Om, g, 0.0)) == pytest.approx(n0 * n0, rel=1e-10)

    def test_G_silicon(self):
        m = MediumParams(3.3, calibrate_g_from_n0(3.4, 3.3))
        G_sq = calibrate_G_from_resonance_n(6.8, m)
        assert G_sq == pytest.approx(0.75, rel=0.03)
        cal = m.with_G_sq(G_sq)
        assert cal.damping_rate == pytest.approx(0.19, abs=0.01)
        assert cal.damping_rate < cal.omega_res
        assert abs(np.real(refractive_index(3.3, cal)) - 6.8) < 1e-6

    def test_G_vanishes_for_large_target(self):
        m = MediumParams(3.3, 10.7)
        values = [calibrate_G_from_resonance_n(t, m) for t in (10.0, 100.0, 1000.0)]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-3

    def test_G_errors(self):
        with pytest.raises(ValueError):
            calibrate_G_from_resonance_n(0.5, MediumParams(1.0, 1.0))
        with pytest.raises(CalibrationError):
            calibrate_G_from_resonance_n(2.0, MediumParams(1.0, 0.0))
