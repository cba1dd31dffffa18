import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ginzburg.detector1d import (
    DetectorSpec1D,
    RateResult,
    SmallVelocityWarning,
    boosted_mode_energy,
    excitation_rate_exact,
    excitation_rate_smallv,
    excitation_rate_weakG,
    is_anomalous,
    resonance_k,
)
from ginzburg.medium import MediumParams


def _smallv(d, m):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallVelocityWarning)
        return excitation_rate_smallv(d, m)


class TestSpec:
    def test_gamma(self):
        assert DetectorSpec1D(1.0, velocity=0.6).gamma == pytest.approx(1.25)
        assert DetectorSpec1D(1.0).with_velocity(0.2).velocity == 0.2

    @pytest.mark.parametrize("kw", [dict(gap=0.0), dict(gap=-1.0), dict(gap=1.0, velocity=1.0),
                                    dict(gap=1.0, coupling_lambda=float("nan"))])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            DetectorSpec1D(**kw)

    def test_rate_result_float(self):
        assert float(RateResult(2.5, "x")) == 2.5


class TestKinematics:
    def test_boosted_energy(self):
        assert boosted_mode_energy(3.0, -2.0, 0.0) == 2.0
        assert boosted_mode_energy(2.0, 1.0, 0.5) == 0.0
        assert boosted_mode_energy(10.0, 1.0, 0.5) < 0
        with pytest.raises(ValueError):
            boosted_mode_energy(1.0, 1.0, 1.0)

    def test_anomalous(self):
        assert is_anomalous(10, 1, 0.5)
        assert not is_anomalous(1, 1, 0.5)
        assert not is_anomalous(2, 1, 0.5)
        np.testing.assert_array_equal(is_anomalous(np.array([10, 1]), 1, 0.5), [True, False])

    @given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-0.99, 0.99))
    def test_anomalous_iff_negative_energy(self, k, kap, v):
        e = boosted_mode_energy(k, kap, v)
        if e != 0:
            assert is_anomalous(k, kap, v) == (e < 0)

    @given(st.floats(0, 50), st.floats(0.001, 0.99), st.floats(0.01, 5))
    def test_delta_support_is_anomalous(self, kap, v, gap):
        d = DetectorSpec1D(gap, velocity=v)
        assert is_anomalous(resonance_k(kap, d), kap, v)
        # and the boosted energy exactly pays for the gap
        assert boosted_mode_energy(resonance_k(kap, d), kap, v) == pytest.approx(-gap, rel=1e-9, abs=1e-9)


class TestExact:
    def test_zero_velocity(self, weak_medium):
        assert excitation_rate_exact(DetectorSpec1D(0.5), weak_medium).value == 0.0

    def test_uncoupled(self):
        assert excitation_rate_exact(DetectorSpec1D(0.5, velocity=0.1), MediumParams(1.0, 0.0, 0.1)).value == 0.0

    def test_lossless_rejected(self):
        with pytest.raises(ValueError):
            excitation_rate_exact(DetectorSpec1D(0.5, velocity=0.1), MediumParams(1.0, 0.3, 0.0))

    def test_matches_smallv(self, weak_medium):
        d = DetectorSpec1D(0.5, 1.0, 1e-2)
        e = excitation_rate_exact(d, weak_medium)
        s = excitation_rate_smallv(d, weak_medium)
        assert e.converged
        assert e.value == pytest.approx(s.value, rel=0.02)

    def test_correction_is_quadratic(self, weak_medium):
        v = np.array([1e-3, 3e-3, 1e-2])
        rel = []
        for x in v:
            d = DetectorSpec1D(0.5, 1.0, x)
            rel.append(abs(excitation_rate_exact(d, weak_medium).value / _smallv(d, weak_medium).value - 1))
        slope = np.polyfit(np.log(v), np.log(rel), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    @given(st.floats(0.02, 0.8), st.floats(0.1, 3.0), st.floats(0.05, 2.0))
    def test_even_in_v_and_nonnegative(self, v, gap, g):
        m = MediumParams(1.0, g, 0.1)
        a = excitation_rate_exact(DetectorSpec1D(gap, 1.0, v), m).value
        b = excitation_rate_exact(DetectorSpec1D(gap, 1.0, -v), m).value
        assert a >= 0
        assert a == b

    def test_relativistic_velocity(self):
        m = MediumParams(1.0, 1.0, 0.2)
        r = excitation_rate_exact(DetectorSpec1D(0.5, 1.0, 0.9), m)
        assert r.converged and r.value > 0 and r.error < 1e-6 * r.value


class TestSmallV:
    def test_cubic_scaling(self, weak_medium):
        a = excitation_rate_smallv(DetectorSpec1D(0.5, 1.0, 0.01), weak_medium).value
        b = excitation_rate_smallv(DetectorSpec1D(0.5, 1.0, 0.02), weak_medium).value
        assert b / a == pytest.approx(8.0, rel=1e-12)

    def test_warns_at_large_v(self, weak_medium):
        with pytest.warns(SmallVelocityWarning):
            excitation_rate_smallv(DetectorSpec1D(0.5, 1.0, 0.2), weak_medium)

    def test_uncoupled(self):
        assert excitation_rate_smallv(DetectorSpec1D(0.5, 1.0, 0.01), MediumParams(1.0, 0.0, 0.1)).value == 0

    def test_weak_G_limit(self, weak_medium):
        d = DetectorSpec1D(0.5, 1.0, 0.01)
        s = excitation_rate_smallv(d, weak_medium).value
        assert s == pytest.approx(excitation_rate_weakG(d, weak_medium).value, rel=0.03)

    def test_weak_G_approach_monotone(self):
        d = DetectorSpec1D(0.5, 1.0, 0.01)
        m = MediumParams(1.0, 0.3)
        gaps = []
        for G_sq in (0.4, 0.04, 0.004):
            mm = m.with_G_sq(G_sq)
            gaps.append(abs(excitation_rate_smallv(d, mm).value / excitation_rate_weakG(d, mm).value - 1))
        assert gaps[0] > gaps[1] > gaps[2]


class TestWeakG:
    def test_example(self):
        r = excitation_rate_weakG(DetectorSpec1D(1.0, 1.0, 0.1), MediumParams(1.0, 1.0, 0.0))
        assert r.value == pytest.approx(3.125e-5, rel=1e-14)

    def test_independent_of_G(self):
        d = DetectorSpec1D(0.7, 2.0, 0.05)
        vals = {excitation_rate_weakG(d, MediumParams(1.3, 0.4, G)).value for G in (0.0, 0.01, 1.0, 4.0)}
        assert len(vals) == 1

    def test_uncoupled(self):
        assert excitation_rate_weakG(DetectorSpec1D(1.0, 1.0, 0.1), MediumParams(1.0, 0.0)).value == 0

    def test_peak_at_resonance(self):
        m = MediumParams(2.0, 1.0)
        gaps = np.linspace(0.5, 4.0, 3501)
        rates = [excitation_rate_weakG(DetectorSpec1D(w, 1.0, 0.1), m).value for w in gaps]
        assert gaps[int(np.argmax(rates))] == pytest.approx(2.0, abs=1e-3)
