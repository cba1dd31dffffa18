import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ginzburg.quadrature import (
    GK_NODES,
    GK_WEIGHTS,
    G_WEIGHTS,
    QuadratureConfig,
    epsilon_sequence,
    integrate_interval,
    integrate_oscillatory_2d,
    integrate_panels,
    integrate_semi_infinite,
    peak_breakpoints,
    richardson,
)

CATALAN = 0.915965594177219015

# (integrand, exact value, peak hints) on [0, inf)
SEMI_INFINITE = [
    (lambda x: np.exp(-x), 1.0, ()),
    (lambda x: 1 / (1 + x * x), math.pi / 2, ()),
    (lambda x: x * np.exp(-x * x), 0.5, ()),
    (lambda x: (1 + x) ** -3.0, 0.5, ()),
    (lambda x: x**3 * np.exp(-x) / -np.expm1(-x), math.pi**4 / 15, ()),
    (lambda x: np.exp(-x) * np.cos(x), 0.5, ()),
    (lambda x: np.exp(-x) / np.sqrt(x), math.sqrt(math.pi), ()),
    (lambda x: np.log1p(x) / (1 + x * x), math.pi * math.log(2) / 4 + CATALAN, ()),
    (lambda x: 1e-3 / ((x - 5.0) ** 2 + 1e-6), math.pi / 2 + math.atan(5e3), ((5.0, 1e-3),)),
    (lambda x: (1 + x) ** -2.0, 1.0, ()),
]
FINITE = [
    (lambda x: np.sqrt(x), 0.0, 1.0, 2 / 3),
    (lambda x: np.cos(x), 0.0, math.pi / 2, 1.0),
    (lambda x: 1 / (1 + 25 * x * x), -1.0, 1.0, 0.4 * math.atan(5.0)),
    (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.045 + 0.245),
]
TOLS = (1e-4, 1e-6, 1e-8, 1e-10)


def _run(case, tol):
    cfg = QuadratureConfig(rel_tol=tol, peak_hints=case[2])
    return integrate_semi_infinite(case[0], cfg)


class TestRule:
    def test_gk_weights(self):
        assert GK_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)
        assert G_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)
        # Kronrod exact through degree 22, Gauss through 13
        for p in range(0, 23, 2):
            assert (GK_WEIGHTS * GK_NODES**p).sum() == pytest.approx(2 / (p + 1), rel=1e-13)
        for p in range(0, 14, 2):
            assert (G_WEIGHTS * GK_NODES**p).sum() == pytest.approx(2 / (p + 1), rel=1e-13)

    def test_peak_breakpoints(self):
        pts = peak_breakpoints([(1.0, 0.01)], 0.0, 2.0)
        assert 1.0 in pts and 1.01 in pts and 0.97 in pts and 0.9 in pts
        assert all(0 < p < 2 for p in pts)


class TestSemiInfinite:
    def test_exponential(self):
        r = integrate_semi_infinite(lambda x: np.exp(-x), QuadratureConfig(rel_tol=1e-12))
        assert r.converged
        assert r.value == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        r = integrate_semi_infinite(lambda x: np.zeros_like(x), QuadratureConfig())
        assert r.value == 0.0 and r.converged

    def test_narrow_lorentzian(self):
        # value from a midpoint sum with h = 1e-5 out to x = 2000 (plus the
        # 1/(3 K^3) tail); the grid is far finer than the 5e-4 peak width
        oracle = 1570.7957377467048
        cfg = QuadratureConfig(rel_tol=1e-10, peak_hints=((1.0, 5e-4),))
        r = integrate_semi_infinite(lambda x: 1 / ((x * x - 1) ** 2 + 1e-6), cfg)
        assert r.converged
        assert r.value == pytest.approx(oracle, rel=1e-9)
        assert r.value == pytest.approx(math.pi / 2e-3, rel=1e-3)

    def test_tail_cutoff(self):
        cfg = QuadratureConfig(rel_tol=1e-12, tail_cutoff_factor=60.0)
        r = integrate_semi_infinite(lambda x: np.exp(-x), cfg, scale=1.0)
        assert r.value == pytest.approx(1.0 - math.exp(-60.0), rel=1e-12)

    def test_vector_valued(self):
        f = lambda x: np.stack([np.exp(-x), np.exp(-2 * x)], axis=-1)
        r = integrate_semi_infinite(f, QuadratureConfig(rel_tol=1e-12))
        np.testing.assert_allclose(r.value, [1.0, 0.5], rtol=1e-12)

    def test_complex(self):
        r = integrate_semi_infinite(lambda x: np.exp(-(1 - 1j) * x), QuadratureConfig(rel_tol=1e-12))
        assert r.value == pytest.approx(1 / (1 - 1j), rel=1e-12)

    def test_unconverged_flag(self):
        cfg = QuadratureConfig(rel_tol=1e-14, max_subdivisions=2)
        r = integrate_semi_infinite(lambda x: 1 / ((x * x - 1) ** 2 + 1e-10), cfg)
        assert not r.converged
        assert math.isfinite(r.value)

    def test_slow_oscillatory_tail_flagged(self):
        # sin^2(x)/x^2: the map piles infinitely many oscillations against t = 1
        r = integrate_semi_infinite(lambda x: np.sinc(x / math.pi) ** 2,
                                    QuadratureConfig(rel_tol=1e-8, max_subdivisions=5000))
        assert not r.converged
        assert r.value == pytest.approx(math.pi / 2, rel=1e-4)

    @pytest.mark.parametrize("tol", TOLS)
    @pytest.mark.parametrize("idx", range(len(SEMI_INFINITE)))
    def test_battery_within_tolerance(self, idx, tol):
        case = SEMI_INFINITE[idx]
        r = _run(case, tol)
        assert r.converged
        assert abs(r.value - case[1]) <= 2 * tol * abs(case[1])

    def test_error_estimate_conservative(self):
        bracketed = total = 0
        for case in SEMI_INFINITE:
            for tol in TOLS:
                r = _run(case, tol)
                total += 1
                bracketed += abs(r.value - case[1]) <= r.error + 4e-16 * abs(case[1])
        for f, a, b, exact in FINITE:
            for tol in TOLS:
                r = integrate_interval(f, a, b, QuadratureConfig(rel_tol=tol))
                total += 1
                bracketed += abs(r.value - exact) <= r.error + 4e-16 * abs(exact)
        assert bracketed / total >= 0.95

    @pytest.mark.parametrize("idx", range(len(SEMI_INFINITE)))
    def test_refinement_never_hurts(self, idx):
        case = SEMI_INFINITE[idx]
        errors = [abs(_run(case, tol).value - case[1]) for tol in TOLS]
        floor = 1e-12 * abs(case[1])  # roundoff level
        for coarse, fine in zip(errors, errors[1:]):
            assert fine <= max(coarse, floor)


class TestFinite:
    @pytest.mark.parametrize("f, a, b, exact", FINITE)
    def test_values(self, f, a, b, exact):
        r = integrate_interval(f, a, b, QuadratureConfig(rel_tol=1e-11), extra_points=(0.3,))
        assert r.value == pytest.approx(exact, rel=1e-10)

    def test_degenerate_interval(self):
        assert integrate_panels(np.exp, [1.0, 1.0], QuadratureConfig()).value == 0.0


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_linearity(a, b, c, d):
    cfg = QuadratureConfig(rel_tol=1e-11)
    f = lambda x: np.exp(-c * x)
    g = lambda x: 1 / (1 + (x / d) ** 2) ** 2
    lhs = integrate_semi_infinite(lambda x: a * f(x) + b * g(x), cfg).value
    rhs = a * integrate_semi_infinite(f, cfg).value + b * integrate_semi_infinite(g, cfg).value
    scale = abs(a) / c + abs(b) * d
    assert abs(lhs - rhs) <= 1e-10 * scale


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_subdivisions=0),
                                    dict(epsilon_regulator=-1), dict(tail_cutoff_factor=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            QuadratureConfig(**kw)

    def test_hints_normalized(self):
        cfg = QuadratureConfig().with_hints((1, 2))
        assert cfg.peak_hints == ((1.0, 2.0),)


class TestRichardson:
    def test_sequence(self):
        assert epsilon_sequence(0.4, True) == [0.4, 0.2, 0.1]
        assert epsilon_sequence(0.4, False) == [0.4]

    @given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10),
           st.complex_numbers(max_magnitude=10))
    def test_exact_on_quadratics(self, c0, c1, c2):
        vals = [c0 + c1 * e + c2 * e * e for e in (1.0, 0.5, 0.25)]
        value, _ = richardson(vals)
        assert abs(value - c0) <= 1e-12 * (1 + abs(c0) + abs(c1) + abs(c2))


class TestOscillatory:
    def test_zero_amplitude(self):
        r = integrate_oscillatory_2d(lambda k, kap: np.zeros_like(k), 0.3, 1.0, QuadratureConfig(rel_tol=1e-8),
                                     epsilon=0.1)
        assert r.value == 0

    def test_gaussian(self):
        r = integrate_oscillatory_2d(lambda k, kap: np.exp(-k * k - kap * kap), 0.0, 0.0,
                                     QuadratureConfig(rel_tol=1e-10))
        assert r.value == pytest.approx(math.pi, rel=1e-9)

    def test_gaussian_regulated(self):
        # exp(-k^2) e^{ik dx} -> sqrt(pi) e^{-dx^2/4}; the kappa side is done in closed form
        dx, dt, eps = 0.7, 0.4, 0.05
        cfg = QuadratureConfig(rel_tol=1e-10, epsilon_regulator=eps, richardson=False)
        r = integrate_oscillatory_2d(lambda k, kap: np.exp(-k * k - kap * kap), dt, dx, cfg)
        from scipy.special import erfc
        z = (eps + 1j * dt) / 2
        kappa_part = 2 * (math.sqrt(math.pi) / 2) * np.exp(z * z) * erfc(z)
        assert r.value == pytest.approx(math.sqrt(math.pi) * math.exp(-dx * dx / 4) * kappa_part, rel=1e-8)

    def test_needs_amplitude_or_inner(self):
        with pytest.raises(ValueError):
            integrate_oscillatory_2d(None, 0.0, 1.0, QuadratureConfig())
        with pytest.raises(ValueError):
            integrate_oscillatory_2d(lambda k, kap: k, 0.0, 1.0, QuadratureConfig(), epsilon=-1)
