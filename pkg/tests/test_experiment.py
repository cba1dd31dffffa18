import io
import json
import math

import numpy as np
import pytest

from ginzburg.detector3d import CutoffSpec, DetectorSpec3D, eta_min, excitation_rate_3d_cutoff, rate_to_si
from ginzburg.experiment import (
    CONTEXT_CONSTANTS,
    FitError,
    OpticalDataError,
    OpticalDataSet,
    fit_lorentz_params,
    hydrogen_dipole_2s3p,
    load_optical_data,
    plan_experiment,
    radial_integral_2s3p,
    silicon_hydrogen_scenario,
    silicon_medium,
    synthetic_optical_data,
    write_optical_data,
)
from ginzburg.medium import MediumParams
from ginzburg.surface import SurfaceGeometry, beam_average_suppression, efolding_length

# exact value 27648 sqrt(3) / 15625 from symbolic integration of R31 R20 r^3
RADIAL_EXACT = 27648 * math.sqrt(3) / 15625


class TestLoader:
    def test_empty(self):
        with pytest.raises(OpticalDataError, match="no data rows"):
            load_optical_data(io.StringIO(""))
        with pytest.raises(OpticalDataError, match="no data rows"):
            load_optical_data(io.StringIO("# only a comment\nenergy_eV,n,k\n"))

    def test_single_row(self):
        d = load_optical_data(io.StringIO("energy_eV,n,k\n1.5,3.5,0.01\n"))
        assert len(d) == 1 and d.complex_index[0] == 3.5 + 0.01j

    @pytest.mark.parametrize("text, line", [
        ("energy,n,k\n1,2,3\n", 1),
        ("energy_eV,n,k\n1,2\n", 2),
        ("energy_eV,n,k\n1,2,0\n# c\nx,2,0\n", 4),
        ("energy_eV,n,k\n1,2,0\n0.5,2,0\n", 3),
        ("energy_eV,n,k\n1,-2,0\n", 2),
        ("energy_eV,n,k\n1,2,nan\n", 2),
    ])
    def test_errors_name_line(self, text, line):
        with pytest.raises(OpticalDataError, match=f":{line}:"):
            load_optical_data(io.StringIO(text))

    def test_round_trip_bit_exact(self, tmp_path, silicon):
        data = synthetic_optical_data(silicon, np.linspace(0.5, 6.0, 57))
        path = tmp_path / "si.csv"
        write_optical_data(data, path, comment="synthetic\nfrom the Lorentz model")
        back = load_optical_data(path)
        assert back.source == str(path)
        for a, b in [(data.energy, back.energy), (data.n_real, back.n_real), (data.n_imag, back.n_imag)]:
            assert np.array_equal(a, b)

    def test_dataset_invariants(self):
        with pytest.raises(OpticalDataError):
            OpticalDataSet(np.array([2.0, 1.0]), np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        with pytest.raises(OpticalDataError):
            OpticalDataSet(np.array([]), np.array([]), np.array([]))


class TestFit:
    ENERGIES = np.linspace(1.0, 6.0, 41)

    @pytest.mark.parametrize("scale", [(1.3, 0.7, 1.3), (0.7, 1.3, 0.7), (1.2, 1.2, 0.75)])
    def test_round_trip(self, silicon, scale):
        data = synthetic_optical_data(silicon, self.ENERGIES)
        init = MediumParams(silicon.omega_res * scale[0], silicon.coupling_g * scale[1],
                            silicon.coupling_G_sq * scale[2])
        fitted, report = fit_lorentz_params(data, init)
        assert report.converged
        for name in ("omega_res", "coupling_g", "coupling_G_sq"):
            assert getattr(fitted, name) == pytest.approx(getattr(silicon, name), rel=1e-3)
        regen = synthetic_optical_data(fitted, self.ENERGIES).complex_index
        np.testing.assert_allclose(regen, data.complex_index, rtol=2e-3)

    def test_deterministic(self, silicon):
        data = synthetic_optical_data(silicon, self.ENERGIES)
        init = MediumParams(3.0, 9.0, 1.0)
        assert fit_lorentz_params(data, init)[0] == fit_lorentz_params(data, init)[0]

    def test_lossless_data(self):
        truth = MediumParams(2.0, 1.5, 0.0)
        energies = np.concatenate([np.linspace(0.2, 1.8, 20), np.linspace(2.6, 4.0, 20)])
        data = synthetic_optical_data(truth, energies)
        fitted, _ = fit_lorentz_params(data, MediumParams(2.2, 1.2, 0.3))
        assert fitted.coupling_G_sq < 1e-6

    def test_too_few_rows(self, silicon):
        data = synthetic_optical_data(silicon, [1.0, 2.0, 3.0])
        with pytest.raises(OpticalDataError):
            fit_lorentz_params(data, silicon)

    def test_iteration_cap(self, silicon):
        data = synthetic_optical_data(silicon, self.ENERGIES)
        with pytest.raises(FitError) as info:
            fit_lorentz_params(data, MediumParams(2.0, 5.0, 2.0), max_nfev=2)
        assert info.value.best is not None

    def test_sensitivities_reported(self, silicon):
        _, report = fit_lorentz_params(synthetic_optical_data(silicon, self.ENERGIES), silicon)
        assert set(report.sensitivities) == {"omega_res", "coupling_g", "coupling_G_sq"}
        assert all(v > 0 for v in report.sensitivities.values())
        assert report.residual_norm < 1e-10


class TestHydrogen:
    def test_radial_integral(self):
        assert radial_integral_2s3p() == pytest.approx(RADIAL_EXACT, rel=1e-12)
        assert radial_integral_2s3p() == pytest.approx(3.06, abs=0.01)

    def test_dipoles(self):
        dx, dy, dz = hydrogen_dipole_2s3p()
        assert dz == 0.0
        assert dx == dy == pytest.approx(RADIAL_EXACT / math.sqrt(6), rel=1e-12)

    def test_normalization(self):
        from ginzburg.experiment import _r20, _r31
        from scipy.integrate import quad
        for f in (_r20, _r31):
            assert quad(lambda r: f(r) ** 2 * r * r, 0, np.inf, epsrel=1e-13)[0] == pytest.approx(1.0, abs=1e-8)


@pytest.fixture(scope="module")
def report():
    return plan_experiment(silicon_hydrogen_scenario())


class TestPlanner:
    def test_count_rate(self, report):
        assert report.feasible
        assert 5e-3 / 3 <= report.count_rate_per_s_per_cm <= 5e-3 * 3
        assert report.count_rate_per_s == report.count_rate_per_s_per_cm

    def test_intermediates_match_modules(self, report):
        s = silicon_hydrogen_scenario()
        inter = report.intermediates
        assert inter["eta_min"] == eta_min(1.9, s.medium, 0.25, 22.4)
        assert inter["efolding_length_nm"] == efolding_length(22.4, s.medium)
        assert inter["suppression"] == beam_average_suppression(0.5, inter["efolding_length_nm"])
        bulk = rate_to_si(excitation_rate_3d_cutoff(s.detector, s.medium, CutoffSpec(22.4)), 0.25).per_cm
        assert inter["bulk_per_cm"] == bulk
        assert report.count_rate_per_s_per_cm == bulk * inter["suppression"] * 1e6

    def test_order_discrepancy_flagged(self, report):
        check = report.intermediates["bulk_order_check"]
        assert check["quoted_orders_disagree"]
        assert check["quoted_bulk_orders_per_cm"] == [1e-3, 1e-4]
        assert check["closer_to"] in ("0.001", "0.0001")
        assert "1e-4" in json.dumps(check) or "0.0001" in json.dumps(check)

    def test_context(self, report):
        assert report.context["lyman_beta_propagation_length_m"] == 1.3
        assert report.context == {**CONTEXT_CONSTANTS, **report.context}
        json.loads(report.to_json())

    def test_zero_flux(self):
        assert plan_experiment(silicon_hydrogen_scenario(beam_flux=0.0)).count_rate_per_s_per_cm == 0.0

    def test_linear_in_flux(self, report):
        doubled = plan_experiment(silicon_hydrogen_scenario(beam_flux=2e6))
        assert doubled.count_rate_per_s_per_cm == pytest.approx(2 * report.count_rate_per_s_per_cm, rel=1e-15)

    def test_linear_in_dipole_squares(self, report):
        dx, dy, dz = hydrogen_dipole_2s3p()
        s = silicon_hydrogen_scenario(detector=DetectorSpec3D(1.9, (dx * math.sqrt(2), dy * math.sqrt(2), 0), 0.25))
        assert plan_experiment(s).count_rate_per_s_per_cm == pytest.approx(2 * report.count_rate_per_s_per_cm,
                                                                          rel=1e-12)

    def test_below_threshold(self):
        s = silicon_hydrogen_scenario(detector=DetectorSpec3D(1.9, hydrogen_dipole_2s3p(), 0.2))
        r = plan_experiment(s)
        assert not r.feasible and r.count_rate_per_s_per_cm == 0.0
        assert any("infeasible" in msg for msg in r.diagnostics)

    def test_plate_geometry(self):
        r = plan_experiment(silicon_hydrogen_scenario(geometry=SurfaceGeometry.plate(0.0)))
        assert r.intermediates["suppression"] == 1.0

    def test_path_length(self):
        r = plan_experiment(silicon_hydrogen_scenario(path_length_cm=3.0))
        assert r.count_rate_per_s == pytest.approx(3 * r.count_rate_per_s_per_cm)

    @pytest.mark.parametrize("kw", [dict(k_max=0.0), dict(beam_flux=-1.0), dict(path_length_cm=0.0)])
    def test_invalid_scenario(self, kw):
        with pytest.raises(ValueError):
            silicon_hydrogen_scenario(**kw)


def test_silicon_medium():
    m = silicon_medium()
    assert m.n0 == pytest.approx(3.4, rel=1e-14)
    assert m.damping_rate == pytest.approx(0.19, abs=0.005)
