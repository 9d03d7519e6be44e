"""Campaign statistics, determinism, and theory-tracking checks."""

import numpy as np
import pytest

from mixedspec.montecarlo import (Campaign, empirical_variance,
                                  pseudo_variance, run_approx_sweep,
                                  run_autocov_campaign, run_crosscov_campaign,
                                  sampling_spec)
from mixedspec.signals import AmplitudeLaw, trial_rng
from mixedspec.spectra import Band, MixedSpectrum, PointMass, flat_band_density
from mixedspec.variance import crosscov_variance

BAND = Band(center=1.0, bandwidth=1e-2)
FLAT = flat_band_density(BAND, 1.0)
MASS_FREQ = BAND.center + 0.123 * BAND.bandwidth  # off every surrogate grid


class TestEmpiricalVariance:
    def test_constant_values(self):
        out = empirical_variance(np.ones(50, dtype=complex))
        assert out["variance"] == 0.0
        assert out["standard_error"] == 0.0

    def test_alternating_signs(self):
        n = 1000
        v = np.tile([1.0, -1.0], n // 2).astype(complex)
        out = empirical_variance(v, method="plain")
        assert out["variance"] == pytest.approx(n / (n - 1), rel=1e-12)

    def test_gaussian_calibration(self):
        rng = trial_rng(1, 0)
        v = rng.normal(scale=np.sqrt(2), size=100_000).astype(complex)
        for method in ("plain", "jackknife"):
            out = empirical_variance(v, method=method)
            assert abs(out["variance"] - 2.0) < 3 * out["standard_error"]
            # SE of s^2 for N(0, 2): sqrt(2 sigma^4 / N)
            want_se = np.sqrt(2 * 4.0 / v.size)
            assert out["standard_error"] == pytest.approx(want_se, rel=0.1)

    def test_methods_agree(self):
        rng = trial_rng(2, 0)
        v = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        a = empirical_variance(v, "plain")
        b = empirical_variance(v, "jackknife")
        assert a["variance"] == b["variance"]
        assert a["standard_error"] == pytest.approx(b["standard_error"],
                                                    rel=0.05)

    def test_validation(self):
        with pytest.raises(ValueError):
            empirical_variance([1.0])
        with pytest.raises(ValueError):
            empirical_variance([1.0, 2.0], method="bootstrap")

    def test_pseudo_variance_diagnostic(self):
        # circularly symmetric deviations: pseudo-variance vanishes while
        # the variance does not
        rng = trial_rng(3, 0)
        v = np.exp(2j * np.pi * rng.random(200_000))
        out = empirical_variance(v)
        assert out["variance"] == pytest.approx(1.0, rel=0.02)
        assert abs(pseudo_variance(v)) < 0.02


class TestSamplingSpec:
    def test_mass_law_from_kurtosis(self):
        spec = MixedSpectrum(density=FLAT,
                             masses=(PointMass(MASS_FREQ, 1.0, 1.0),))
        s = sampling_spec(spec, T=1e3, oversample=2.0)
        assert len(s) == 2 * 10 + 1
        assert s.laws[-1].kind == "fixed-magnitude-random-phase"
        assert s.laws[0].kind == "complex-gaussian"

    def test_empty_spectrum_rejected(self):
        with pytest.raises(ValueError):
            sampling_spec(MixedSpectrum(), T=10.0)


class TestCampaignValidation:
    def test_scenario_names(self):
        with pytest.raises(ValueError):
            Campaign(scenario="bogus", spec_x=MixedSpectrum(density=FLAT),
                     T_grid=(1.0,))

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            Campaign(scenario="autocov", spec_x=MixedSpectrum(density=FLAT),
                     T_grid=(10.0, 5.0))
        with pytest.raises(ValueError):
            Campaign(scenario="autocov", spec_x=MixedSpectrum(density=FLAT),
                     T_grid=())

    def test_minimum_trials(self):
        with pytest.raises(ValueError):
            Campaign(scenario="autocov", spec_x=MixedSpectrum(density=FLAT),
                     T_grid=(1.0,), trials=1)

    def test_crosscov_needs_second_spec(self):
        with pytest.raises(ValueError):
            Campaign(scenario="crosscov", spec_x=MixedSpectrum(density=FLAT),
                     T_grid=(1.0,))


class TestSingleMassCampaigns:
    def test_gaussian_mass_tracks_unit_variance(self):
        spec = MixedSpectrum(masses=(PointMass(0.3, 1.0, 2.0),))
        c = Campaign(scenario="autocov", spec_x=spec, T_grid=(10.0, 1e3),
                     trials=2000, master_seed=17)
        res = run_autocov_campaign(c)
        for row in res.rows:
            assert row.theory_finite == 1.0
            assert abs(row.empirical_var - 1.0) < 3 * row.std_err

    def test_fixed_mass_is_deterministic(self):
        spec = MixedSpectrum(masses=(PointMass(0.3, 1.0, 1.0),))
        c = Campaign(scenario="autocov", spec_x=spec, T_grid=(10.0,),
                     trials=500, master_seed=17)
        res = run_autocov_campaign(c)
        assert res.rows[0].empirical_var < 1e-25


class TestDeterminism:
    def test_worker_count_invariance(self, tmp_path):
        spec = MixedSpectrum(density=FLAT,
                             masses=(PointMass(MASS_FREQ, 1.0, 2.0),))
        c = Campaign(scenario="autocov", spec_x=spec, T_grid=(50.0, 200.0),
                     trials=300, master_seed=5)
        res1 = run_autocov_campaign(c, workers=1)
        res3 = run_autocov_campaign(c, workers=3)
        for a, b in zip(res1.rows, res3.rows):
            assert a == b
        p1, p3 = tmp_path / "w1.csv", tmp_path / "w3.csv"
        res1.write_csv(p1)
        res3.write_csv(p3)
        assert p1.read_bytes() == p3.read_bytes()

    def test_seed_changes_results(self):
        spec = MixedSpectrum(masses=(PointMass(0.3, 1.0, 2.0),))
        a = run_autocov_campaign(Campaign(
            scenario="autocov", spec_x=spec, T_grid=(10.0,), trials=100,
            master_seed=1))
        b = run_autocov_campaign(Campaign(
            scenario="autocov", spec_x=spec, T_grid=(10.0,), trials=100,
            master_seed=2))
        assert a.rows[0].empirical_var != b.rows[0].empirical_var


class TestLagInvariance:
    def test_theory_identical_and_empirical_compatible(self):
        spec = MixedSpectrum(density=FLAT,
                             masses=(PointMass(MASS_FREQ, 1.0, 2.0),))
        results = {}
        for tau in (0.0, 1.0, 10.0):
            c = Campaign(scenario="autocov", spec_x=spec, T_grid=(1e3,),
                         tau=tau, trials=1500, master_seed=23)
            results[tau] = run_autocov_campaign(c).rows[0]
        base = results[0.0]
        for tau in (1.0, 10.0):
            row = results[tau]
            assert row.theory_finite == base.theory_finite
            assert row.theory_asymptotic == base.theory_asymptotic
            assert abs(row.empirical_var - base.empirical_var) \
                <= 3 * (row.std_err + base.std_err)


class TestCoverage:
    def test_two_sigma_coverage_over_repetitions(self):
        spec = MixedSpectrum(masses=(PointMass(0.3, 1.0, 2.0),))
        hits = 0
        reps = 20
        for rep in range(reps):
            c = Campaign(scenario="autocov", spec_x=spec, T_grid=(25.0,),
                         trials=400, master_seed=1000 + rep)
            row = run_autocov_campaign(c).rows[0]
            if abs(row.empirical_var - row.theory_finite) <= 2 * row.std_err:
                hits += 1
        assert hits >= 18


class TestCrosscovCampaign:
    def test_density_pair_matches_theorem(self):
        x = MixedSpectrum(density=FLAT)
        y = MixedSpectrum(density=FLAT)
        c = Campaign(scenario="crosscov", spec_x=x, spec_y=y, T_grid=(1e4,),
                     trials=2000, master_seed=29)
        row = run_crosscov_campaign(c).rows[0]
        assert row.theory_finite == pytest.approx(
            crosscov_variance(x, y, 1e4), rel=1e-12)
        assert abs(row.empirical_var - row.theory_finite) < 3 * row.std_err

    def test_swapped_specs_share_theory(self):
        x = MixedSpectrum(density=FLAT,
                          masses=(PointMass(MASS_FREQ, 1.0, 1.0),))
        y = MixedSpectrum(masses=(PointMass(0.997, 1.0, 1.0),))
        fwd = run_crosscov_campaign(Campaign(
            scenario="crosscov", spec_x=x, spec_y=y, T_grid=(100.0,),
            trials=50, master_seed=3)).rows[0]
        rev = run_crosscov_campaign(Campaign(
            scenario="crosscov", spec_x=y, spec_y=x, T_grid=(100.0,),
            trials=50, master_seed=3)).rows[0]
        assert fwd.theory_finite == pytest.approx(rev.theory_finite, rel=1e-12)
        assert fwd.theory_asymptotic == pytest.approx(rev.theory_asymptotic,
                                                      rel=1e-12)


class TestApproxSweep:
    def test_factor_and_ordering(self):
        gammas = (0.5, 1.0, 2.0, 3.5)
        fixed = run_approx_sweep(FLAT, AmplitudeLaw.fixed_magnitude(), gammas,
                                 rule={"fixed_n": 100})
        gauss = run_approx_sweep(FLAT, AmplitudeLaw.gaussian(), gammas,
                                 rule={"fixed_n": 100})
        for frow, grow in zip(fixed.rows, gauss.rows):
            # density-process variance over the same horizon
            dens_var = 1.0 / frow.T * 100.0  # energy / T, asymptotic scale
            assert grow.theory_asymptotic >= dens_var * (1 - 1e-9)
            assert frow.theory_asymptotic <= dens_var * (1 + 1e-9)
            assert grow.factor == pytest.approx(frow.factor + frow.gamma)

    def test_integer_gamma_zero_variance_with_mc(self):
        res = run_approx_sweep(FLAT, AmplitudeLaw.fixed_magnitude(),
                               (1.0, 2.0), rule={"fixed_n": 50}, trials=200,
                               master_seed=31)
        for row in res.rows:
            p2 = 1.0 / 50  # sum of squared powers for the uniform unit grid
            assert row.theory_finite < 1e-12 * p2
            assert row.empirical_var < 1e-18

    def test_fixed_T_rule_rounds_n(self):
        res = run_approx_sweep(FLAT, AmplitudeLaw.gaussian(), (1.5,),
                               rule={"fixed_T": 1e5})
        row = res.rows[0]
        assert row.n_components == 667
        assert row.gamma == pytest.approx(1e3 / 667)

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            run_approx_sweep(FLAT, AmplitudeLaw.gaussian(), (1.0,), rule={})
        with pytest.raises(ValueError):
            run_approx_sweep(FLAT, AmplitudeLaw.gaussian(), (-1.0,),
                             rule={"fixed_n": 10})

    def test_csv_has_factor_columns(self, tmp_path):
        res = run_approx_sweep(FLAT, AmplitudeLaw.gaussian(), (1.0,),
                               rule={"fixed_n": 10})
        path = tmp_path / "sweep.csv"
        res.write_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == ("T,gamma,empirical_var,std_err,theory_finite,"
                          "theory_asymptotic,theory_limit,n_components,factor")
