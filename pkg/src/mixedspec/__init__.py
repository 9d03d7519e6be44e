"""Covariance-estimate variance laboratory for mixed-spectrum signals.

Submodules:

* ``fejer``      -- continuous-time Fejér kernel, its lattice sum, and the
                    resolution-product correction rho(gamma)
* ``spectra``    -- band-limited mixed spectra (density + spectral lines)
                    and their covariance functions
* ``variance``   -- closed-form finite-sample / asymptotic / limiting
                    variance of covariance estimates
* ``signals``    -- amplitude laws, sinusoidal process specs, uniform-grid
                    approximations of densities
* ``estimators`` -- exact closed-form covariance estimators and a sampled
                    Riemann-sum oracle
* ``montecarlo`` -- seeded, reproducible empirical-variance campaigns
* ``arrays``     -- ULA snapshots, Capon spatial spectra, and the broadband
                    DoA mean-squared-error study
* ``cli``        -- config-driven command line front end
"""

from .fejer import (QuadratureError, fejer, rho, sampled_kernel_sum,
                    fejer_integral, fejer_weighted_integral)
from .spectra import (Band, SpectralDensity, PointMass, MixedSpectrum,
                      flat_band_density, tabulated_density,
                      covariance_function, covariance_curve, density_integral,
                      density_energy, relative_covariance_error,
                      spectrum_to_dict, spectrum_from_dict)
from .variance import (VarianceReport, autocov_variance, crosscov_variance,
                       autocov_variance_asymptotic, autocov_variance_limit,
                       crosscov_variance_asymptotic, crosscov_variance_limit,
                       approximation_variance_asymptote,
                       frequency_varying_kurtosis_asymptote,
                       autocov_report, crosscov_report)
from .signals import (AmplitudeLaw, SingularProcessSpec, Realization,
                      trial_rng, draw_amplitudes, build_approximation,
                      shift_grid, density_surrogate, to_mixed_spectrum,
                      law_for_kurtosis, combine_specs)
from .estimators import (EstimatorConfig, time_average_kernel,
                         estimator_matrix, autocov_estimate,
                         crosscov_estimate, batch_estimates,
                         discretized_estimate)
from .montecarlo import (Campaign, CampaignResult, empirical_variance,
                         pseudo_variance, sampling_spec, run_autocov_campaign,
                         run_crosscov_campaign, run_approx_sweep)
from .arrays import (ArrayGeometry, ArraySource, ArrayScenario,
                     SpatialSpectrum, half_wavelength_spacing, steering_vector,
                     synthesize_snapshots, sample_covariance, capon_integrated,
                     exact_array_covariance, doa_mse_experiment)

__version__ = "0.1.0"
