"""Broadband uniform-linear-array snapshots and the integrated Capon study.

Sources are band-limited processes impinging on a ULA from fixed angles;
the geometric delay tau_m = m d sin(angle) / c acts on each sinusoidal
component exactly as the phase factor e^{-i 2 pi theta tau_m}, so
snapshots of sinusoidal sources are synthesized without waveform
approximation. Spatially and temporally white circular Gaussian noise is
added per sensor. The spatial spectrum is the narrowband Capon estimate
1 / (a^H R^{-1} a) averaged over a uniform frequency grid in the signal
band, and the study sweeps the resolution product gamma of the sources'
sinusoidal approximations, reporting per-angle mean squared error of the
estimated spatial spectrum against the spectrum computed from the exact
array covariance of the density target, normalized by the largest
per-angle MSE of the density-surrogate reference.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .signals import (AmplitudeLaw, SingularProcessSpec, build_approximation,
                      density_surrogate, draw_amplitudes, shift_grid,
                      trial_rng)
from .spectra import (Band, MixedSpectrum, SpectralDensity, covariance_function,
                      density_integral, flat_band_density)

__all__ = [
    "ArrayGeometry",
    "ArraySource",
    "ArrayScenario",
    "SpatialSpectrum",
    "half_wavelength_spacing",
    "steering_vector",
    "synthesize_snapshots",
    "sample_covariance",
    "capon_integrated",
    "exact_array_covariance",
    "doa_mse_experiment",
    "DoAStudyResult",
]

_TIME_CHUNK = 8192


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: sensor count, spacing, propagation speed."""

    sensors: int
    spacing: float
    propagation_speed: float = 1.0

    def __post_init__(self):
        if self.sensors < 2:
            raise ValueError(f"need at least 2 sensors, got {self.sensors}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.propagation_speed <= 0:
            raise ValueError("propagation speed must be positive")


def half_wavelength_spacing(max_freq, propagation_speed=1.0, margin=0.99):
    """Spacing just below half a wavelength at the highest frequency."""
    if max_freq <= 0:
        raise ValueError("max_freq must be positive")
    return margin * propagation_speed / (2.0 * max_freq)


def steering_vector(geometry: ArrayGeometry, angle_deg, freq):
    """Unit-modulus phase response, element m = e^{-i 2 pi freq tau_m}."""
    m = np.arange(geometry.sensors)
    tau = m * geometry.spacing * np.sin(np.deg2rad(angle_deg)) \
        / geometry.propagation_speed
    return np.exp(-2j * np.pi * freq * tau)


def _steering_block(geometry, angle_deg, freqs):
    """Per-component steering vectors, shape (sensors, len(freqs))."""
    m = np.arange(geometry.sensors)[:, None]
    tau = m * geometry.spacing * np.sin(np.deg2rad(angle_deg)) \
        / geometry.propagation_speed
    return np.exp(-2j * np.pi * np.asarray(freqs)[None, :] * tau)


@dataclass(frozen=True)
class ArraySource:
    """One impinging signal: arrival angle plus process description."""

    angle_deg: float
    spec: Union[SingularProcessSpec, SpectralDensity]

    def __post_init__(self):
        if not -90.0 < self.angle_deg < 90.0:
            raise ValueError(
                f"angle must lie in (-90, 90) degrees, got {self.angle_deg}")

    def total_power(self):
        if isinstance(self.spec, SpectralDensity):
            return density_integral(self.spec)
        return float(np.sum(self.spec.power_array))

    def max_freq(self):
        if isinstance(self.spec, SpectralDensity):
            return self.spec.band.hi
        return float(np.max(np.abs(self.spec.freq_array)))


@dataclass(frozen=True)
class ArrayScenario:
    """Geometry, sources, noise level, and the snapshot clock."""

    geometry: ArrayGeometry
    sources: tuple
    snr_db: Optional[float] = 10.0
    snapshots: int = 50_000
    snapshot_dt: float = 1.0
    master_seed: int = 0
    allow_aliasing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise ValueError("scenario needs at least one source")
        if self.snapshots < 1:
            raise ValueError("need at least one snapshot")
        if self.snapshot_dt <= 0:
            raise ValueError("snapshot_dt must be positive")

    @property
    def duration(self):
        return self.snapshots * self.snapshot_dt

    @property
    def noise_power(self):
        """Per-sensor noise variance from the per-source-average SNR."""
        if self.snr_db is None:
            return 0.0
        mean_power = np.mean([s.total_power() for s in self.sources])
        return float(mean_power * 10.0 ** (-self.snr_db / 10.0))

    def check_aliasing(self):
        nu_max = max(s.max_freq() for s in self.sources)
        limit = self.geometry.propagation_speed / (2.0 * nu_max)
        if self.geometry.spacing > limit and not self.allow_aliasing:
            raise ValueError(
                f"spacing {self.geometry.spacing} exceeds the spatial Nyquist "
                f"limit {limit} at frequency {nu_max}; set allow_aliasing to "
                "override")


def _as_singular(source: ArraySource, duration) -> SingularProcessSpec:
    if isinstance(source.spec, SpectralDensity):
        return density_surrogate(source.spec, duration)
    return source.spec


def synthesize_snapshots(scenario: ArrayScenario, rng_amps=None,
                         rng_noise=None):
    """Sensor-by-time matrix of consecutive snapshots on a uniform clock.

    Consecutive snapshots are correlated samples of the same realization,
    not independent draws. Density sources are replaced by their Gaussian
    grid surrogate over the scenario duration. Amplitude and noise streams
    are separate so that noise realizations can be shared across source
    configurations.
    """
    scenario.check_aliasing()
    if rng_amps is None:
        rng_amps = trial_rng(scenario.master_seed, 0, 0)
    if rng_noise is None:
        rng_noise = trial_rng(scenario.master_seed, 0, 1)
    geom = scenario.geometry
    n_t = scenario.snapshots
    out = np.zeros((geom.sensors, n_t), dtype=complex)
    weighted = []
    all_freqs = []
    for src in scenario.sources:
        spec = _as_singular(src, scenario.duration)
        z = draw_amplitudes(spec, rng_amps).amplitudes
        a = _steering_block(geom, src.angle_deg, spec.freq_array)
        weighted.append(a * z[None, :])
        all_freqs.append(spec.freq_array)
    freqs = np.concatenate(all_freqs)
    w = np.concatenate(weighted, axis=1)
    for lo in range(0, n_t, _TIME_CHUNK):
        t = np.arange(lo, min(lo + _TIME_CHUNK, n_t)) * scenario.snapshot_dt
        tones = np.exp(2j * np.pi * freqs[:, None] * t[None, :])
        out[:, lo:lo + len(t)] = w @ tones
    sigma2 = scenario.noise_power
    if sigma2 > 0.0:
        noise = rng_noise.standard_normal((geom.sensors, n_t)) \
            + 1j * rng_noise.standard_normal((geom.sensors, n_t))
        out += np.sqrt(sigma2 / 2.0) * noise
    return out


def sample_covariance(snapshots):
    """(1/T) sum_t s_t s_t^H, symmetrized to exact Hermitian form."""
    s = np.asarray(snapshots)
    r = s @ s.conj().T / s.shape[1]
    return 0.5 * (r + r.conj().T)


@dataclass(frozen=True)
class SpatialSpectrum:
    """Band-integrated Capon power over an angle grid."""

    angles_deg: np.ndarray
    values: np.ndarray

    def peak_angles(self, count=1):
        """Angles of the ``count`` largest local maxima."""
        v = self.values
        interior = np.flatnonzero((v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:])) + 1
        ranked = interior[np.argsort(v[interior])[::-1]]
        return self.angles_deg[ranked[:count]]


def default_angle_grid(step_deg=0.5):
    return np.arange(-90.0 + step_deg, 90.0, step_deg)


def capon_integrated(R, geometry: ArrayGeometry, band: Band, freq_points=32,
                     angle_grid=None, loading_eps=1e-8,
                     cond_limit=1e12) -> SpatialSpectrum:
    """Narrowband Capon power 1/(a^H R^{-1} a) averaged over the band.

    Frequencies are the midpoints of ``freq_points`` uniform subintervals.
    Near-singular R is diagonally loaded by loading_eps * trace(R)/M before
    factorization.
    """
    R = np.asarray(R)
    m = R.shape[0]
    if R.shape != (m, m) or m != geometry.sensors:
        raise ValueError("covariance shape does not match the geometry")
    if angle_grid is None:
        angle_grid = default_angle_grid()
    angle_grid = np.asarray(angle_grid, dtype=float)
    if np.linalg.cond(R) > cond_limit:
        R = R + (loading_eps * np.real(np.trace(R)) / m) * np.eye(m)
    try:
        factor = cho_factor(R, lower=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"covariance not positive definite even after loading: {exc}")
    freqs = band.lo + (np.arange(freq_points) + 0.5) * band.bandwidth / freq_points
    values = np.empty(angle_grid.shape)
    for i, ang in enumerate(angle_grid):
        a = _steering_block(geometry, ang, freqs)
        q = np.real(np.einsum("mf,mf->f", a.conj(), cho_solve(factor, a)))
        values[i] = np.mean(1.0 / q)
    return SpatialSpectrum(angles_deg=angle_grid, values=values)


def exact_array_covariance(scenario: ArrayScenario, tol=1e-10):
    """Ensemble array covariance assembled from the source spectra.

    Singular sources contribute sum_k p_k a(theta_k) a(theta_k)^H; density
    sources contribute the band integral of Phi(nu) a(nu) a(nu)^H, computed
    entrywise from the covariance function at the geometric delays. Sensor
    noise adds sigma^2 I.
    """
    geom = scenario.geometry
    m = geom.sensors
    out = np.zeros((m, m), dtype=complex)
    for src in scenario.sources:
        if isinstance(src.spec, SingularProcessSpec):
            a = _steering_block(geom, src.angle_deg, src.spec.freq_array)
            out += (a * src.spec.power_array[None, :]) @ a.conj().T
        else:
            unit_delay = geom.spacing * np.sin(np.deg2rad(src.angle_deg)) \
                / geom.propagation_speed
            spec = MixedSpectrum(density=src.spec)
            lags = np.arange(-(m - 1), m)
            r = np.array([covariance_function(spec, lag * unit_delay, tol)
                          for lag in lags])
            idx = np.arange(m)
            out += r[(idx[None, :] - idx[:, None]) + (m - 1)]
    out += scenario.noise_power * np.eye(m)
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class DoAStudyRow:
    gamma: Optional[float]
    law: str
    angle_deg: float
    mse: float
    mse_normalized: float


@dataclass(frozen=True)
class DoAStudyResult:
    rows: tuple
    angle_grid: np.ndarray
    normalization: float
    reference_spectrum: SpatialSpectrum

    def curve(self, law, gamma=None):
        """Normalized per-angle MSE curve for one (law, gamma) cell."""
        sel = [r.mse_normalized for r in self.rows
               if r.law == law and (gamma is None and r.gamma is None
                                    or gamma is not None and r.gamma is not None
                                    and abs(r.gamma - gamma) < 1e-9)]
        if not sel:
            raise KeyError(f"no rows for law={law!r} gamma={gamma!r}")
        return np.asarray(sel)

    def summary(self, law, gamma=None, kind="mean"):
        curve = self.curve(law, gamma)
        return float(curve.max() if kind == "max" else curve.mean())

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("gamma,law,angle_deg,mse_normalized\n")
            for r in self.rows:
                g = "" if r.gamma is None else repr(float(r.gamma))
                fh.write(f"{g},{r.law},{r.angle_deg!r},{r.mse_normalized!r}\n")


LAW_NAMES = {"fixed": AmplitudeLaw.fixed_magnitude,
             "gaussian": AmplitudeLaw.gaussian}


def _mse_over_runs(scenario_builder, runs, master_seed, truth, geometry, band,
                   freq_points, angle_grid, workers=1):
    def one_run(r):
        scenario = scenario_builder()
        snaps = synthesize_snapshots(scenario,
                                     rng_amps=trial_rng(master_seed, r, 0),
                                     rng_noise=trial_rng(master_seed, r, 1))
        est = capon_integrated(sample_covariance(snaps), geometry, band,
                               freq_points, angle_grid)
        return (est.values - truth.values) ** 2

    if workers <= 1:
        errs = [one_run(r) for r in range(runs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errs = list(pool.map(one_run, range(runs)))
    return np.mean(errs, axis=0)


def doa_mse_experiment(gamma_grid, laws=("fixed", "gaussian"), runs=50,
                       snapshots=50_000, snapshot_dt=1.0, master_seed=0,
                       band=None, angles_deg=(-5.0, 10.0), sensors=10,
                       snr_db=10.0, source_power=1.0, freq_points=32,
                       angle_grid=None, workers=1) -> DoAStudyResult:
    """Per-angle MSE of the integrated Capon spectrum versus gamma.

    Two equal-power flat-spectrum sources impinge on the ULA; each is
    replaced by an n-line approximation with n = round(B T / gamma) (the
    horizon is adjusted to keep gamma exact; with half-integer gamma the
    snapshot count stays integral), the second source's grid shifted by
    B/(2n) so the sources share no frequencies. The truth spectrum comes
    from the exact array covariance of the density target; the
    normalization is the largest per-angle MSE of the gamma <= 1 Gaussian
    surrogate reference.
    """
    if band is None:
        band = Band(center=0.25, bandwidth=1e-3)
    if angle_grid is None:
        angle_grid = default_angle_grid()
    geometry = ArrayGeometry(
        sensors=sensors,
        spacing=half_wavelength_spacing(band.hi))
    density = flat_band_density(band, source_power)
    duration = snapshots * snapshot_dt
    B = band.bandwidth

    density_sources = tuple(ArraySource(a, density) for a in angles_deg)
    base = dict(geometry=geometry, snr_db=snr_db, snapshot_dt=snapshot_dt,
                master_seed=master_seed)
    truth_scenario = ArrayScenario(sources=density_sources,
                                   snapshots=snapshots, **base)
    truth = capon_integrated(exact_array_covariance(truth_scenario), geometry,
                             band, freq_points, angle_grid)

    rows = []
    ref_mse = _mse_over_runs(
        lambda: ArrayScenario(sources=density_sources, snapshots=snapshots,
                              **base),
        runs, master_seed, truth, geometry, band, freq_points, angle_grid,
        workers)
    norm = float(ref_mse.max())
    for ang, mse in zip(angle_grid, ref_mse):
        rows.append(DoAStudyRow(None, "reference", float(ang), float(mse),
                                float(mse / norm)))

    for law_name in laws:
        law = LAW_NAMES[law_name]() if isinstance(law_name, str) \
            else law_name
        label = law_name if isinstance(law_name, str) else law_name.kind
        for gamma in gamma_grid:
            n = max(1, int(round(B * duration / gamma)))
            dur_used = gamma * n / B
            snaps_used = int(round(dur_used / snapshot_dt))
            grid1 = build_approximation(density, n, law)
            grid2 = shift_grid(build_approximation(density, n, law),
                               B / (2 * n))
            sources = (ArraySource(angles_deg[0], grid1),
                       ArraySource(angles_deg[1], grid2))
            mse = _mse_over_runs(
                lambda: ArrayScenario(sources=sources, snapshots=snaps_used,
                                      **base),
                runs, master_seed, truth, geometry, band, freq_points,
                angle_grid, workers)
            for ang, v in zip(angle_grid, mse):
                rows.append(DoAStudyRow(float(gamma), label, float(ang),
                                        float(v), float(v / norm)))
    return DoAStudyResult(rows=tuple(rows), angle_grid=angle_grid,
                          normalization=norm, reference_spectrum=truth)
