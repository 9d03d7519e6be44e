"""Seeded Monte Carlo campaigns validating the variance theory.

A campaign sweeps the averaging time T (or the resolution product gamma),
draws independent realizations of the sampled process, evaluates the exact
closed-form covariance estimates, and reports the empirical estimator
variance E|rhat - E rhat|^2 next to the theoretical finite-sample value,
its large-T surrogate, and the limit.

Mixed targets with a density are sampled through the Gaussian-amplitude
grid surrogate; the ``surrogate_oversample`` factor refines the grid beyond
n = B T so that the surrogate's finite-T second-order statistics track the
density target well inside Monte Carlo resolution.

Determinism contract: trial i draws from a stream derived from
(master_seed, i), so results are bit-identical for any worker count; the
aggregation runs in trial-index order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimators import EstimatorConfig, estimator_matrix, batch_estimates
from .fejer import rho
from .signals import (SingularProcessSpec, AmplitudeLaw, build_approximation,
                      combine_specs, draw_amplitudes, law_for_kurtosis,
                      to_mixed_spectrum, trial_rng)
from .spectra import MixedSpectrum, density_energy
from .variance import (autocov_variance, autocov_variance_asymptotic,
                       autocov_variance_limit, crosscov_variance,
                       crosscov_variance_asymptotic, crosscov_variance_limit,
                       approximation_variance_asymptote)

__all__ = [
    "Campaign",
    "CampaignRow",
    "CampaignResult",
    "empirical_variance",
    "pseudo_variance",
    "sampling_spec",
    "run_autocov_campaign",
    "run_crosscov_campaign",
    "run_approx_sweep",
]

CSV_COLUMNS = ("T", "gamma", "empirical_var", "std_err",
               "theory_finite", "theory_asymptotic", "theory_limit")


@dataclass(frozen=True)
class Campaign:
    """Configuration of one empirical-variance study."""

    scenario: str
    spec_x: MixedSpectrum
    spec_y: Optional[MixedSpectrum] = None
    T_grid: tuple = ()
    tau: float = 0.0
    trials: int = 2000
    master_seed: int = 0
    surrogate_oversample: float = 8.0
    surrogate_max_components: int = 2000
    mass_laws_x: Optional[tuple] = None
    mass_laws_y: Optional[tuple] = None

    def __post_init__(self):
        if self.scenario not in ("autocov", "crosscov"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "crosscov" and self.spec_y is None:
            raise ValueError("crosscov campaigns need spec_y")
        if self.trials < 2:
            raise ValueError("need at least 2 trials for a variance")
        grid = tuple(float(t) for t in self.T_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("T_grid must be nonempty and increasing")
        object.__setattr__(self, "T_grid", grid)


@dataclass(frozen=True)
class CampaignRow:
    T: float
    gamma: Optional[float]
    empirical_var: Optional[float]
    std_err: Optional[float]
    theory_finite: float
    theory_asymptotic: float
    theory_limit: float

    def as_csv_values(self, columns=CSV_COLUMNS):
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return repr(float(v))
        return [fmt(getattr(self, c)) for c in columns]


@dataclass(frozen=True)
class CampaignResult:
    scenario: str
    rows: tuple
    master_seed: int
    trials: int

    @property
    def csv_columns(self):
        if self.scenario == "approx-sweep":
            return CSV_COLUMNS + ("n_components", "factor")
        return CSV_COLUMNS

    def write_csv(self, path):
        cols = self.csv_columns
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in self.rows:
                fh.write(",".join(row.as_csv_values(cols)) + "\n")


def empirical_variance(values, method="jackknife"):
    """Unbiased sample variance of complex values with a standard error.

    The variance is (1/(N-1)) sum |v_i - vbar|^2. ``method`` selects the
    standard error of that statistic: "jackknife" (delete-one, via the
    closed-form leave-one-out update) or "plain" (moment formula
    Var(s^2) ~ (m4 - s^4 (N-3)/(N-1)) / N).
    """
    if method not in ("plain", "jackknife"):
        raise ValueError(f"unknown method {method!r}")
    v = np.asarray(values, dtype=complex).ravel()
    n = v.size
    if n < 2:
        raise ValueError("need at least 2 values for a variance")
    dev2 = np.abs(v - v.mean()) ** 2
    s = float(dev2.sum())
    variance = s / (n - 1)
    if method == "plain" or n < 3:
        m4 = float(np.mean(dev2**2))
        se2 = max(m4 - variance**2 * (n - 3) / (n - 1), 0.0) / n
        return {"variance": variance, "standard_error": float(np.sqrt(se2))}
    loo = (s - dev2 * n / (n - 1)) / (n - 2)
    se2 = (n - 1) / n * float(np.sum((loo - loo.mean()) ** 2))
    return {"variance": variance, "standard_error": float(np.sqrt(se2))}


def pseudo_variance(values):
    """Diagnostic pseudo-variance (1/(N-1)) sum (v_i - vbar)^2 (complex)."""
    v = np.asarray(values, dtype=complex).ravel()
    if v.size < 2:
        raise ValueError("need at least 2 values")
    d = v - v.mean()
    return complex(np.sum(d * d) / (v.size - 1))


def _mass_components(spec: MixedSpectrum, mass_laws=None):
    if not spec.masses:
        return None
    laws = []
    for i, m in enumerate(spec.masses):
        if mass_laws is not None and mass_laws[i] is not None:
            laws.append(mass_laws[i])
        else:
            laws.append(law_for_kurtosis(m.kurtosis))
    return SingularProcessSpec(
        freqs=tuple(m.freq for m in spec.masses),
        powers=tuple(m.power for m in spec.masses),
        laws=tuple(laws))


def sampling_spec(spec: MixedSpectrum, T, oversample=8.0, mass_laws=None,
                  max_components=2000):
    """Singular process actually drawn for a mixed target at horizon T.

    The surrogate grid uses n = ceil(oversample * B * T) lines, capped at
    ``max_components`` but never below ceil(B * T), so the resolution
    product stays at or below 1 while the estimator matrices stay
    desk-sized at large horizons.
    """
    parts = []
    if spec.density is not None:
        bt = spec.density.band.bandwidth * T
        n = max(int(np.ceil(bt)),
                min(int(np.ceil(oversample * bt)), int(max_components)))
        parts.append(build_approximation(spec.density, max(n, 1),
                                         AmplitudeLaw.gaussian()))
    masses = _mass_components(spec, mass_laws)
    if masses is not None:
        parts.append(masses)
    if not parts:
        raise ValueError("spectrum has neither density nor masses")
    return combine_specs(*parts) if len(parts) > 1 else parts[0]


def _draw_block(sspec, master_seed, indices, substream):
    amps = np.empty((len(indices), len(sspec)), dtype=complex)
    for row, t in enumerate(indices):
        rng = trial_rng(master_seed, t, substream)
        amps[row] = draw_amplitudes(sspec, rng).amplitudes
    return amps


def _chunks(n_trials, workers):
    size = max(1, -(-n_trials // max(1, workers)))
    return [range(lo, min(lo + size, n_trials))
            for lo in range(0, n_trials, size)]


def _parallel_estimates(task, n_trials, workers):
    parts = _chunks(n_trials, workers)
    if len(parts) == 1:
        return task(parts[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(task, parts))
    return np.concatenate(results)


def run_autocov_campaign(campaign: Campaign, workers=1) -> CampaignResult:
    """Empirical vs theoretical auto-covariance variance over the T grid."""
    if campaign.scenario != "autocov":
        raise ValueError("campaign scenario must be 'autocov'")
    spec = campaign.spec_x
    rows = []
    for T in campaign.T_grid:
        sspec = sampling_spec(spec, T, campaign.surrogate_oversample,
                              campaign.mass_laws_x,
                              campaign.surrogate_max_components)
        cfg = EstimatorConfig(T=T, tau=campaign.tau)
        matrix = estimator_matrix(sspec.freq_array, sspec.freq_array, cfg)

        def block(indices):
            amps = _draw_block(sspec, campaign.master_seed, indices, 0)
            return batch_estimates(amps, amps, matrix)

        est = _parallel_estimates(block, campaign.trials, workers)
        stats = empirical_variance(est, "jackknife")
        rows.append(CampaignRow(
            T=T, gamma=None,
            empirical_var=stats["variance"], std_err=stats["standard_error"],
            theory_finite=autocov_variance(spec, T),
            theory_asymptotic=autocov_variance_asymptotic(spec, T),
            theory_limit=autocov_variance_limit(spec)))
    return CampaignResult("autocov", tuple(rows), campaign.master_seed,
                          campaign.trials)


def run_crosscov_campaign(campaign: Campaign, workers=1) -> CampaignResult:
    """Empirical vs theoretical cross-covariance variance over the T grid."""
    if campaign.scenario != "crosscov":
        raise ValueError("campaign scenario must be 'crosscov'")
    sx, sy = campaign.spec_x, campaign.spec_y
    rows = []
    for T in campaign.T_grid:
        samp_x = sampling_spec(sx, T, campaign.surrogate_oversample,
                               campaign.mass_laws_x,
                               campaign.surrogate_max_components)
        samp_y = sampling_spec(sy, T, campaign.surrogate_oversample,
                               campaign.mass_laws_y,
                               campaign.surrogate_max_components)
        cfg = EstimatorConfig(T=T, tau=campaign.tau)
        matrix = estimator_matrix(samp_x.freq_array, samp_y.freq_array, cfg)

        def block(indices):
            ax = _draw_block(samp_x, campaign.master_seed, indices, 0)
            ay = _draw_block(samp_y, campaign.master_seed, indices, 1)
            return batch_estimates(ax, ay, matrix)

        est = _parallel_estimates(block, campaign.trials, workers)
        stats = empirical_variance(est, "jackknife")
        rows.append(CampaignRow(
            T=T, gamma=None,
            empirical_var=stats["variance"], std_err=stats["standard_error"],
            theory_finite=crosscov_variance(sx, sy, T),
            theory_asymptotic=crosscov_variance_asymptotic(sx, sy, T),
            theory_limit=crosscov_variance_limit(sx, sy)))
    return CampaignResult("crosscov", tuple(rows), campaign.master_seed,
                          campaign.trials)


@dataclass(frozen=True)
class SweepRow(CampaignRow):
    n_components: int = 0
    factor: float = 0.0


def run_approx_sweep(density, law: AmplitudeLaw, gamma_grid, rule,
                     trials=0, master_seed=0, tau=0.0,
                     workers=1) -> CampaignResult:
    """Theory (and optionally Monte Carlo) across resolution products.

    ``rule`` fixes the sweep geometry: {"fixed_T": T} chooses
    n = round(B T / gamma) per point (gamma is then re-derived from the
    integer n), {"fixed_n": n} chooses T = gamma n / B.
    """
    if not (("fixed_T" in rule) ^ ("fixed_n" in rule)):
        raise ValueError("rule must set exactly one of fixed_T / fixed_n")
    B = density.band.bandwidth
    energy = density_energy(density)
    kappa = law.kurtosis
    rows = []
    for gamma in gamma_grid:
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        if "fixed_T" in rule:
            T = float(rule["fixed_T"])
            n = max(1, int(round(B * T / gamma)))
            gamma_used = B * T / n
        else:
            n = int(rule["fixed_n"])
            gamma_used = float(gamma)
            T = gamma_used * n / B
        grid = build_approximation(density, n, law)
        mixed = to_mixed_spectrum(grid)
        factor = (kappa - 1.0) * gamma_used + rho(gamma_used)
        emp = se = None
        if trials:
            cfg = EstimatorConfig(T=T, tau=tau)
            matrix = estimator_matrix(grid.freq_array, grid.freq_array, cfg)

            def block(indices):
                amps = _draw_block(grid, master_seed, indices, 0)
                return batch_estimates(amps, amps, matrix)

            est = _parallel_estimates(block, trials, workers)
            stats = empirical_variance(est, "jackknife")
            emp, se = stats["variance"], stats["standard_error"]
        rows.append(SweepRow(
            T=T, gamma=gamma_used, empirical_var=emp, std_err=se,
            theory_finite=autocov_variance(mixed, T),
            theory_asymptotic=approximation_variance_asymptote(
                kappa, gamma_used, energy) / T,
            theory_limit=autocov_variance_limit(mixed),
            n_components=len(grid), factor=factor))
    return CampaignResult("approx-sweep", tuple(rows), master_seed, trials)
