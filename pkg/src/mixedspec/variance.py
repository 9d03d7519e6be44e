"""Closed-form variance of time-averaged covariance estimates.

For a mixed spectrum dmu = Phi dtheta + sum_k alpha_k^2 delta_{theta_k} and
averaging time T, the variance of the auto-covariance estimate is

    Var = (1/T) intint f_T(theta - phi) dmu(theta) dmu(phi)
          + sum_k (kappa_k - 2) alpha_k^4,

independent of the lag; the cross-covariance analogue drops the kurtosis
term and pairs dmu_x with dmu_y. Expanding the double integral gives a
density x density term, mass x density cross terms, and a mass x mass
kernel sum. Large-T surrogates divide

    Psi_T  = int Phi^2 + 2 sum_k alpha_k^2 Phi(theta_k)
             + T sum_k (kappa_k - 1) alpha_k^4
    Psi'_T = int Phi_x Phi_y + sum_k alpha_k^2 Phi_y(theta_k^x)
             + sum_l beta_l^2 Phi_x(theta_l^y)
             + T sum_{k,l} alpha_k^2 beta_l^2 [theta_k^x = theta_l^y]

by T, and the T -> infinity limits keep only the kurtosis / shared-mass
sums. For uniform sinusoidal approximations of a density with resolution
product gamma = T B / n, T * Var tends to ((kappa-1) gamma + rho(gamma))
times the density energy.

Numerically, the kernel concentrates in an O(1/T) strip around
theta = phi, so the density x density integral is reduced to a single
integral of f_T against the (cross-)correlation of the densities and
evaluated on kernel-lobe panels; the flat-band case has a closed form in
terms of sine-integral functions.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy.integrate import quad

from .fejer import (fejer, rho, sinc2_integral, sinc2_first_moment,
                    fejer_weighted_integral, QuadratureError)
from .spectra import (MixedSpectrum, SpectralDensity, frequencies_equal,
                      density_energy, DEFAULT_QUAD_TOL)

__all__ = [
    "VarianceReport",
    "autocov_variance",
    "crosscov_variance",
    "autocov_variance_asymptotic",
    "autocov_variance_limit",
    "crosscov_variance_asymptotic",
    "crosscov_variance_limit",
    "approximation_variance_asymptote",
    "frequency_varying_kurtosis_asymptote",
    "autocov_report",
    "crosscov_report",
]


@dataclass(frozen=True)
class VarianceReport:
    """Finite-sample variance, its large-T surrogate, and the limit."""

    finite_sample: float
    asymptotic_surrogate: float
    limit: float
    T: float

    def to_dict(self):
        return asdict(self)


def _check_T(T):
    if T <= 0:
        raise ValueError(f"averaging time must be positive, got {T}")


# ---------------------------------------------------------------------------
# pieces of the double Fejér integral
# ---------------------------------------------------------------------------

def _same_band(dx: SpectralDensity, dy: SpectralDensity):
    return (frequencies_equal(dx.band.lo, dy.band.lo)
            and frequencies_equal(dx.band.hi, dy.band.hi))


def _flat_flat_closed_form(dx, dy, T):
    # intint f_T(th-ph) Lx Ly over a common band of width B equals
    # Lx Ly B * (2 S(BT) - (2/(BT)) M(BT)) with S, M the sinc^2 integrals.
    B = dx.band.bandwidth
    x = B * T
    return dx.level * dy.level * B * (2 * sinc2_integral(x)
                                      - (2.0 / x) * sinc2_first_moment(x))


def _density_cross_correlation(dx, dy, nu, tol):
    """R(nu) = int Phi_x(phi + nu) Phi_y(phi) dphi (scalar nu)."""
    lo = max(dx.band.lo - nu, dy.band.lo)
    hi = min(dx.band.hi - nu, dy.band.hi)
    if hi <= lo:
        return 0.0
    pts = set(dy.interior_breakpoints())
    pts.update(p - nu for p in dx.interior_breakpoints())
    pts.update((dx.band.lo - nu, dx.band.hi - nu, dy.band.lo, dy.band.hi))
    pts = sorted(p for p in pts if lo < p < hi)
    val, err = quad(lambda ph: float(dx(ph + nu)) * float(dy(ph)), lo, hi,
                    points=pts or None, epsabs=tol * 0.1, epsrel=1e-12,
                    limit=200)
    if err > tol:
        raise QuadratureError(
            f"density correlation error {err:.3e} exceeds tol {tol:.3e}",
            achieved=err)
    return val


def _density_density(dx, dy, T, tol):
    """intint f_T(theta - phi) Phi_x(theta) Phi_y(phi) dtheta dphi."""
    if dx is None or dy is None:
        return 0.0
    if dx.kind == "flat" and dy.kind == "flat" and _same_band(dx, dy):
        return _flat_flat_closed_form(dx, dy, T)
    lo = dx.band.lo - dy.band.hi
    hi = dx.band.hi - dy.band.lo
    if hi <= lo:
        return 0.0
    inner_tol = tol * 0.1

    def correlation(nu):
        flat = np.asarray(nu, dtype=float).ravel()
        vals = [_density_cross_correlation(dx, dy, v, inner_tol) for v in flat]
        return np.asarray(vals).reshape(np.shape(nu))

    return fejer_weighted_integral(T, correlation, lo, hi, tol=tol)


def _mass_density(freq, density, T, tol):
    """int f_T(freq - phi) Phi(phi) dphi over the density band."""
    if density is None:
        return 0.0
    lo, hi = density.band.lo, density.band.hi
    if density.kind == "flat":
        return density.level * (sinc2_integral((hi - freq) * T)
                                - sinc2_integral((lo - freq) * T))
    return fejer_weighted_integral(
        T, density, lo, hi, center=freq,
        breakpoints=density.interior_breakpoints(), tol=tol)


def _mass_mass_offdiag(freqs, powers, T):
    if len(freqs) < 2:
        return 0.0
    diff = freqs[:, None] - freqs[None, :]
    k = fejer(diff, T)
    np.fill_diagonal(k, 0.0)
    return float(np.sum(powers[:, None] * powers[None, :] * k))


def _mass_mass_cross(fx, px, fy, py, T):
    if len(fx) == 0 or len(fy) == 0:
        return 0.0
    k = fejer(fx[:, None] - fy[None, :], T)
    return float(np.sum(px[:, None] * py[None, :] * k))


# ---------------------------------------------------------------------------
# finite-sample variances
# ---------------------------------------------------------------------------

def autocov_variance(spec: MixedSpectrum, T, tol=DEFAULT_QUAD_TOL):
    """Variance of the auto-covariance estimate at averaging time T.

    The diagonal of the mass x mass kernel sum cancels one unit of the
    kurtosis term analytically (f_T(0)/T = 1), so the two are combined as
    sum_k (kappa_k - 1) alpha_k^4; the fixed-magnitude pure-line case is
    then exactly zero up to the off-diagonal kernel residue.
    """
    _check_T(T)
    dd = _density_density(spec.density, spec.density, T, tol)
    md = 0.0
    for m in spec.masses:
        md += m.power * _mass_density(m.freq, spec.density, T, tol)
    mm_off = _mass_mass_offdiag(spec.mass_freqs, spec.mass_powers, T)
    kurt = float(np.sum((spec.mass_kurtoses - 1.0) * spec.mass_powers**2)) \
        if spec.masses else 0.0
    return (dd + 2.0 * md + mm_off) / T + kurt


def crosscov_variance(spec_x: MixedSpectrum, spec_y: MixedSpectrum, T,
                      tol=DEFAULT_QUAD_TOL):
    """Variance of the cross-covariance estimate for independent x and y."""
    _check_T(T)
    dd = _density_density(spec_x.density, spec_y.density, T, tol)
    md = 0.0
    for m in spec_x.masses:
        md += m.power * _mass_density(m.freq, spec_y.density, T, tol)
    for m in spec_y.masses:
        md += m.power * _mass_density(m.freq, spec_x.density, T, tol)
    mm = _mass_mass_cross(spec_x.mass_freqs, spec_x.mass_powers,
                          spec_y.mass_freqs, spec_y.mass_powers, T)
    return (dd + md + mm) / T


# ---------------------------------------------------------------------------
# asymptotic surrogates and limits
# ---------------------------------------------------------------------------

def _require_continuous_at(density, freq, what):
    if density is None:
        return
    for p in density.interior_breakpoints():
        if frequencies_equal(p, freq):
            raise ValueError(
                f"{what}: density has a declared discontinuity at mass "
                f"frequency {freq}")
    h = 1e-9 * density.band.bandwidth
    left = float(density(freq - h))
    right = float(density(freq + h))
    scale = max(abs(left), abs(right), 1e-300)
    if abs(left - right) > 1e-6 * scale:
        raise ValueError(
            f"{what}: density is discontinuous at mass frequency {freq} "
            f"({left} vs {right})")


def _density_product_integral(dx, dy, tol):
    """int Phi_x Phi_y over the band overlap (exact for flat/flat)."""
    if dx is None or dy is None:
        return 0.0
    lo = max(dx.band.lo, dy.band.lo)
    hi = min(dx.band.hi, dy.band.hi)
    if hi <= lo:
        return 0.0
    if dx.kind == "flat" and dy.kind == "flat":
        return dx.level * dy.level * (hi - lo)
    pts = sorted({p for p in (dx.interior_breakpoints()
                              + dy.interior_breakpoints()) if lo < p < hi})
    val, err = quad(lambda t: float(dx(t)) * float(dy(t)), lo, hi,
                    points=pts or None, epsabs=tol * 0.1, epsrel=1e-12,
                    limit=200)
    if err > tol:
        raise QuadratureError(
            f"density product error {err:.3e} exceeds tol {tol:.3e}",
            achieved=err)
    return val


def autocov_variance_asymptotic(spec: MixedSpectrum, T, tol=DEFAULT_QUAD_TOL):
    """Large-T surrogate Psi_T / T for the auto-covariance variance.

    Requires the density to be continuous at every mass frequency.
    """
    _check_T(T)
    for m in spec.masses:
        _require_continuous_at(spec.density, m.freq, "autocov asymptote")
    psi = density_energy(spec, tol)
    if spec.masses and spec.density is not None:
        psi += 2.0 * float(np.sum(spec.mass_powers
                                  * spec.density(spec.mass_freqs)))
    psi += T * autocov_variance_limit(spec)
    return psi / T


def autocov_variance_limit(spec: MixedSpectrum):
    """Limit of the auto-covariance variance: sum_k (kappa_k - 1) alpha_k^4."""
    if not spec.masses:
        return 0.0
    return float(np.sum((spec.mass_kurtoses - 1.0) * spec.mass_powers**2))


def crosscov_variance_asymptotic(spec_x: MixedSpectrum, spec_y: MixedSpectrum,
                                 T, tol=DEFAULT_QUAD_TOL):
    """Large-T surrogate Psi'_T / T for the cross-covariance variance."""
    _check_T(T)
    for m in spec_x.masses:
        _require_continuous_at(spec_y.density, m.freq, "crosscov asymptote")
    for m in spec_y.masses:
        _require_continuous_at(spec_x.density, m.freq, "crosscov asymptote")
    psi = _density_product_integral(spec_x.density, spec_y.density, tol)
    if spec_x.masses and spec_y.density is not None:
        psi += float(np.sum(spec_x.mass_powers
                            * spec_y.density(spec_x.mass_freqs)))
    if spec_y.masses and spec_x.density is not None:
        psi += float(np.sum(spec_y.mass_powers
                            * spec_x.density(spec_y.mass_freqs)))
    psi += T * crosscov_variance_limit(spec_x, spec_y)
    return psi / T


def crosscov_variance_limit(spec_x: MixedSpectrum, spec_y: MixedSpectrum):
    """Shared-line power sum: sum over mass pairs at coinciding frequencies."""
    total = 0.0
    for mx in spec_x.masses:
        for my in spec_y.masses:
            if frequencies_equal(mx.freq, my.freq):
                total += mx.power * my.power
    return total


def approximation_variance_asymptote(kappa, gamma, energy):
    """Limit of T * Var for a uniform sinusoidal approximation.

    ((kappa - 1) * gamma + rho(gamma)) times the density energy, for
    resolution product gamma = T B / n.
    """
    if kappa < 1:
        raise ValueError(f"kurtosis must be >= 1, got {kappa}")
    if energy < 0:
        raise ValueError(f"density energy must be nonnegative, got {energy}")
    return ((kappa - 1.0) * gamma + rho(gamma)) * energy


def frequency_varying_kurtosis_asymptote(kappa_of_freq, gamma,
                                         density: SpectralDensity,
                                         breakpoints=(), tol=DEFAULT_QUAD_TOL):
    """Asymptote with per-frequency kurtosis:

    int ((kappa(theta) - 1) gamma + rho(gamma)) Phi(theta)^2 dtheta.

    ``breakpoints`` may list discontinuities of kappa(theta).
    """
    r = rho(gamma)
    lo, hi = density.band.lo, density.band.hi
    pts = sorted({p for p in (list(density.interior_breakpoints())
                              + list(breakpoints)) if lo < p < hi})

    def integrand(theta):
        k = np.asarray(kappa_of_freq(theta), dtype=float)
        return ((k - 1.0) * gamma + r) * np.asarray(density(theta)) ** 2

    val, err = quad(lambda t: float(integrand(t)), lo, hi,
                    points=pts or None, epsabs=tol * 0.1, epsrel=1e-12,
                    limit=200)
    if err > tol:
        raise QuadratureError(
            f"kurtosis asymptote error {err:.3e} exceeds tol {tol:.3e}",
            achieved=err)
    return val


def autocov_report(spec: MixedSpectrum, T, tol=DEFAULT_QUAD_TOL):
    """Bundle the three auto-covariance variance quantities at T."""
    return VarianceReport(
        finite_sample=autocov_variance(spec, T, tol),
        asymptotic_surrogate=autocov_variance_asymptotic(spec, T, tol),
        limit=autocov_variance_limit(spec),
        T=float(T))


def crosscov_report(spec_x: MixedSpectrum, spec_y: MixedSpectrum, T,
                    tol=DEFAULT_QUAD_TOL):
    """Bundle the three cross-covariance variance quantities at T."""
    return VarianceReport(
        finite_sample=crosscov_variance(spec_x, spec_y, T, tol),
        asymptotic_surrogate=crosscov_variance_asymptotic(spec_x, spec_y, T, tol),
        limit=crosscov_variance_limit(spec_x, spec_y),
        T=float(T))
