"""Band-limited mixed spectra and their covariance functions.

A mixed spectrum is an absolutely continuous part (a nonnegative density
supported on a frequency band) plus a singular part (a finite list of point
masses, each a spectral line of power alpha^2 carrying the kurtosis of its
stochastic amplitude). The covariance function is the Fourier transform of
the spectrum,

    r(tau) = int e^{i 2 pi theta tau} Phi(theta) dtheta
             + sum_k alpha_k^2 e^{i 2 pi theta_k tau},

evaluated here by adaptive quadrature (oscillatory-weight rules, split at
declared discontinuities) plus the exact singular sum.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .fejer import QuadratureError

__all__ = [
    "Band",
    "SpectralDensity",
    "PointMass",
    "MixedSpectrum",
    "flat_band_density",
    "tabulated_density",
    "covariance_function",
    "covariance_curve",
    "density_integral",
    "density_energy",
    "relative_covariance_error",
    "frequencies_equal",
    "spectrum_to_dict",
    "spectrum_from_dict",
]

DEFAULT_QUAD_TOL = 1e-10


def frequencies_equal(a, b, rtol=1e-12):
    """Whether two frequencies coincide up to 1e-12 relative resolution.

    Bit-exact equality on floats is meaningless after arithmetic; masses
    closer than this are treated as the same spectral line.
    """
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Band:
    """Frequency interval [center - bandwidth/2, center + bandwidth/2]."""

    center: float
    bandwidth: float

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")

    @property
    def lo(self):
        return self.center - self.bandwidth / 2

    @property
    def hi(self):
        return self.center + self.bandwidth / 2

    def contains(self, freq):
        return (self.lo <= np.asarray(freq)) & (np.asarray(freq) <= self.hi)


@dataclass(frozen=True)
class SpectralDensity:
    """Nonnegative power density on a band, zero outside.

    ``kind`` selects the representation: "flat" (constant ``level``),
    "table" (piecewise-linear interpolation of ``table`` rows
    ``(freq, value)`` spanning the band), or "custom" (arbitrary vectorized
    ``profile``). ``discontinuities`` lists interior jump points of the
    profile; band edges where the density does not vanish are implied jumps
    and handled by all quadratures in this package.
    """

    band: Band
    kind: str = "flat"
    level: Optional[float] = None
    table: Optional[tuple] = None
    profile: Optional[Callable] = None
    discontinuities: tuple = ()

    def __post_init__(self):
        if self.kind == "flat":
            if self.level is None or self.level < 0:
                raise ValueError("flat density needs a nonnegative level")
        elif self.kind == "table":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
                raise ValueError("table must be a sequence of (freq, value) rows")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError("table frequencies must be strictly increasing")
            if np.any(tab[:, 1] < 0):
                raise ValueError("table values must be nonnegative")
            object.__setattr__(self, "table", tuple(map(tuple, tab)))
        elif self.kind == "custom":
            if self.profile is None:
                raise ValueError("custom density needs a profile callable")
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = self.band.contains(theta)
        if self.kind == "flat":
            vals = np.full(theta.shape, self.level)
        elif self.kind == "table":
            tab = np.asarray(self.table)
            vals = np.interp(theta, tab[:, 0], tab[:, 1])
        else:
            vals = np.asarray(self.profile(theta), dtype=float)
        return np.where(inside, vals, 0.0)

    def interior_breakpoints(self):
        """Interior quadrature split points: declared jumps plus table nodes."""
        pts = list(self.discontinuities)
        if self.kind == "table":
            pts += [f for f, _ in self.table]
        lo, hi = self.band.lo, self.band.hi
        return sorted({p for p in pts if lo < p < hi})


def flat_band_density(band: Band, total_power: float) -> SpectralDensity:
    """Constant density with the given total power on the band."""
    if total_power <= 0:
        raise ValueError(f"total_power must be positive, got {total_power}")
    return SpectralDensity(band=band, kind="flat",
                           level=total_power / band.bandwidth)


def tabulated_density(band: Band, table) -> SpectralDensity:
    """Piecewise-linear density through the given (freq, value) rows."""
    return SpectralDensity(band=band, kind="table", table=tuple(map(tuple, table)))


@dataclass(frozen=True)
class PointMass:
    """Spectral line: power alpha^2 at ``freq`` with amplitude kurtosis."""

    freq: float
    power: float
    kurtosis: float = 2.0

    def __post_init__(self):
        if self.power <= 0:
            raise ValueError(f"mass power must be positive, got {self.power}")
        if self.kurtosis < 1:
            raise ValueError(f"kurtosis must be >= 1, got {self.kurtosis}")


@dataclass(frozen=True)
class MixedSpectrum:
    """Optional density plus point masses; immutable once constructed."""

    density: Optional[SpectralDensity] = None
    masses: tuple = ()

    def __post_init__(self):
        masses = tuple(self.masses)
        object.__setattr__(self, "masses", masses)
        freqs = [m.freq for m in masses]
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                if frequencies_equal(freqs[i], freqs[j]):
                    raise ValueError(
                        f"mass frequencies must be distinct: {freqs[i]} vs {freqs[j]}")
        if self.density is not None:
            for m in masses:
                if not self.density.band.contains(m.freq):
                    raise ValueError(
                        f"mass at {m.freq} lies outside the density band")

    @property
    def mass_freqs(self):
        return np.array([m.freq for m in self.masses])

    @property
    def mass_powers(self):
        return np.array([m.power for m in self.masses])

    @property
    def mass_kurtoses(self):
        return np.array([m.kurtosis for m in self.masses])

    def total_power(self, tol=DEFAULT_QUAD_TOL):
        dens = density_integral(self.density, tol) if self.density else 0.0
        return dens + float(sum(m.power for m in self.masses))


def _quad_checked(func, a, b, tol, points=None, weight=None, wvar=None):
    """scipy.integrate.quad with failure surfaced as QuadratureError."""
    kwargs = dict(epsabs=tol * 0.1, epsrel=1e-12, limit=400, full_output=1)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
        kwargs["limit"] = 2000
    elif points is not None:
        kwargs["points"] = points
    out = quad(func, a, b, **kwargs)
    value, abserr = out[0], out[1]
    if len(out) > 3 or abserr > tol:
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tol {tol:.3e}",
            achieved=abserr)
    return value


def _density_pieces(density: SpectralDensity):
    cuts = [density.band.lo] + density.interior_breakpoints() + [density.band.hi]
    return list(zip(cuts[:-1], cuts[1:]))


def density_integral(density: Optional[SpectralDensity], tol=DEFAULT_QUAD_TOL):
    """Total power of the density (0 for None). Exact for flat and table."""
    if density is None:
        return 0.0
    if density.kind == "flat":
        return density.level * density.band.bandwidth
    if density.kind == "table":
        tab = np.asarray(density.table)
        return float(np.trapezoid(tab[:, 1], tab[:, 0]))
    return sum(_quad_checked(density, a, b, tol) for a, b in _density_pieces(density))


def density_energy(spec, tol=DEFAULT_QUAD_TOL):
    """Integral of Phi^2 over the band; 0 when there is no density.

    Accepts a MixedSpectrum or a bare SpectralDensity. Exact for flat and
    piecewise-linear densities, adaptive quadrature otherwise.
    """
    density = spec.density if isinstance(spec, MixedSpectrum) else spec
    if density is None:
        return 0.0
    if density.kind == "flat":
        return density.level**2 * density.band.bandwidth
    if density.kind == "table":
        tab = np.asarray(density.table)
        f, v = tab[:, 0], tab[:, 1]
        h = np.diff(f)
        v0, v1 = v[:-1], v[1:]
        return float(np.sum(h * (v0**2 + v0 * v1 + v1**2) / 3.0))
    return sum(_quad_checked(lambda t: density(t) ** 2, a, b, tol)
               for a, b in _density_pieces(density))


def _density_fourier(density: SpectralDensity, tau, tol):
    """int e^{i 2 pi theta tau} Phi(theta) dtheta via oscillatory quadrature."""
    total = 0.0 + 0.0j
    for a, b in _density_pieces(density):
        if tau == 0.0:
            total += _quad_checked(density, a, b, tol)
        else:
            w = 2 * np.pi * tau
            re = _quad_checked(lambda t: float(density(t)), a, b, tol,
                               weight="cos", wvar=w)
            im = _quad_checked(lambda t: float(density(t)), a, b, tol,
                               weight="sin", wvar=w)
            total += re + 1j * im
    return total


def covariance_function(spec: MixedSpectrum, tau, tol=DEFAULT_QUAD_TOL):
    """Covariance r(tau) of the mixed spectrum (complex).

    Density part by adaptive quadrature at absolute tolerance ``tol``
    (failure raises QuadratureError), singular part summed exactly.
    """
    val = 0.0 + 0.0j
    if spec.density is not None:
        val += _density_fourier(spec.density, float(tau), tol)
    if spec.masses:
        val += np.sum(spec.mass_powers
                      * np.exp(2j * np.pi * spec.mass_freqs * float(tau)))
    return complex(val)


def covariance_curve(spec: MixedSpectrum, taus, tol=DEFAULT_QUAD_TOL):
    """Vectorized covariance over an array of lags."""
    taus = np.asarray(taus, dtype=float)
    out = np.zeros(taus.shape, dtype=complex)
    if spec.masses:
        out += (spec.mass_powers[None, :]
                * np.exp(2j * np.pi * spec.mass_freqs[None, :]
                         * taus[..., None])).sum(axis=-1)
    if spec.density is not None:
        out += np.array([_density_fourier(spec.density, float(t), tol)
                         for t in taus.ravel()]).reshape(taus.shape)
    return out


def relative_covariance_error(target: MixedSpectrum, approx: MixedSpectrum,
                              tau_max, grid, tol=DEFAULT_QUAD_TOL):
    """Relative L2 distance between covariance functions on [0, tau_max].

    sqrt( int |r_t - r_a|^2 dt / int |r_t|^2 dt ) by the trapezoid rule on
    ``grid`` equispaced lags.
    """
    if tau_max <= 0:
        raise ValueError(f"tau_max must be positive, got {tau_max}")
    if grid < 2:
        raise ValueError(f"grid must have at least 2 points, got {grid}")
    t = np.linspace(0.0, float(tau_max), int(grid))
    r_t = covariance_curve(target, t, tol)
    r_a = covariance_curve(approx, t, tol)
    den = np.trapezoid(np.abs(r_t) ** 2, t)
    if den == 0.0:
        raise ValueError("target covariance is identically zero on the grid")
    num = np.trapezoid(np.abs(r_t - r_a) ** 2, t)
    return float(np.sqrt(num / den))


def spectrum_to_dict(spec: MixedSpectrum):
    """JSON-ready dict; custom-profile densities are not serializable."""
    out = {}
    if spec.density is not None:
        d = spec.density
        band = {"center": d.band.center, "bandwidth": d.band.bandwidth}
        if d.kind == "flat":
            out["density"] = {"kind": "flat", "band": band,
                              "power": d.level * d.band.bandwidth}
        elif d.kind == "table":
            out["density"] = {"kind": "table", "band": band,
                              "table": [list(row) for row in d.table]}
        else:
            raise ValueError("custom densities cannot be serialized")
    out["masses"] = [{"freq": m.freq, "power": m.power, "kurtosis": m.kurtosis}
                     for m in spec.masses]
    return out


def spectrum_from_dict(data) -> MixedSpectrum:
    """Inverse of spectrum_to_dict."""
    density = None
    if data.get("density"):
        d = data["density"]
        band = Band(center=float(d["band"]["center"]),
                    bandwidth=float(d["band"]["bandwidth"]))
        if d["kind"] == "flat":
            density = flat_band_density(band, float(d["power"]))
        elif d["kind"] == "table":
            density = tabulated_density(band, d["table"])
        else:
            raise ValueError(f"unknown density kind {d['kind']!r}")
    masses = tuple(PointMass(freq=float(m["freq"]), power=float(m["power"]),
                             kurtosis=float(m.get("kurtosis", 2.0)))
                   for m in data.get("masses", ()))
    return MixedSpectrum(density=density, masses=masses)
