"""Stochastic sinusoidal signal models.

A singular-spectrum process is a finite sum of complex exponentials

    x(t) = sum_k z_k e^{i 2 pi theta_k t},

with independent zero-mean circularly symmetric amplitudes z_k of power
E|z_k|^2 = alpha_k^2. Three amplitude laws are provided, spanning every
admissible kurtosis kappa = E|z|^4 / (E|z|^2)^2 >= 1:

* complex Gaussian (kappa = 2),
* fixed magnitude with uniform random phase (kappa = 1),
* two-point magnitude |z| in {0, alpha sqrt(kappa)} with hit probability
  1/kappa and uniform phase (any kappa >= 1).

A process with a spectral density Phi on a band of width B is approximated
by n equispaced lines at theta_k = theta_c + B (k - 1 - n/2) / n carrying
powers (B/n) Phi(theta_k); refining the grid reproduces the target
covariance and, for Gaussian amplitudes with n >= B T, the target's
second-order estimation behavior over horizon T.

Randomness is drawn from per-trial streams derived from
(master_seed, trial_index[, substream]); replaying an index reproduces its
draw bit-exactly regardless of how trials are scheduled.
"""

from dataclasses import dataclass

import numpy as np

from .spectra import (MixedSpectrum, PointMass, SpectralDensity,
                      frequencies_equal)

__all__ = [
    "AmplitudeLaw",
    "SingularProcessSpec",
    "Realization",
    "trial_rng",
    "draw_amplitudes",
    "build_approximation",
    "shift_grid",
    "density_surrogate",
    "to_mixed_spectrum",
    "law_for_kurtosis",
    "combine_specs",
]

GAUSSIAN = "complex-gaussian"
FIXED = "fixed-magnitude-random-phase"
TWO_POINT = "two-point-magnitude"


@dataclass(frozen=True)
class AmplitudeLaw:
    """Circularly symmetric amplitude distribution with unit mean power."""

    kind: str
    kurtosis: float = 2.0

    def __post_init__(self):
        if self.kind == GAUSSIAN:
            object.__setattr__(self, "kurtosis", 2.0)
        elif self.kind == FIXED:
            object.__setattr__(self, "kurtosis", 1.0)
        elif self.kind == TWO_POINT:
            if self.kurtosis < 1.0:
                raise ValueError(
                    f"two-point law needs kurtosis >= 1, got {self.kurtosis}")
        else:
            raise ValueError(f"unknown amplitude law {self.kind!r}")

    @classmethod
    def gaussian(cls):
        return cls(GAUSSIAN)

    @classmethod
    def fixed_magnitude(cls):
        return cls(FIXED)

    @classmethod
    def two_point(cls, kurtosis):
        return cls(TWO_POINT, kurtosis=float(kurtosis))


def law_for_kurtosis(kappa):
    """Natural law with the given kurtosis: fixed (1), Gaussian (2), else two-point."""
    if kappa < 1:
        raise ValueError(f"kurtosis must be >= 1, got {kappa}")
    if frequencies_equal(kappa, 1.0):
        return AmplitudeLaw.fixed_magnitude()
    if frequencies_equal(kappa, 2.0):
        return AmplitudeLaw.gaussian()
    return AmplitudeLaw.two_point(kappa)


@dataclass(frozen=True)
class SingularProcessSpec:
    """Frequencies, per-line powers, and per-line amplitude laws."""

    freqs: tuple
    powers: tuple
    laws: tuple

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.freqs)
        powers = tuple(float(p) for p in self.powers)
        laws = self.laws
        if isinstance(laws, AmplitudeLaw):
            laws = (laws,) * len(freqs)
        laws = tuple(laws)
        if not (len(freqs) == len(powers) == len(laws)):
            raise ValueError("freqs, powers, and laws must have equal length")
        if len(freqs) == 0:
            raise ValueError("a singular process needs at least one component")
        if any(p <= 0 for p in powers):
            raise ValueError("component powers must be positive")
        order = np.argsort(freqs)
        sf = np.asarray(freqs)[order]
        for a, b in zip(sf[:-1], sf[1:]):
            if frequencies_equal(a, b):
                raise ValueError(f"component frequencies must be distinct ({a})")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "laws", laws)

    def __len__(self):
        return len(self.freqs)

    @property
    def freq_array(self):
        return np.asarray(self.freqs)

    @property
    def power_array(self):
        return np.asarray(self.powers)

    @property
    def kurtosis_array(self):
        return np.array([law.kurtosis for law in self.laws])


@dataclass(frozen=True)
class Realization:
    """One draw of the complex amplitudes of a singular process."""

    amplitudes: np.ndarray
    spec: SingularProcessSpec

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (len(self.spec),):
            raise ValueError("amplitude count does not match the spec")
        object.__setattr__(self, "amplitudes", amps)


def trial_rng(master_seed, trial_index, substream=0):
    """Independent, reproducible generator for one Monte Carlo trial."""
    seq = np.random.SeedSequence((int(master_seed), int(trial_index),
                                  int(substream)))
    return np.random.default_rng(seq)


def draw_amplitudes(spec: SingularProcessSpec, rng) -> Realization:
    """Draw one realization of the amplitudes from the given stream.

    Consumes a fixed number of variates (3 per component) regardless of the
    law mixture, so streams stay aligned across configurations.
    """
    n = len(spec)
    phases = rng.uniform(-np.pi, np.pi, size=n)
    expo = rng.exponential(1.0, size=n)
    unif = rng.random(size=n)
    alpha = np.sqrt(spec.power_array)
    mags = np.empty(n)
    for i, law in enumerate(spec.laws):
        if law.kind == GAUSSIAN:
            mags[i] = alpha[i] * np.sqrt(expo[i])
        elif law.kind == FIXED:
            mags[i] = alpha[i]
        else:
            kappa = law.kurtosis
            mags[i] = alpha[i] * np.sqrt(kappa) * (unif[i] < 1.0 / kappa)
    return Realization(mags * np.exp(1j * phases), spec)


def build_approximation(density: SpectralDensity, n: int,
                        law: AmplitudeLaw) -> SingularProcessSpec:
    """Uniform n-line approximation of a density.

    Lines sit at theta_c + B (k - 1 - n/2)/n for k = 1..n and carry powers
    (B/n) Phi(theta_k); zero-power grid points are dropped.
    """
    if n < 1:
        raise ValueError(f"need at least one grid point, got n={n}")
    band = density.band
    k = np.arange(1, n + 1)
    freqs = band.center + band.bandwidth * (k - 1 - n / 2) / n
    powers = (band.bandwidth / n) * np.asarray(density(freqs), dtype=float)
    keep = powers > 0
    if not np.any(keep):
        raise ValueError("density vanishes on the whole approximation grid")
    return SingularProcessSpec(freqs=tuple(freqs[keep]),
                               powers=tuple(powers[keep]), laws=law)


def shift_grid(spec: SingularProcessSpec, delta) -> SingularProcessSpec:
    """Translate every component frequency by delta."""
    return SingularProcessSpec(
        freqs=tuple(f + delta for f in spec.freqs),
        powers=spec.powers, laws=spec.laws)


def density_surrogate(density: SpectralDensity, T,
                      law: AmplitudeLaw = None,
                      oversample: float = 1.0) -> SingularProcessSpec:
    """Sampling surrogate for a density process over horizon T.

    Uses n = ceil(oversample * B * T) grid lines (at least 1), which keeps
    the resolution product gamma = B T / n at or below 1/oversample, with
    Gaussian amplitudes by default. At oversample 1 the surrogate matches
    the target's second-order estimation behavior asymptotically; larger
    values tighten the match at finite T.
    """
    if T <= 0:
        raise ValueError(f"horizon must be positive, got {T}")
    if oversample < 1.0:
        raise ValueError(f"oversample must be >= 1, got {oversample}")
    if law is None:
        law = AmplitudeLaw.gaussian()
    n = max(1, int(np.ceil(oversample * density.band.bandwidth * T)))
    return build_approximation(density, n, law)


def to_mixed_spectrum(spec: SingularProcessSpec) -> MixedSpectrum:
    """Spectrum of the process: one point mass per component."""
    masses = tuple(PointMass(freq=f, power=p, kurtosis=law.kurtosis)
                   for f, p, law in zip(spec.freqs, spec.powers, spec.laws))
    return MixedSpectrum(density=None, masses=masses)


def combine_specs(*specs: SingularProcessSpec) -> SingularProcessSpec:
    """Concatenate independent component sets into one process spec."""
    freqs, powers, laws = [], [], []
    for s in specs:
        freqs += list(s.freqs)
        powers += list(s.powers)
        laws += list(s.laws)
    return SingularProcessSpec(freqs=tuple(freqs), powers=tuple(powers),
                               laws=tuple(laws))
