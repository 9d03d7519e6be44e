"""Exact evaluation of time-averaged covariance estimators.

For sinusoidal realizations the estimator

    rhat(tau; T) = (1/T) int_0^T x(t) conj(y(t - tau)) dt

is a finite double sum: with x(t) = sum_k z_k e^{i 2 pi theta_k t} and
y(t) = sum_l w_l e^{i 2 pi nu_l t},

    rhat = sum_{k,l} z_k conj(w_l) e^{i 2 pi nu_l tau}
           e^{i 2 pi (theta_k - nu_l) t0} D_T(theta_k - nu_l),

where t0 is the window start and D_T(f) = e^{i pi f T} sinc(f T) is the
normalized window transform, |D_T|^2 = f_T / T. No time discretization is
involved; a Riemann-sum estimator over sampled sequences is provided as an
independent oracle and for sampled array snapshots.
"""

from dataclasses import dataclass

import numpy as np

from .signals import Realization

__all__ = [
    "EstimatorConfig",
    "time_average_kernel",
    "estimator_matrix",
    "autocov_estimate",
    "crosscov_estimate",
    "batch_estimates",
    "discretized_estimate",
]


@dataclass(frozen=True)
class EstimatorConfig:
    """Averaging window [t_start, t_start + T] and lag for one estimate."""

    T: float
    tau: float = 0.0
    t_start: float = 0.0

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"averaging time must be positive, got {self.T}")


def time_average_kernel(nu, T):
    """D_T(nu) = (1/T) int_0^T e^{i 2 pi nu t} dt = e^{i pi nu T} sinc(nu T)."""
    nu = np.asarray(nu, dtype=float)
    out = np.exp(1j * np.pi * nu * T) * np.sinc(nu * T)
    return complex(out) if out.ndim == 0 else out


def estimator_matrix(freqs_x, freqs_y, cfg: EstimatorConfig):
    """Quadratic-form kernel M with rhat = z_x^T M conj(z_y).

    M[k, l] = e^{i 2 pi nu_l tau} e^{i 2 pi (theta_k - nu_l) t0}
              D_T(theta_k - nu_l).

    Precompute once per (spec pair, window, lag); only the amplitudes vary
    across Monte Carlo trials.
    """
    fx = np.asarray(freqs_x, dtype=float)
    fy = np.asarray(freqs_y, dtype=float)
    diff = fx[:, None] - fy[None, :]
    m = time_average_kernel(diff, cfg.T)
    if cfg.t_start != 0.0:
        m = m * np.exp(2j * np.pi * diff * cfg.t_start)
    return m * np.exp(2j * np.pi * fy * cfg.tau)[None, :]


def autocov_estimate(real: Realization, cfg: EstimatorConfig) -> complex:
    """Exact value of (1/T) int x(t) conj(x(t - tau)) dt for one realization."""
    m = estimator_matrix(real.spec.freq_array, real.spec.freq_array, cfg)
    z = real.amplitudes
    return complex(z @ m @ z.conj())


def crosscov_estimate(real_x: Realization, real_y: Realization,
                      cfg: EstimatorConfig) -> complex:
    """Exact value of (1/T) int x(t) conj(y(t - tau)) dt."""
    m = estimator_matrix(real_x.spec.freq_array, real_y.spec.freq_array, cfg)
    return complex(real_x.amplitudes @ m @ real_y.amplitudes.conj())


def batch_estimates(amps_x, amps_y, matrix):
    """Row-wise quadratic forms for stacked trials.

    ``amps_x``/``amps_y`` are (trials, n_x)/(trials, n_y) amplitude arrays
    and ``matrix`` comes from :func:`estimator_matrix`.
    """
    return np.einsum("tl,tl->t", amps_x @ matrix, amps_y.conj())


def discretized_estimate(samples_x, samples_y, dt, tau_index) -> complex:
    """Riemann-sum covariance of sampled sequences at an integer lag.

    (1/N') sum_m x[m] conj(y[m - tau_index]) over the N' valid indices.
    Independent oracle for the closed forms; also the estimator applied to
    sampled array snapshots.
    """
    x = np.asarray(samples_x)
    y = np.asarray(samples_y)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("samples must be 1-d sequences of equal length")
    if dt <= 0:
        raise ValueError(f"sample spacing must be positive, got {dt}")
    tau_index = int(tau_index)
    if tau_index < 0 or tau_index >= len(x):
        raise ValueError(
            f"tau_index must lie in [0, {len(x) - 1}], got {tau_index}")
    if tau_index == 0:
        prods = x * y.conj()
    else:
        prods = x[tau_index:] * y[:-tau_index].conj()
    return complex(np.mean(prods))
