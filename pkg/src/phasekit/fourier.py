"""Trigonometric interpolation and spectral calculus on uniform phase grids.

All curves in this package live on the uniform grid theta_j = 2*pi*j/N,
j = 0..N-1. Values are real; the interpolant uses the symmetric Nyquist
convention, so evaluation off the grid is real and differentiation on the
grid is the standard spectral differentiation.
"""

from __future__ import annotations

import numpy as np


def grid(n_points: int) -> np.ndarray:
    """Uniform phase grid on [0, 2*pi)."""
    return 2.0 * np.pi * np.arange(n_points) / n_points


def coefficients(values: np.ndarray) -> np.ndarray:
    """Complex Fourier coefficients (last axis) of real grid samples."""
    values = np.asarray(values, dtype=float)
    return np.fft.fft(values, axis=-1) / values.shape[-1]


def wavenumbers(n_points: int) -> np.ndarray:
    return np.fft.fftfreq(n_points, d=1.0 / n_points)


def evaluate(coeffs: np.ndarray, theta) -> np.ndarray:
    """Evaluate the trig interpolant at arbitrary phases.

    ``coeffs`` has shape (..., N); returns shape (..., len(theta)) or (...,)
    for scalar theta. Taking the real part implements the symmetric Nyquist
    convention for even N.
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    th = np.atleast_1d(theta)
    m = wavenumbers(coeffs.shape[-1])
    basis = np.exp(1j * np.outer(m, th))
    out = np.real(coeffs @ basis)
    return out[..., 0] if scalar else out


def derivative_coefficients(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of the derivative; Nyquist bin zeroed (standard for even N)."""
    n = coeffs.shape[-1]
    m = wavenumbers(n)
    dc = coeffs * (1j * m)
    if n % 2 == 0:
        dc[..., n // 2] = 0.0
    return dc


def grid_derivative(values: np.ndarray) -> np.ndarray:
    """Spectral derivative of grid samples, returned on the same grid."""
    n = np.asarray(values).shape[-1]
    return np.real(np.fft.ifft(derivative_coefficients(coefficients(values)) * n,
                               axis=-1))


def resample(values: np.ndarray, n_new: int) -> np.ndarray:
    """Trigonometric resampling of real grid samples onto an n_new grid."""
    c = coefficients(values)
    return evaluate(c, grid(n_new))


def circular_mean_product(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(1/2pi) * integral of q(s + chi) w(s) ds on the shared grid, all chi.

    Computed as an exact discrete circular cross-correlation; spectrally
    accurate for smooth periodic integrands.
    """
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    if q.shape != w.shape:
        raise ValueError("circular correlation needs equal-length grids")
    n = q.shape[-1]
    return np.real(np.fft.ifft(np.fft.fft(q) * np.conj(np.fft.fft(w)))) / n


def periodic_integral(values: np.ndarray) -> float:
    """Integral over one full period [0, 2*pi) (trapezoid = exact grid mean)."""
    values = np.asarray(values, dtype=float)
    return float(values.mean(axis=-1) * 2.0 * np.pi)
