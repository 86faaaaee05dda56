"""Discrete Fourier transform pair on periodic midpoint grids."""

from __future__ import annotations

import numpy as np

from .space import UniformGrid1D


def frequencies(grid: UniformGrid1D) -> np.ndarray:
    """Angular frequencies in FFT order: integers on the circle, ``2 pi k / L`` on intervals."""
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return k if grid.circle else 2 * np.pi * k / (grid.b - grid.a)


def forward(f, grid: UniformGrid1D) -> np.ndarray:
    """Coefficients ``c(xi) = (1/n) sum_i f_i exp(-i xi x_i)`` in FFT order (last axis)."""
    xi = frequencies(grid)
    f = np.asarray(f)
    return np.fft.fft(f, axis=-1) * np.exp(-1j * xi * grid.nodes[0]) / grid.n


def inverse(c, grid: UniformGrid1D) -> np.ndarray:
    """``sum_xi c(xi) exp(i xi x_i)``; inverse of :func:`forward`."""
    xi = frequencies(grid)
    return np.fft.ifft(np.asarray(c) * np.exp(1j * xi * grid.nodes[0]), axis=-1) * grid.n


def require_periodic(grid):
    if not isinstance(grid, UniformGrid1D):
        raise TypeError("a uniform grid is required")
