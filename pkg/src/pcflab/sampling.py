"""Reproducible generators for band-limited test data on chart grids.

Random pluriclosed metrics are produced from (1,0)-form potentials, which
makes them pluriclosed by construction and lets the same continuum field be
evaluated on grids of different resolution (the Fourier modes are stored,
not grid samples).
"""

from __future__ import annotations

import numpy as np

from .chart import HermitianField, flat_metric
from .grid import ChartGrid, deriv_engine


def random_alpha_modes(rng, kmax=3, decay=4.0, amplitude=0.05, nmodes=12):
    """Draw Fourier modes for a (1,0)-form potential.

    Returns a list of (kvec, component, coefficient) with amplitudes damped
    like (1+|k|)^-decay, suitable for grid-transferable refinement studies.
    """
    modes = []
    for _ in range(nmodes):
        k = rng.integers(-kmax, kmax + 1, size=4)
        if not k.any():
            k[rng.integers(0, 4)] = 1
        comp = int(rng.integers(0, 2))
        w = amplitude * (1.0 + np.linalg.norm(k)) ** (-decay)
        coeff = w * (rng.normal() + 1j * rng.normal())
        modes.append((tuple(int(v) for v in k), comp, coeff))
    return modes


def alpha_from_modes(grid: ChartGrid, modes):
    """Evaluate a stored mode list as a (1,0)-form field on a grid."""
    X = grid.axes()
    alpha = np.zeros((2,) + grid.shape, dtype=complex)
    for kvec, comp, coeff in modes:
        phase = sum((2 * np.pi * kvec[a] / grid.periods[a]) * X[a] for a in range(4))
        alpha[comp] += coeff * np.exp(1j * phase)
    return alpha


def metric_from_alpha_field(grid: ChartGrid, alpha, base=None):
    """flat + delbar(alpha) + del(conj alpha) as Hermitian components."""
    eng = deriv_engine(grid)
    fh = eng.fft(alpha)
    fhc = eng.fft(np.conj(alpha))
    h = np.empty((2, 2) + grid.shape, dtype=complex)
    for i in range(2):
        for j in range(2):
            h[i, j] = 1j * eng.ifft(eng.antihol[j] * fh[i]) \
                - 1j * eng.ifft(eng.hol[i] * fhc[j])
    G = (flat_metric(grid).G if base is None else base) + h
    return HermitianField(G, grid)


def random_pluriclosed_metric(grid: ChartGrid, rng, kmax=3, decay=4.0,
                              amplitude=0.05, nmodes=12, base_spread=0.2):
    """Random pluriclosed Hermitian metric; also returns the mode list."""
    modes = random_alpha_modes(rng, kmax=kmax, decay=decay,
                               amplitude=amplitude, nmodes=nmodes)
    base = np.zeros((2, 2) + grid.shape, dtype=complex)
    d1 = 1.0 + base_spread * rng.uniform(-1, 1)
    d2 = 1.0 + base_spread * rng.uniform(-1, 1)
    off = base_spread * 0.3 * (rng.normal() + 1j * rng.normal())
    base[0, 0] = d1
    base[1, 1] = d2
    base[0, 1] = off
    base[1, 0] = np.conj(off)
    hf = metric_from_alpha_field(grid, alpha_from_modes(grid, modes), base=base)
    return hf, modes, (d1, d2, off)


def random_real_scalar(grid: ChartGrid, rng, kmax=2, amplitude=0.1, nmodes=8):
    """Smooth random real scalar field from a few Fourier modes."""
    X = grid.axes()
    f = np.zeros(grid.shape)
    for _ in range(nmodes):
        k = rng.integers(-kmax, kmax + 1, size=4)
        if not k.any():
            continue
        phase = sum((2 * np.pi * k[a] / grid.periods[a]) * X[a] for a in range(4))
        f += amplitude * rng.normal() * np.cos(phase + 2 * np.pi * rng.uniform())
    return f
