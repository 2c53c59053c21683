"""Periodic chart grids and spectral (Fourier) differentiation.

Fields live on a flat 4-torus chart with real coordinates (x1, x2, x3, x4)
and complex coordinates z1 = x1 + i x2, z2 = x3 + i x4.  Arrays carry
component indices first and the four grid axes last, so a Hermitian metric
field has shape (2, 2, n, n, n, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

GRID_AXES = (-4, -3, -2, -1)


@dataclass(frozen=True)
class ChartGrid:
    """Uniform periodic grid on a 4-torus chart.

    points_per_axis must be a power of two in [8, 32]; periods are the four
    lattice periods of the chart.
    """

    points_per_axis: int = 16
    periods: tuple = (2 * np.pi,) * 4
    complex_dim: int = 2

    def __post_init__(self):
        n = self.points_per_axis
        if self.complex_dim != 2:
            raise ValidationError("only complex dimension 2 is supported",
                                  field="complex_dim")
        if n < 8 or n > 32 or (n & (n - 1)) != 0:
            raise ValidationError(
                f"points_per_axis must be a power of 2 in [8, 32], got {n}",
                field="points_per_axis")
        if len(self.periods) != 4 or any(p <= 0 for p in self.periods):
            raise ValidationError("periods must be 4 positive reals",
                                  field="periods")
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))

    @property
    def shape(self):
        n = self.points_per_axis
        return (n, n, n, n)

    @property
    def spacings(self):
        n = self.points_per_axis
        return tuple(p / n for p in self.periods)

    @property
    def h_min(self):
        return min(self.spacings)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacings))

    @property
    def num_points(self):
        return self.points_per_axis ** 4

    def axes(self, indexing="ij"):
        n = self.points_per_axis
        xs = [np.arange(n) * (p / n) for p in self.periods]
        return np.meshgrid(*xs, indexing=indexing)

    def wavenumbers(self):
        """Angular wavenumber arrays (k1..k4), broadcastable to grid shape."""
        n = self.points_per_axis
        ks = []
        for a, p in enumerate(self.periods):
            k = 2 * np.pi * np.fft.fftfreq(n, d=p / n)
            shape = [1, 1, 1, 1]
            shape[a] = n
            ks.append(k.reshape(shape))
        return ks


class SpectralDeriv:
    """Cached-FFT spectral derivative engine for one grid.

    All derivatives of a field reuse one forward transform.  Wirtinger
    derivatives follow d/dz1 = (d/dx1 - i d/dx2)/2, d/dz1b = conj symbol,
    and likewise for z2 with (x3, x4).
    """

    def __init__(self, grid: ChartGrid):
        self.grid = grid
        ks = grid.wavenumbers()
        self.ik = [1j * k for k in ks]
        # d/dz^j = (d/dx_{2j} - i d/dx_{2j+1})/2 has Fourier symbol
        # (ik_{2j} - i * ik_{2j+1})/2
        self.hol = [0.5 * (self.ik[0] - 1j * self.ik[1]),
                    0.5 * (self.ik[2] - 1j * self.ik[3])]
        self.antihol = [0.5 * (self.ik[0] + 1j * self.ik[1]),
                        0.5 * (self.ik[2] + 1j * self.ik[3])]

    def fft(self, f):
        return np.fft.fftn(f, axes=GRID_AXES)

    def ifft(self, fh):
        return np.fft.ifftn(fh, axes=GRID_AXES)

    def dx(self, f, a, fh=None):
        """Derivative along real axis a in {0,1,2,3}."""
        if fh is None:
            fh = self.fft(f)
        return self.ifft(self.ik[a] * fh)

    def dx_all(self, f):
        """All four real derivatives, stacked on a new leading axis."""
        fh = self.fft(f)
        return np.stack([self.ifft(self.ik[a] * fh) for a in range(4)])

    def dz(self, f, i, fh=None):
        """Holomorphic Wirtinger derivative d/dz^{i+1}."""
        if fh is None:
            fh = self.fft(f)
        return self.ifft(self.hol[i] * fh)

    def dzbar(self, f, i, fh=None):
        """Antiholomorphic Wirtinger derivative d/dzbar^{i+1}."""
        if fh is None:
            fh = self.fft(f)
        return self.ifft(self.antihol[i] * fh)

    def dz_all(self, f):
        """(dz1, dz2, dz1b, dz2b) of f, stacked on a new leading axis."""
        fh = self.fft(f)
        out = [self.ifft(s * fh) for s in (*self.hol, *self.antihol)]
        return np.stack(out)

    def dz_dzbar(self, f, i, j, fh=None):
        """Mixed second derivative d/dz^i d/dzbar^j."""
        if fh is None:
            fh = self.fft(f)
        return self.ifft(self.hol[i] * self.antihol[j] * fh)

    def laplacian_flat(self, f, fh=None):
        """Flat Laplacian sum_a d^2/dx_a^2."""
        if fh is None:
            fh = self.fft(f)
        sym = sum(ik ** 2 for ik in self.ik)
        return self.ifft(sym * fh)

    def spectral_tail_fraction(self, f):
        """Energy fraction carried by modes in the top half of the spectrum.

        Smoothness proxy: well-resolved fields keep this near zero.
        """
        fh = self.fft(f)
        n = self.grid.points_per_axis
        kidx = np.fft.fftfreq(n) * n
        mask = np.zeros(self.grid.shape, dtype=bool)
        for a in range(4):
            shape = [1, 1, 1, 1]
            shape[a] = n
            mask |= (np.abs(kidx).reshape(shape) >= n // 4) * np.ones(self.grid.shape, dtype=bool)
        power = np.abs(fh) ** 2
        total = power.sum()
        if total == 0:
            return 0.0
        tail = power[..., mask].sum() if power.ndim > 4 else power[mask].sum()
        return float(tail / total)


_DERIV_CACHE: dict = {}


def deriv_engine(grid: ChartGrid) -> SpectralDeriv:
    """Shared SpectralDeriv per grid signature (FFT symbol cache)."""
    key = (grid.points_per_axis, grid.periods)
    eng = _DERIV_CACHE.get(key)
    if eng is None:
        eng = SpectralDeriv(grid)
        _DERIV_CACHE[key] = eng
    return eng


def min_eig_hermitian(G):
    """Pointwise smallest eigenvalue of a Hermitian 2x2 component field."""
    a = G[0, 0].real
    d = G[1, 1].real
    b = G[0, 1]
    tr = a + d
    disc = np.sqrt(np.maximum(0.0, (a - d) ** 2 + 4 * np.abs(b) ** 2))
    return 0.5 * (tr - disc)


def require_positive(G, what="metric", tol=0.0):
    lo = min_eig_hermitian(G)
    m = float(lo.min())
    if m <= tol:
        idx = np.unravel_index(int(np.argmin(lo)), lo.shape)
        raise DomainError(f"{what} not positive-definite: min eigenvalue "
                          f"{m:.3e} at grid point {idx}")
    return m
