"""FFT application of multipliers and Poisson operators; dyadic block splitting.

The discrete transform convention is unitary with cell-measure factors, so the
spectral array of a field carries its physical L^2 norm: Plancherel holds with
quadrature-consistent norms.  Multiplier and Poisson application are diagonal
per frequency mode, hence exact on the discrete torus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BoundaryField, HalfSpaceField, NormalGrid, TangentialGrid
from .symbols import MultiplierSymbol, SymbolKernel, _require_mu

__all__ = [
    "LPPartition",
    "forward_fft",
    "inverse_fft",
    "apply_multiplier",
    "apply_poisson",
    "lp_blocks",
]


def forward_fft(g: BoundaryField) -> np.ndarray:
    """Spectral array of ``g``; unitary FFT scaled so Plancherel is physical."""
    return np.fft.fftn(g.samples, norm="ortho") * math.sqrt(g.grid.cell)


def inverse_fft(spec: np.ndarray, grid: TangentialGrid) -> BoundaryField:
    """Inverse of :func:`forward_fft`."""
    samples = np.fft.ifftn(spec, norm="ortho") / math.sqrt(grid.cell)
    return BoundaryField(grid=grid, samples=samples)


def apply_multiplier(a: MultiplierSymbol, mu, g: BoundaryField) -> BoundaryField:
    """Apply the tangential multiplier ``a(., mu)`` to ``g`` spectrally."""
    _require_mu(a.sector, mu)
    avals = np.asarray(a.func(g.grid.freq_vectors, mu), dtype=complex)
    spec = np.fft.fftn(g.samples, norm="ortho")
    out = np.fft.ifftn(avals * spec, norm="ortho")
    return BoundaryField(grid=g.grid, samples=out)


def apply_poisson(k: SymbolKernel, mu, g: BoundaryField, normal: NormalGrid) -> HalfSpaceField:
    """Extend boundary data into the half space through the kernel ``k``.

    Per normal node the kernel acts as a tangential multiplier on the spectrum
    of ``g``, so single Fourier modes map through exactly.
    """
    _require_mu(k.sector, mu)
    grid = g.grid
    dim = grid.dim
    spec = np.fft.fftn(g.samples, norm="ortho")
    fv = grid.freq_vectors[..., None, :]  # broadcast a normal axis before components
    kvals = np.asarray(k.func(fv, mu, normal.nodes), dtype=complex)
    uspec = kvals * spec[..., None]
    samples = np.fft.ifftn(uspec, axes=tuple(range(dim)), norm="ortho")
    return HalfSpaceField(tangential=grid, normal=normal, samples=samples)


@dataclass(frozen=True)
class LPPartition:
    """Dyadic partition of unity on the frequency grid.

    The radial profile is a quintic smoothstep in ``log2 |xi|``: identically 1
    up to ``|xi| = 1``, identically 0 from ``|xi| = 2``.  Blocks telescope, so
    they sum to 1 at every grid frequency once ``J`` covers the grid corner.
    """

    grid: TangentialGrid
    J: int

    @classmethod
    def for_grid(cls, grid: TangentialGrid) -> "LPPartition":
        corner = math.sqrt(grid.dim) * grid.nyquist
        J = max(0, math.ceil(math.log2(corner))) if corner > 1 else 0
        return cls(grid=grid, J=J)

    @staticmethod
    def profile(r) -> np.ndarray:
        """Radial cutoff: 1 for r <= 1, quintic smoothstep down to 0 at r = 2."""
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        out[r >= 2.0] = 0.0
        mid = (r > 1.0) & (r < 2.0)
        u = np.log2(r[mid])
        out[mid] = 1.0 - (6.0 * u**5 - 15.0 * u**4 + 10.0 * u**3)
        return out

    def block_weight(self, j: int, r) -> np.ndarray:
        """Spectral weight of block ``j`` at radius ``r``; equals 1 at r = 2^j."""
        if j == 0:
            return self.profile(r)
        return self.profile(np.asarray(r) / 2.0**j) - self.profile(np.asarray(r) / 2.0 ** (j - 1))


def lp_blocks(g: BoundaryField, part: LPPartition | None = None) -> list[BoundaryField]:
    """Dyadic frequency blocks of ``g``; they sum back to ``g`` exactly."""
    part = part or LPPartition.for_grid(g.grid)
    r = np.sqrt(g.grid.freq_norm_sq)
    spec = np.fft.fftn(g.samples, norm="ortho")
    blocks = []
    for j in range(part.J + 1):
        w = part.block_weight(j, r)
        samples = np.fft.ifftn(w * spec, norm="ortho")
        blocks.append(BoundaryField(grid=g.grid, samples=samples))
    return blocks
