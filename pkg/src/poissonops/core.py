"""Grids, sectors, bracket weights, and the field containers shared by every module.

The tangential variable lives on a periodic box of side ``L`` sampled at ``N``
points per axis, so Fourier multipliers act exactly on the discrete modes.  The
normal variable lives on a geometrically graded grid on ``[0, X_max]``: kernels
decay on the scale of an inverse bracket weight, so nodes cluster at the
boundary.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi


class SectorError(ValueError):
    """Raised when a spectral parameter falls outside the admissible sector."""


@dataclass(frozen=True)
class Sector:
    """Open angular region ``alpha < arg(mu) < beta`` of the punctured plane.

    ``beta - alpha`` may not exceed a full turn.  The designated empty sector
    (``Sector.empty()``) contains no parameter at all; operations taking an
    optional parameter accept "no parameter" exactly when their sector is empty.
    """

    alpha: float = 0.0
    beta: float = 0.0
    is_empty: bool = False

    def __post_init__(self) -> None:
        if self.is_empty:
            return
        if not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got ({self.alpha}, {self.beta})")
        if self.beta - self.alpha > TWO_PI + 1e-12:
            raise ValueError("sector opening exceeds a full turn")

    @classmethod
    def empty(cls) -> "Sector":
        return cls(0.0, 0.0, is_empty=True)

    @classmethod
    def symmetric(cls, half_angle: float) -> "Sector":
        """Sector ``|arg(mu)| < half_angle`` around the positive real axis."""
        return cls(-half_angle, half_angle)

    def contains(self, mu: complex) -> bool:
        if self.is_empty or mu == 0:
            return False
        a = cmath.phase(mu)  # principal value in (-pi, pi]
        # arg taken continuously in (alpha - 2*pi, alpha + 2*pi]
        for k in (-1, 0, 1):
            if self.alpha < a + k * TWO_PI < self.beta:
                return True
        return False


def sector_contains(sector: Sector, mu: complex) -> bool:
    """True iff ``mu`` is nonzero and its argument lies strictly inside the sector."""
    return sector.contains(mu)


def bracket(xi, mu: complex | None = None) -> float:
    """Parameter-dependent elliptic weight ``(1 + |xi|^2 + |mu|^2)^(1/2)``.

    ``xi`` is a frequency vector (a scalar is treated as one component);
    an absent ``mu`` contributes nothing.  The result is always >= 1.
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    mu_sq = 0.0 if mu is None else abs(mu) ** 2
    return math.sqrt(1.0 + float(np.sum(xi_arr * xi_arr)) + mu_sq)


@dataclass(frozen=True)
class TangentialGrid:
    """Uniform periodic grid on a torus of side ``L`` in ``dim`` axes.

    Frequencies are ``2*pi*k/L`` for ``k in {-N/2, ..., N/2 - 1}`` per axis,
    stored in FFT layout.  ``N`` must be a power of two.
    """

    dim: int
    N: int
    L: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.N < 2 or self.N & (self.N - 1) != 0:
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def cell(self) -> float:
        """Cell measure (L/N)^dim of one sample."""
        return (self.L / self.N) ** self.dim

    @property
    def nyquist(self) -> float:
        return math.pi * self.N / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    @cached_property
    def freqs_1d(self) -> np.ndarray:
        """Per-axis frequencies in FFT order."""
        k = np.fft.fftfreq(self.N, d=1.0 / self.N)
        return TWO_PI * k / self.L

    @cached_property
    def freq_vectors(self) -> np.ndarray:
        """Array of shape ``shape + (dim,)`` with the frequency vector at each mode."""
        axes = np.meshgrid(*([self.freqs_1d] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def freq_norm_sq(self) -> np.ndarray:
        return np.sum(self.freq_vectors**2, axis=-1)

    @cached_property
    def points_1d(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)


@dataclass(frozen=True)
class NormalGrid:
    """Graded grid ``0 = x_1 < ... < x_M <= X_max`` with trapezoid weights.

    Nodes follow ``x_j = X_max * (r^(j-1) - 1) / (r^(M-1) - 1)`` with ratio
    ``r > 1``, clustering toward the boundary.
    """

    M: int
    X_max: float = 16.0
    r: float = 1.05

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not self.r > 1:
            raise ValueError(f"grading ratio must exceed 1, got {self.r}")
        if not self.X_max > 0:
            raise ValueError("X_max must be positive")

    @cached_property
    def nodes(self) -> np.ndarray:
        j = np.arange(self.M)
        # expm1 keeps the small-node end accurate for r close to 1
        return self.X_max * np.expm1(j * math.log(self.r)) / math.expm1(
            (self.M - 1) * math.log(self.r)
        )

    @cached_property
    def weights(self) -> np.ndarray:
        x = self.nodes
        w = np.empty_like(x)
        w[0] = (x[1] - x[0]) / 2.0
        w[-1] = (x[-1] - x[-2]) / 2.0
        w[1:-1] = (x[2:] - x[:-2]) / 2.0
        return w

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """Trapezoid quadrature along ``axis`` (truncated at X_max)."""
        return np.sum(values * self.weights, axis=axis)


@dataclass(frozen=True)
class BoundaryField:
    """Complex samples of a boundary function on a TangentialGrid."""

    grid: TangentialGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=complex).reshape(self.grid.shape)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def zero(cls, grid: TangentialGrid) -> "BoundaryField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))


@dataclass(frozen=True)
class HalfSpaceField:
    """Complex samples on the product of a tangential and a normal grid.

    ``samples[..., j]`` is the tangential slice at normal node ``x_j``.
    """

    tangential: TangentialGrid
    normal: NormalGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        shape = self.tangential.shape + (self.normal.M,)
        arr = np.asarray(self.samples, dtype=complex).reshape(shape)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def zero(cls, tangential: TangentialGrid, normal: NormalGrid) -> "HalfSpaceField":
        return cls(tangential, normal, np.zeros(tangential.shape + (normal.M,), dtype=complex))

    def trace(self) -> BoundaryField:
        """Boundary trace (the slice at the node x_1 = 0)."""
        return BoundaryField(self.tangential, self.samples[..., 0].copy())


def make_grids(
    dim: int = 1,
    L: float = TWO_PI,
    N: int = 256,
    M: int = 256,
    X_max: float = 16.0,
    r: float = 1.05,
) -> tuple[TangentialGrid, NormalGrid]:
    """Construct the tangential/normal grid pair used throughout.

    Defaults match the desk-scale configuration: one tangential axis,
    256 modes on a box of side 2*pi, 256 graded normal nodes up to 16.
    """
    return TangentialGrid(dim, N, L), NormalGrid(M, X_max, r)
