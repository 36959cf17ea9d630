"""Uniform periodic grids and the discrete Fourier contract.

Everything downstream (propagation, phase-space transforms, transport)
lives on these grids, so the conventions are pinned here once:

* nodes x_i = x_min + i*dx, i = 0..n-1, periodic wrap at x_max;
* dual frequencies in standard DFT ordering, k_j = 2*pi*fftfreq(n, dx);
* DFT pair is unitary (norm="ortho") so Parseval holds with no factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ShapeMismatchError

__all__ = [
    "PositionGrid",
    "PhaseGrid",
    "build_position_grid",
    "quadrature",
    "dft_forward",
    "dft_inverse",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PositionGrid:
    """Uniform periodic grid on [x_min, x_max) with 2^k nodes.

    Also used for the momentum axis of a PhaseGrid, in which case the
    "positions" are momenta; the arithmetic is identical.
    """

    n_points: int
    x_min: float
    x_max: float
    dx: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    k: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)):
            raise ConfigurationError(f"n_points must be an integer, got {self.n_points!r}")
        if self.n_points < 8 or not _is_power_of_two(int(self.n_points)):
            raise ConfigurationError(
                f"n_points must be a power of two >= 8, got {self.n_points}")
        if not (self.x_max > self.x_min):
            raise ConfigurationError(
                f"degenerate interval [{self.x_min}, {self.x_max}]")
        n = int(self.n_points)
        dx = (self.x_max - self.x_min) / n
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "nodes", self.x_min + dx * np.arange(n))
        object.__setattr__(self, "k", 2.0 * np.pi * sfft.fftfreq(n, d=dx))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def k_centered(self) -> np.ndarray:
        """Dual frequencies sorted ascending (fftshifted view)."""
        return np.fft.fftshift(self.k)

    def __len__(self) -> int:
        return self.n_points


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor grid on (x, p): a position axis and a momentum axis."""

    x_grid: PositionGrid
    p_grid: PositionGrid

    @property
    def cell_area(self) -> float:
        return self.x_grid.dx * self.p_grid.dx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_grid.n_points, self.p_grid.n_points)

    @property
    def x(self) -> np.ndarray:
        return self.x_grid.nodes

    @property
    def p(self) -> np.ndarray:
        return self.p_grid.nodes


def build_position_grid(n_points: int, x_min: float, x_max: float) -> PositionGrid:
    """Validated constructor for PositionGrid."""
    return PositionGrid(n_points, float(x_min), float(x_max))


def _check_length(c, grid: PositionGrid, what: str):
    c = np.asarray(c)
    if c.shape[-1] != grid.n_points:
        raise ShapeMismatchError(
            f"{what}: array length {c.shape[-1]} != grid size {grid.n_points}")
    return c


def quadrature(f, grid: PositionGrid) -> float:
    """Periodic rectangle rule, dx * sum(f). Exact for band-limited f."""
    f = _check_length(f, grid, "quadrature")
    return float(grid.dx * np.sum(f, axis=-1))


def dft_forward(c, grid: PositionGrid) -> np.ndarray:
    """Unitary DFT along the last axis; Parseval holds exactly."""
    c = _check_length(c, grid, "dft_forward")
    return sfft.fft(c, axis=-1, norm="ortho")


def dft_inverse(c, grid: PositionGrid) -> np.ndarray:
    """Inverse of dft_forward."""
    c = _check_length(c, grid, "dft_inverse")
    return sfft.ifft(c, axis=-1, norm="ortho")
