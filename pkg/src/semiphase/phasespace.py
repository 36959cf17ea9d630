"""Discrete Wigner transform, Husimi smoothing, and phase-space densities.

The Wigner transform of a state on an N-point grid is built on the
doubled "half-step" lattice: psi is upsampled 2x spectrally so that
x +- z/2 lands on grid nodes by pure index arithmetic for correlation
offsets z = m*dx, m in [-N, N). No interpolation enters the kernel,
which keeps the x-marginal identity   dp * sum_p W(x, p) = |psi(x)|^2
exact to rounding. The momentum axis is the eps-scaled dual grid:

    p_l = l * dp,  dp = 2*pi*eps / (2*L),  l in [-N, N).

Two density representations coexist: grid functions (possibly signed,
for Wigner) and atomic measures (the weak-* limit objects). They only
meet inside the weak metric; atoms are never rasterized implicitly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.fft as sfft

from .errors import (ConfigurationError, NumericsError, RepresentationError,
                     ShapeMismatchError)
from .grids import PhaseGrid, PositionGrid, build_position_grid
from .quantum import DensityEnsemble, WaveFunction

__all__ = [
    "GridDensity",
    "AtomicMeasure",
    "PhaseSpaceDensity",
    "build_wigner_grid",
    "wigner",
    "wigner_ensemble",
    "husimi",
    "sup_norm",
    "l2_norm",
    "marginals",
    "restrict_p",
    "upsample2",
]


@dataclass(frozen=True)
class GridDensity:
    """Real function on a PhaseGrid; signed unless tagged 'husimi'."""

    values: np.ndarray = field(repr=False, compare=False)
    grid: PhaseGrid
    tag: str = "generic"
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ShapeMismatchError(
                f"density shape {v.shape} != grid shape {self.grid.shape}")
        if self.tag == "husimi" and float(v.min()) < -1e-9:
            raise NumericsError(
                f"husimi-tagged density has min {v.min():.3e} < -1e-9")
        object.__setattr__(self, "values", v)

    @property
    def total_mass(self) -> float:
        return float(self.grid.cell_area * self.values.sum())


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite positive combination of Dirac masses on phase space."""

    atoms: tuple  # of (mass, x, p)

    def __post_init__(self):
        atoms = tuple((float(m), float(x), float(p)) for m, x, p in self.atoms)
        if not atoms:
            raise ConfigurationError("atomic measure needs at least one atom")
        if any(m <= 0 for m, _, _ in atoms):
            raise ConfigurationError("atom masses must be positive")
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_mass(self) -> float:
        return float(sum(m for m, _, _ in self.atoms))

    def to_json(self) -> str:
        return json.dumps(
            {"atoms": [{"mass": m, "x": x, "p": p} for m, x, p in self.atoms]},
            sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AtomicMeasure":
        data = json.loads(text)
        return cls(tuple((a["mass"], a["x"], a["p"]) for a in data["atoms"]))


PhaseSpaceDensity = Union[GridDensity, AtomicMeasure]


def build_wigner_grid(x_grid: PositionGrid, eps: float) -> PhaseGrid:
    """Phase grid whose p-axis is the eps-scaled dual of the doubled x-grid."""
    if eps <= 0:
        raise ConfigurationError(f"eps must be > 0, got {eps}")
    n = x_grid.n_points
    dp = 2.0 * np.pi * eps / (2.0 * x_grid.length)
    p_grid = build_position_grid(2 * n, -n * dp, n * dp)
    return PhaseGrid(x_grid=x_grid, p_grid=p_grid)


def upsample2(psi: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation onto the half-step lattice (2N points).

    The Nyquist bin is split evenly between +-N/2 frequencies so real
    inputs stay real and the refined samples interpolate the originals.
    """
    n = psi.size
    spec = sfft.fft(psi)
    h = n // 2
    fine = np.zeros(2 * n, dtype=np.complex128)
    fine[:h] = spec[:h]
    fine[h] = 0.5 * spec[h]
    fine[2 * n - h] = 0.5 * spec[h]
    fine[2 * n - h + 1:] = spec[h + 1:]
    return 2.0 * sfft.ifft(fine)


def _support_checks(state: WaveFunction) -> tuple:
    grid = state.grid
    prob = state.density()
    edge = grid.dx * float(prob[:3].sum() + prob[-3:].sum())
    warns = ()
    if edge > 1e-10:
        warns = (f"boundary wrap: edge probability {edge:.2e}",)
    spec = np.abs(sfft.fft(state.values)) ** 2
    total = spec.sum()
    hot = spec[np.abs(grid.k) >= 0.875 * np.abs(grid.k).max()].sum()
    if total > 0 and hot / total > 1e-10:
        raise ConfigurationError(
            "momentum window fails to contain the state (spectral mass "
            f"{hot / total:.2e} near Nyquist); refine the grid or increase eps")
    return warns


def _wigner_values(psi: np.ndarray, dx: float, eps: float) -> np.ndarray:
    n = psi.size
    fine = upsample2(psi)
    pad = np.zeros(4 * n, dtype=np.complex128)
    pad[n:3 * n] = fine
    i = np.arange(n)[:, None]
    m = np.arange(-n, n)[None, :]
    corr = np.conj(pad[n + 2 * i + m]) * pad[n + 2 * i - m]
    corr[:, 0] = 0.0  # unpaired Nyquist offset m = -N; drop for exact realness
    w = sfft.ifft(sfft.ifftshift(corr, axes=1), axis=1)
    w = sfft.fftshift(w, axes=1) * (dx * 2 * n / (2.0 * np.pi * eps))
    imag_max = float(np.abs(w.imag).max())
    if imag_max > 1e-9:
        raise NumericsError(f"Wigner transform not real: max imag {imag_max:.3e}")
    return w.real


def wigner(state: WaveFunction) -> GridDensity:
    """Wigner transform of a pure state on the eps-scaled phase grid."""
    warns = _support_checks(state)
    grid = build_wigner_grid(state.grid, state.eps)
    values = _wigner_values(state.values, state.grid.dx, state.eps)
    return GridDensity(values, grid, tag="wigner",
                       warnings=state.warnings + warns)


def wigner_ensemble(ens: DensityEnsemble) -> GridDensity:
    """Weight-convex combination of member Wigner transforms."""
    acc = None
    warns = ()
    for weight, member in ens.members:
        gd = wigner(member)
        warns += gd.warnings
        acc = weight * gd.values if acc is None else acc + weight * gd.values
    grid = build_wigner_grid(ens.grid, ens.eps)
    return GridDensity(acc, grid, tag="wigner", warnings=warns)


def husimi(density: GridDensity, eps: float) -> GridDensity:
    """Heat semigroup at time eps on phase space (variance 2*eps per axis)."""
    if not isinstance(density, GridDensity):
        raise RepresentationError("husimi needs a grid density")
    if eps <= 0:
        raise ConfigurationError(f"eps must be > 0, got {eps}")
    gx, gp = density.grid.x_grid, density.grid.p_grid
    mult = (np.exp(-eps * gx.k ** 2)[:, None]
            * np.exp(-eps * gp.k ** 2)[None, :])
    smoothed = sfft.ifft2(sfft.fft2(density.values) * mult).real
    return GridDensity(smoothed, density.grid, tag="husimi",
                       warnings=density.warnings)


def _require_grid(density, op: str) -> GridDensity:
    if not isinstance(density, GridDensity):
        raise RepresentationError(
            f"{op} is undefined for atomic measures (no density)")
    return density


def sup_norm(density: PhaseSpaceDensity) -> float:
    density = _require_grid(density, "sup_norm")
    return float(np.abs(density.values).max())


def l2_norm(density: PhaseSpaceDensity) -> float:
    density = _require_grid(density, "l2_norm")
    return float(np.sqrt(density.grid.cell_area * np.sum(density.values ** 2)))


def marginals(density: PhaseSpaceDensity) -> tuple[np.ndarray, np.ndarray]:
    """(x-marginal, p-marginal): axis sums scaled by the complementary spacing."""
    density = _require_grid(density, "marginals")
    dxm = density.values.sum(axis=1) * density.grid.p_grid.dx
    dpm = density.values.sum(axis=0) * density.grid.x_grid.dx
    return dxm, dpm


def restrict_p(density: GridDensity, p_max: float) -> GridDensity:
    """Symmetric power-of-two momentum window |p| <= ~p_max (for L2 comparisons).

    The full Wigner p-axis scales with eps, so fixed-window comparisons
    across an eps ladder need a common restriction.
    """
    density = _require_grid(density, "restrict_p")
    pg = density.grid.p_grid
    dp = pg.dx
    half = int(2 ** np.floor(np.log2(max(p_max / dp, 4.0))))
    n = pg.n_points
    izero = int(np.argmin(np.abs(pg.nodes)))
    lo, hi = izero - half, izero + half
    if lo < 0 or hi > n:
        raise ConfigurationError(
            f"p-window {p_max} exceeds the grid extent {pg.x_max}")
    sub = build_position_grid(2 * half, -half * dp, half * dp)
    return GridDensity(density.values[:, lo:hi],
                       PhaseGrid(density.grid.x_grid, sub),
                       tag=density.tag, warnings=density.warnings)
