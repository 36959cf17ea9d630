"""Classical transport: bicharacteristic branches, symplectic integration,
semi-Lagrangian Liouville stepping, and particle-cloud pushforward.

The rough potential -|x|^{1+theta} admits multiple trajectories out of
the unstable origin: for each sign there is a closed-form escape

    X(t) = +- c0 (t - t0)^nu,   P(t) = +- c0 nu (t - t0)^{nu-1}

with nu = 2/(1-theta), c0 = ((1-theta)^2/2)^{1/(1-theta)}, for every
delay t0 >= 0, plus the branch that rests at the origin forever. All of
them share the initial datum (0, 0); the delayed family is the failure
of uniqueness that the transport experiments probe.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, NumericsError, RepresentationError
from .grids import PositionGrid, build_position_grid
from .phasespace import GridDensity
from .potentials import PotentialSpec, evaluate, gradient_at, mollify

__all__ = [
    "TrajectoryBranch",
    "ParticleCloud",
    "SampledPath",
    "branch_family",
    "branch_constants",
    "branch_ode_residual",
    "integrate_hamiltonian",
    "liouville_semi_lagrangian",
    "transport_particles",
]


def branch_constants(theta: float) -> tuple[float, float]:
    """(nu, c0) for the escape branches of -|x|^{1+theta}."""
    if not (0.0 < theta < 1.0):
        raise ConfigurationError(f"theta must be in (0,1), got {theta}")
    nu = 2.0 / (1.0 - theta)
    c0 = ((1.0 - theta) ** 2 / 2.0) ** (1.0 / (1.0 - theta))
    return nu, c0


@dataclass(frozen=True)
class TrajectoryBranch:
    """One closed-form bicharacteristic out of (0, 0).

    sign is +1, -1 or 0; sign 0 is the branch that never leaves the
    origin (t0 is irrelevant for it but kept for uniformity).
    """

    sign: int
    t0: float
    theta: float
    nu: float = field(init=False)
    c0: float = field(init=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ConfigurationError(f"sign must be -1, 0 or +1, got {self.sign}")
        if self.t0 < 0:
            raise ConfigurationError(f"t0 must be >= 0, got {self.t0}")
        nu, c0 = branch_constants(self.theta)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "c0", c0)

    def X(self, t):
        t = np.asarray(t, dtype=np.float64)
        s = np.maximum(t - self.t0, 0.0)
        return self.sign * self.c0 * s ** self.nu

    def P(self, t):
        t = np.asarray(t, dtype=np.float64)
        s = np.maximum(t - self.t0, 0.0)
        return self.sign * self.c0 * self.nu * s ** (self.nu - 1.0)

    def to_json(self) -> str:
        return json.dumps({"sign": self.sign, "t0": self.t0, "theta": self.theta,
                           "c0": self.c0, "nu": self.nu}, sort_keys=True)


def branch_family(theta: float, signs_and_delays) -> list[TrajectoryBranch]:
    """Branches for each (sign, t0) pair; sign accepts +-1/0 or plus/minus/rest."""
    names = {"plus": 1, "minus": -1, "rest": 0}
    out = []
    for sign, t0 in signs_and_delays:
        if isinstance(sign, str):
            if sign not in names:
                raise ConfigurationError(f"unknown branch sign {sign!r}")
            sign = names[sign]
        out.append(TrajectoryBranch(sign=int(sign), t0=float(t0), theta=theta))
    return out


def branch_ode_residual(branch: TrajectoryBranch, t, h: float = 1e-6) -> tuple[float, float]:
    """Max residuals of (X' - P, P' + V'(X)) by central differences.

    Scaled by max(1, |X|, |P|) so the number reads as a relative error
    on escape branches while staying meaningful on the rest branch.
    """
    t = np.asarray(t, dtype=np.float64)
    xdot = (branch.X(t + h) - branch.X(t - h)) / (2.0 * h)
    pdot = (branch.P(t + h) - branch.P(t - h)) / (2.0 * h)
    x = branch.X(t)
    force = (1.0 + branch.theta) * np.abs(x) ** branch.theta * np.sign(x)
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(branch.P(t))))
    r1 = float(np.max(np.abs(xdot - branch.P(t)) / scale))
    r2 = float(np.max(np.abs(pdot - force) / scale))
    return r1, r2


@dataclass(frozen=True)
class ParticleCloud:
    """Weighted phase-space points; the atomic carrier of transported mass."""

    masses: np.ndarray = field(repr=False, compare=False)
    xs: np.ndarray = field(repr=False, compare=False)
    ps: np.ndarray = field(repr=False, compare=False)
    time: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        x = np.asarray(self.xs, dtype=np.float64)
        p = np.asarray(self.ps, dtype=np.float64)
        if not (m.shape == x.shape == p.shape) or m.ndim != 1 or m.size == 0:
            raise ConfigurationError("masses, xs, ps must be equal-length 1-D arrays")
        if np.any(m <= 0):
            raise ConfigurationError("particle masses must be positive")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "xs", x)
        object.__setattr__(self, "ps", p)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def __len__(self) -> int:
        return self.masses.size

    def to_csv_rows(self):
        for m, x, p in zip(self.masses, self.xs, self.ps):
            yield (m, x, p)


@dataclass(frozen=True)
class SampledPath:
    """Störmer-Verlet trajectory samples."""

    ts: np.ndarray = field(repr=False, compare=False)
    xs: np.ndarray = field(repr=False, compare=False)
    ps: np.ndarray = field(repr=False, compare=False)

    def energy(self, pot: PotentialSpec) -> np.ndarray:
        from .potentials import evaluate_at
        return 0.5 * self.ps ** 2 + evaluate_at(pot, self.xs)


def _force_function(pot: PotentialSpec, eps_mollify: float,
                    field_grid: PositionGrid | None):
    """-V'(x) as a vectorized callable, mollified spectrally when asked.

    Mollified forces are sampled on field_grid (default [-12, 12) with
    8192 nodes) and interpolated by a periodic cubic spline; raw forces
    use the closed forms, with V'(0) = 0 on the rough kind.
    """
    if eps_mollify < 0:
        raise ConfigurationError(f"eps_mollify must be >= 0, got {eps_mollify}")
    if eps_mollify == 0.0:
        return lambda x: -gradient_at(pot, x)
    if field_grid is None:
        field_grid = build_position_grid(8192, -12.0, 12.0)
    vt = mollify(pot, eps_mollify, field_grid)
    import scipy.fft as sfft
    dvt = np.real(sfft.ifft(1j * field_grid.k * sfft.fft(vt)))
    spline = CubicSpline(
        np.append(field_grid.nodes, field_grid.x_max),
        np.append(dvt, dvt[0]), bc_type="periodic")
    lo, hi = field_grid.x_min, field_grid.x_max
    length = hi - lo

    def force(x):
        xw = lo + np.mod(np.asarray(x, dtype=np.float64) - lo, length)
        return -spline(xw)

    return force


def _verlet(xs, ps, force, dt: float, n_steps: int, record=None):
    x = np.array(xs, dtype=np.float64, copy=True)
    p = np.array(ps, dtype=np.float64, copy=True)
    f = force(x)
    for j in range(n_steps):
        p_half = p + 0.5 * dt * f
        x = x + dt * p_half
        f = force(x)
        p = p_half + 0.5 * dt * f
        if record is not None:
            record(j, x, p)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
        raise NumericsError("trajectory integration produced non-finite values")
    return x, p


def _scalar_force(pot: PotentialSpec):
    # plain-float force for single-trajectory integration; the numpy
    # route costs ~10x per step at size 1
    if pot.kind == "harmonic":
        return lambda x: -x
    if pot.kind == "rough_power":
        th, r, q = pot.theta, pot.core_radius, pot.tail_coeff
        cr = (1.0 + th) * r ** th

        def force(x):
            ax = abs(x)
            if ax == 0.0:
                return 0.0
            sg = 1.0 if x > 0 else -1.0
            if ax <= r:
                return (1.0 + th) * ax ** th * sg
            return (cr - 4.0 * q * (ax - r) ** 3) * sg

        return force
    return None


def integrate_hamiltonian(x0: float, p0: float, pot: PotentialSpec,
                          dt: float, t_final: float) -> SampledPath:
    """Störmer-Verlet path from (x0, p0) under the raw field, all steps kept."""
    if dt <= 0 or t_final <= 0:
        raise ConfigurationError("dt and t_final must be > 0")
    n_steps = max(1, round(t_final / dt))
    h = t_final / n_steps
    ts = h * np.arange(n_steps + 1)
    xs = np.empty(n_steps + 1)
    ps = np.empty(n_steps + 1)
    xs[0], ps[0] = x0, p0

    sforce = _scalar_force(pot)
    if sforce is not None:
        x, p = float(x0), float(p0)
        try:
            f = sforce(x)
            for j in range(n_steps):
                p_half = p + 0.5 * h * f
                x = x + h * p_half
                f = sforce(x)
                p = p_half + 0.5 * h * f
                xs[j + 1], ps[j + 1] = x, p
        except OverflowError as exc:
            # plain-float powers raise instead of returning inf
            raise NumericsError(
                "trajectory integration produced non-finite values") from exc
        if not (np.isfinite(x) and np.isfinite(p)):
            raise NumericsError("trajectory integration produced non-finite values")
        return SampledPath(ts=ts, xs=xs, ps=ps)

    def record(j, x, p):
        xs[j + 1], ps[j + 1] = x[0], p[0]

    force = _force_function(pot, 0.0, None)
    _verlet(np.array([x0]), np.array([p0]), force, h, n_steps, record)
    return SampledPath(ts=ts, xs=xs, ps=ps)


def transport_particles(cloud: ParticleCloud, pot: PotentialSpec,
                        eps_mollify: float, dt: float, t_final: float,
                        field_grid: PositionGrid | None = None) -> ParticleCloud:
    """Push every particle through the (possibly mollified) field.

    t_final may be negative (backward transport); dt is a positive step
    magnitude.
    """
    if dt <= 0:
        raise ConfigurationError("dt must be > 0")
    if t_final == 0:
        return cloud
    n_steps = max(1, round(abs(t_final) / dt))
    h = t_final / n_steps
    force = _force_function(pot, eps_mollify, field_grid)
    x, p = _verlet(cloud.xs, cloud.ps, force, h, n_steps)
    return ParticleCloud(masses=cloud.masses.copy(), xs=x, ps=p,
                         time=cloud.time + t_final)


# ---------------------------------------------------------------------------
# semi-Lagrangian Liouville solver


def _cubic_weights(s: np.ndarray) -> tuple[np.ndarray, ...]:
    # Catmull-Rom weights for fractional offset s in [0, 1)
    s2 = s * s
    s3 = s2 * s
    w0 = -0.5 * s3 + s2 - 0.5 * s
    w1 = 1.5 * s3 - 2.5 * s2 + 1.0
    w2 = -1.5 * s3 + 2.0 * s2 + 0.5 * s
    w3 = 0.5 * s3 - 0.5 * s2
    return w0, w1, w2, w3


class _FootInterpolator:
    """Precomputed clamped-bicubic gather at fixed foot points.

    The advecting field is autonomous, so the backward feet are the same
    every step; the 4x4 stencil indices and weights are built once.
    x is periodic, p is zero-padded (mass that leaves the p-window is
    lost, which the mass-drift diagnostic will show).
    """

    def __init__(self, xf, pf, x_grid: PositionGrid, p_grid: PositionGrid):
        nx, npts = x_grid.n_points, p_grid.n_points
        gx = (xf - x_grid.x_min) / x_grid.dx
        gp = (pf - p_grid.x_min) / p_grid.dx
        ix = np.floor(gx).astype(np.int64)
        ip = np.floor(gp).astype(np.int64)
        self.sx = _cubic_weights(gx - ix)
        self.sp = _cubic_weights(gp - ip)
        self.ix = [(ix + a - 1) % nx for a in range(4)]
        # clip each stencil column into [-1, npts]; both ends alias the
        # sentinel zero columns of the padded array
        self.ip = [np.clip(ip + b - 1, -1, npts) for b in range(4)]
        self.npts = npts

    def apply(self, f: np.ndarray) -> np.ndarray:
        # pad two sentinel zero columns (index -1 and npts wrap onto them)
        fp = np.zeros((f.shape[0], self.npts + 2))
        fp[:, :-2] = f
        out = np.zeros_like(f)
        lo = np.full_like(f, np.inf)
        hi = np.full_like(f, -np.inf)
        for a in range(4):
            row = self.ix[a]
            wa = self.sx[a]
            for b in range(4):
                val = fp[row, self.ip[b]]
                out += wa * self.sp[b] * val
                np.minimum(lo, val, out=lo)
                np.maximum(hi, val, out=hi)
        # clamp to the stencil range: exact L-infinity non-expansion
        return np.clip(out, lo, hi)


def _trace_feet(x_grid: PositionGrid, p_grid: PositionGrid, force, dt: float):
    # one backward RK4 step of (x' = p, p' = -V'(x)) from every node
    X = np.broadcast_to(x_grid.nodes[:, None],
                        (x_grid.n_points, p_grid.n_points)).copy()
    P = np.broadcast_to(p_grid.nodes[None, :],
                        (x_grid.n_points, p_grid.n_points)).copy()
    h = -dt

    def rhs(x, p):
        return p, force(x)

    k1x, k1p = rhs(X, P)
    k2x, k2p = rhs(X + 0.5 * h * k1x, P + 0.5 * h * k1p)
    k3x, k3p = rhs(X + 0.5 * h * k2x, P + 0.5 * h * k2p)
    k4x, k4p = rhs(X + h * k3x, P + h * k3p)
    xf = X + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
    pf = P + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    return xf, pf


def liouville_semi_lagrangian(rho0: GridDensity, pot: PotentialSpec,
                              eps_mollify: float, dt: float,
                              t_final: float) -> GridDensity:
    """Solve  d rho/dt + p dx rho - V~'(x) dp rho = 0  by backward tracing.

    Foot points come from one RK4 step of the reversed characteristic
    flow; values are gathered by bicubic interpolation clamped to the
    stencil range, so sup/inf bounds never expand and nonnegative data
    stays nonnegative.
    """
    if not isinstance(rho0, GridDensity):
        raise RepresentationError("liouville_semi_lagrangian needs a grid density")
    if dt <= 0 or t_final < 0:
        raise ConfigurationError("dt must be > 0 and t_final >= 0")
    if t_final == 0:
        return rho0
    x_grid, p_grid = rho0.grid.x_grid, rho0.grid.p_grid
    n_steps = max(1, round(t_final / dt))
    h = t_final / n_steps

    force = _force_function(pot, eps_mollify, x_grid)
    warns = rho0.warnings
    pmax = float(np.max(np.abs(p_grid.nodes)))
    fmax = float(np.max(np.abs(force(x_grid.nodes))))
    if pmax * h / x_grid.dx > 1.0 or fmax * h / p_grid.dx > 1.0:
        warns = warns + (
            f"semi-Lagrangian feet cross more than one cell per step "
            f"(x: {pmax * h / x_grid.dx:.2f}, p: {fmax * h / p_grid.dx:.2f} cells)",)

    xf, pf = _trace_feet(x_grid, p_grid, force, h)
    interp = _FootInterpolator(xf, pf, x_grid, p_grid)

    f = rho0.values.copy()
    for _ in range(n_steps):
        f = interp.apply(f)
    return GridDensity(f, rho0.grid, tag=rho0.tag, warnings=warns)
