"""Wigner/Husimi transforms: closed-form Gaussians, symmetries, bounds."""

import numpy as np
import pytest

from semiphase import (
    ConfigurationError,
    DensityEnsemble,
    GridDensity,
    WaveFunction,
    build_position_grid,
    coherent_state,
)
from semiphase.phasespace import (
    build_wigner_grid,
    husimi,
    l2_norm,
    marginals,
    restrict_p,
    sup_norm,
    upsample2,
    wigner,
    wigner_ensemble,
)


@pytest.fixture(scope="module")
def grid():
    return build_position_grid(512, -8.0, 8.0)


def _gauss2(pg, x0, p0, var):
    X = pg.x[:, None]
    P = pg.p[None, :]
    return np.exp(-((X - x0) ** 2 + (P - p0) ** 2) / (2 * var)) / (2 * np.pi * var)


# ----------------------------------------------------------------- wigner


def test_wigner_coherent_closed_form(grid):
    eps, x0, p0 = 0.05, 0.7, -0.4
    W = wigner(coherent_state(x0, p0, eps, grid))
    expect = _gauss2(W.grid, x0, p0, eps / 2.0)  # (pi eps)^{-1} Gaussian
    assert np.max(np.abs(W.values - expect)) < 1e-10 / eps
    assert W.total_mass == pytest.approx(1.0, abs=1e-8)


def test_wigner_position_reflection(grid):
    eps = 0.05
    psi = coherent_state(0.9, 0.6, eps, grid)
    refl = WaveFunction(values=psi.values[::-1].copy(), eps=eps,
                        grid=grid)  # x -> -x up to one-cell offset
    W = wigner(psi)
    Wr = wigner(refl)
    # compare at mirrored centers: argmax positions negate
    ix, ip = np.unravel_index(np.argmax(W.values), W.values.shape)
    jx, jp = np.unravel_index(np.argmax(Wr.values), Wr.values.shape)
    assert abs(W.grid.x[ix] + Wr.grid.x[jx]) <= 2 * grid.dx
    assert abs(W.grid.p[ip] + Wr.grid.p[jp]) <= 2 * W.grid.p_grid.dx


def test_wigner_cat_interference(grid):
    eps, a = 0.05, 1.0
    plus = coherent_state(-a, 0.0, eps, grid)
    minus = coherent_state(a, 0.0, eps, grid)
    cat = WaveFunction.normalized(plus.values + minus.values, eps, grid)
    W = wigner(cat)
    mid = np.argmin(np.abs(W.grid.x))
    fringe = W.values[mid, :]
    assert fringe.min() < -0.1 * fringe.max()  # genuinely negative fringes
    # fringe oscillation in p has frequency 2a/eps: zeros spaced pi*eps/(2a)
    p = W.grid.p
    expect = np.cos(2.0 * a * p / eps)
    corr = np.corrcoef(fringe, expect * np.exp(-p**2 / eps))[0, 1]
    assert corr > 0.99


def test_wigner_mass_and_marginal_corpus(corpus):
    for label, psi in corpus:
        W = wigner(psi)
        assert W.total_mass == pytest.approx(1.0, abs=1e-8), label
        xm, _ = marginals(W)
        err = float(np.sum(np.abs(xm - psi.density())) * psi.grid.dx)
        assert err < 1e-8, label


def test_wigner_momentum_marginal_gaussian(grid):
    eps, p0 = 0.1, 0.5
    W = wigner(coherent_state(0.0, p0, eps, grid))
    _, pm = marginals(W)
    p = W.grid.p
    expect = np.exp(-((p - p0) ** 2) / eps) / np.sqrt(np.pi * eps)
    assert float(np.sum(np.abs(pm - expect)) * W.grid.p_grid.dx) < 1e-8


def test_wigner_l2_norm_coherent(grid):
    for eps in (0.05, 0.1):
        W = wigner(coherent_state(0.3, 0.2, eps, grid))
        assert l2_norm(W) ** 2 == pytest.approx(1.0 / (2 * np.pi * eps), rel=1e-8)


def test_wigner_ensemble_convex(grid):
    eps = 0.05
    a = coherent_state(-1.0, 0.0, eps, grid)
    b = coherent_state(1.0, 0.3, eps, grid)
    ens = DensityEnsemble(members=((0.25, a), (0.75, b)), eps=eps)
    W = wigner_ensemble(ens)
    expect = 0.25 * wigner(a).values + 0.75 * wigner(b).values
    assert np.max(np.abs(W.values - expect)) < 1e-12 / eps
    assert W.total_mass == pytest.approx(1.0, abs=1e-8)


# ----------------------------------------------------------------- husimi


def test_husimi_coherent_sup(grid):
    # smoothing at time eps: variance eps/2 + 2 eps per axis, sup = 1/(5 pi eps)
    for eps in (0.05, 0.1, 0.2):
        W = wigner(coherent_state(0.5, 0.0, eps, grid))
        H = husimi(W, eps)
        assert sup_norm(H) * eps == pytest.approx(1.0 / (5.0 * np.pi), rel=1e-4)


def test_husimi_coherent_closed_form(grid):
    eps = 0.1
    W = wigner(coherent_state(-0.3, 0.4, eps, grid))
    H = husimi(W, eps)
    expect = _gauss2(W.grid, -0.3, 0.4, 2.5 * eps)
    assert np.max(np.abs(H.values - expect)) < 1e-8 / eps


def test_husimi_positivity_and_bound_corpus(corpus):
    for label, psi in corpus:
        H = husimi(wigner(psi), psi.eps)
        assert H.values.min() >= -1e-9, label
        assert sup_norm(H) < 1.0 / psi.eps, label  # strict


def test_husimi_cat_fringe_suppression(grid):
    eps, a = 0.05, 1.0
    plus = coherent_state(-a, 0.0, eps, grid)
    minus = coherent_state(a, 0.0, eps, grid)
    cat = WaveFunction.normalized(plus.values + minus.values, eps, grid)
    W = wigner(cat)
    mid = np.argmin(np.abs(W.grid.x))
    # strong fringes before smoothing, O(1/(pi eps)) in magnitude
    assert sup_norm(W) > 1.0 and W.values[mid, :].min() < -1.0
    # heat at time eps damps the eta = 2a/eps fringe by exp(-4a^2/eps);
    # the cat husimi then agrees with the incoherent mixture's husimi
    Hcat = husimi(W, eps)
    mix = DensityEnsemble(members=((0.5, plus), (0.5, minus)), eps=eps)
    Hmix = husimi(wigner_ensemble(mix), eps)
    diff = float(np.max(np.abs(Hcat.values - Hmix.values)))
    assert diff < 1e-5 * float(Hcat.values.max())


def test_husimi_zero_density(grid):
    pg = build_wigner_grid(grid, 0.05)
    Z = GridDensity(values=np.zeros(pg.shape), grid=pg, tag="wigner")
    assert np.max(np.abs(husimi(Z, 0.05).values)) == 0.0


def test_husimi_mass_preserved(corpus):
    for label, psi in corpus[:6]:
        W = wigner(psi)
        assert husimi(W, psi.eps).total_mass == pytest.approx(W.total_mass, abs=1e-8), label


# ------------------------------------------------------------ grid duality


def test_build_wigner_grid_spacing():
    g = build_position_grid(256, -8.0, 8.0)  # x-extent 16
    pg = build_wigner_grid(g, 0.1)
    assert pg.p_grid.dx == pytest.approx(2.0 * np.pi * 0.1 / 32.0)
    assert pg.p_grid.n_points == 512
    # doubling eps doubles both the spacing and the window
    pg2 = build_wigner_grid(g, 0.2)
    assert pg2.p_grid.dx == pytest.approx(2 * pg.p_grid.dx)
    assert pg2.p_grid.x_max == pytest.approx(2 * pg.p_grid.x_max)


def test_build_wigner_grid_rejects_bad_eps():
    g = build_position_grid(64, -4.0, 4.0)
    with pytest.raises(ConfigurationError):
        build_wigner_grid(g, 0.0)


# --------------------------------------------------------------- utilities


def test_upsample2_interpolates(grid):
    psi = coherent_state(0.4, 0.3, 0.05, grid)
    fine = upsample2(psi.values)
    assert fine.size == 2 * grid.n_points
    assert np.max(np.abs(fine[::2] - psi.values)) < 1e-10
    # matches the analytic state sampled on the doubled grid
    g2 = build_position_grid(2 * grid.n_points, grid.x_min, grid.x_max)
    target = coherent_state(0.4, 0.3, 0.05, g2)
    assert np.max(np.abs(fine - target.values)) < 1e-9


def test_restrict_p_window(grid):
    eps = 0.05
    W = wigner(coherent_state(0.0, 0.0, eps, grid))
    R = restrict_p(W, 2.0)
    assert R.grid.p_grid.x_max <= W.grid.p_grid.x_max
    # all mass of this state lives well inside the window
    assert R.total_mass == pytest.approx(1.0, abs=1e-8)
    assert R.grid.p_grid.n_points & (R.grid.p_grid.n_points - 1) == 0
