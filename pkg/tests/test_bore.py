"""Tests of the two-layer bore problem in streamline coordinates."""

import numpy as np
import pytest

from cylfronts.bore import (
    BoreParams,
    BoreProblem,
    BoreState,
    bore_diagnostics,
    bore_residual,
    bore_residual_stacked,
    conjugate_state_bore,
    flow_force_bore,
    flow_force_bore_all,
    froude_squared,
    kappa1_bore,
    lambda_star,
    seed_bore,
)
from cylfronts.errors import ConfigurationError, EllipticityError, SeedRangeError
from cylfronts.grid import Field, build_grid


def test_conjugate_flow_constants():
    assert lambda_star(1.0, 0.25) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert froude_squared(1.0, 0.25) == pytest.approx(1.0 / 3.0, abs=1e-15)
    # invariance under a common density rescaling
    assert lambda_star(4.0, 1.0) == lambda_star(1.0, 0.25)
    assert froude_squared(4.0, 1.0) == froude_squared(1.0, 0.25)


def test_kappa1_values_and_invariance():
    assert kappa1_bore(1.0, 0.25) == pytest.approx(2.25, abs=1e-15)
    assert kappa1_bore(1.0, 1.0) == pytest.approx(2.0 * np.sqrt(3.0), abs=1e-14)
    assert kappa1_bore(4.0, 1.0) == pytest.approx(kappa1_bore(1.0, 0.25), abs=1e-14)


def test_params_validation():
    with pytest.raises(ConfigurationError):
        BoreParams(0.25, 1.0, 0.5)  # unstable stratification
    with pytest.raises(ConfigurationError):
        BoreParams(1.0, 0.25, 1.5)
    with pytest.raises(ConfigurationError):
        froude_squared(-1.0, 0.25)


@pytest.fixture(scope="module")
def small_grid():
    return build_grid(6.0, 21, 11, "two-layer")


def test_rest_state_is_exact(small_grid):
    g = small_grid
    for lam in (0.3, 0.5, 2.0 / 3.0):
        s = BoreState(Field(g, np.zeros((g.nx, g.n_transverse))), BoreParams(1.0, 0.25, lam))
        interior, interface, continuity = bore_residual(s, g)
        assert np.max(np.abs(interior.values)) == 0.0
        assert np.max(np.abs(interface)) <= 1e-14
        assert np.max(np.abs(continuity)) == 0.0


def test_conjugate_state_is_exact(small_grid):
    g = small_grid
    for rho1, rho2, lam in ((1.0, 0.25, 0.5), (1.0, 0.25, 0.6), (2.0, 0.5, 0.55)):
        params = BoreParams(rho1, rho2, lam)
        prof = conjugate_state_bore(lam, params, g)
        u = np.tile(prof, (g.nx, 1))
        r = bore_residual_stacked(BoreState(Field(g, u), params), g)
        assert np.max(np.abs(r)) <= 1e-12


def test_flow_force_closed_form(small_grid):
    g = small_grid
    params = BoreParams(1.0, 0.25, 0.5)
    u0 = np.zeros((g.nx, g.n_transverse))
    S0 = flow_force_bore_all(BoreState(Field(g, u0), params), g)
    assert np.max(np.abs(S0 - 0.90625)) <= g.dy**2
    assert np.max(S0) - np.min(S0) <= 1e-14
    prof = conjugate_state_bore(0.5, params, g)
    SU = flow_force_bore_all(BoreState(Field(g, np.tile(prof, (g.nx, 1))), params), g)
    assert np.max(np.abs(SU - S0)) <= 1e-12
    assert flow_force_bore(BoreState(Field(g, u0), params), g, 2) == pytest.approx(S0[2])


def test_seed_shape_and_range():
    g = build_grid(300.0, 41, 11, "two-layer")
    s = seed_bore(0.02, g, 1.0, 0.25)
    assert s.params.lam == pytest.approx(2.0 / 3.0 + 0.02)
    # decreasing front: zero upstream, conjugate profile downstream
    assert np.max(np.abs(s.u.values[0])) <= 1e-8
    down = conjugate_state_bore(s.params.lam, s.params, g)
    assert np.max(np.abs(s.u.values[-1] - down)) <= 1e-8
    with pytest.raises(SeedRangeError):
        seed_bore(0.2, g, 1.0, 0.25)
    with pytest.raises(SeedRangeError):
        seed_bore(0.0, g, 1.0, 0.25)


def test_ellipticity_guard(small_grid):
    g = small_grid
    u = np.zeros((g.nx, g.n_transverse))
    # collapse the lower layer: u_p = -lam wipes out the height margin
    u[:, : g.ny] = -0.5 * (1.0 + g.y[: g.ny])
    s = BoreState(Field(g, u), BoreParams(1.0, 0.25, 0.5))
    with pytest.raises(EllipticityError):
        bore_residual_stacked(s, g)


def test_diagnostics_at_rest(small_grid):
    g = small_grid
    d = bore_diagnostics(
        BoreState(Field(g, np.zeros((g.nx, g.n_transverse))), BoreParams(1.0, 0.25, 0.4)), g
    )
    assert d.ellipticity_margin == pytest.approx(0.4)
    assert d.stagnation_indicator == pytest.approx(1.0)
    assert d.interface_max_slope == 0.0
    assert d.wall_gap == pytest.approx(0.4)


def test_jacobian_matches_directional_differences():
    g = build_grid(40.0, 41, 11, "two-layer")
    prob = BoreProblem(g, 1.0, 0.25)
    s = seed_bore(0.04, g, 1.0, 0.25)
    u, lam = s.u.values, s.params.lam
    rng = np.random.default_rng(5)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    J, dlam = prob.jacobian(u, lam)
    h = 1e-6
    for _ in range(5):
        v = np.sin(rng.uniform(0.2, 1.0) * X) * np.cos(rng.uniform(0.2, 3.0) * Y)
        v /= np.linalg.norm(v)
        fd = (
            prob.residual_vector(u + h * v, lam) - prob.residual_vector(u - h * v, lam)
        ) / (2 * h)
        an = J @ v.reshape(-1)
        assert np.linalg.norm(fd - an) / (1 + np.linalg.norm(an)) <= 1e-6
    fdl = (
        prob.residual_vector(u, lam + h) - prob.residual_vector(u, lam - h)
    ) / (2 * h)
    assert np.linalg.norm(fdl - dlam) / (1 + np.linalg.norm(dlam)) <= 1e-6


def test_xindependent_residual(small_grid):
    g = small_grid
    prob = BoreProblem(g, 1.0, 0.25)
    lam = 0.55
    assert prob.xindependent_residual(np.zeros(g.n_transverse), lam) <= 1e-13
    conj = prob.downstream_profile(lam)
    assert prob.xindependent_residual(conj, lam) <= 1e-12
    assert prob.xindependent_residual(0.5 * conj, lam) > 1e-5


def test_admissibility(small_grid):
    g = small_grid
    prob = BoreProblem(g, 1.0, 0.25)
    assert prob.admissible(np.zeros((g.nx, g.n_transverse)), 0.5)
    assert not prob.admissible(np.zeros((g.nx, g.n_transverse)), 1.5)
    u = np.zeros((g.nx, g.n_transverse))
    u[:, : g.ny] = -0.499 * (1.0 + g.y[: g.ny])
    assert not prob.admissible(u, 0.5)  # margin below the guard delta
