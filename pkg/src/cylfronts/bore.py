"""Two-layer hydrodynamic bore in streamline (Dubreil-Jacotin) coordinates.

The unknown u(q, p) is the streamline deflection y - h p on the slit cylinder
(-L, L) x ((-1, 0) u (0, 1)), where h is the piecewise-constant upstream layer
thickness (h = lam below the interface, 1 - lam above).  The governing system
is the height equation in divergence form,

    ( -(1 + u_q^2) / (2 (h + u_p)^2) )_p + ( u_q / (h + u_p) )_q = 0

in each layer, a dynamic jump condition on the interface p = 0,

    -1/2 [[ rho h^2 (1 + u_q^2) / (h + u_p)^2 ]] - ([[rho]]/F^2) u
        + [[rho]]/2 = 0,

continuity of u across p = 0, and u = 0 on the walls p = +-1.  Jumps are
upper-layer value minus lower-layer value.  The interior scheme differences
half-point fluxes, so piecewise-linear states (the rest state and the unique
conjugate downstream profile) are exact discrete solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConfigurationError,
    EllipticityError,
    NumericError,
    SeedRangeError,
    ShapeError,
)
from .grid import Field, Grid, trapezoid_corrected


def froude_squared(rho1: float, rho2: float) -> float:
    """Froude number squared fixed by the conjugate-flow equations."""
    if rho1 <= 0 or rho2 <= 0:
        raise ConfigurationError("densities must be positive")
    s1, s2 = np.sqrt(rho1), np.sqrt(rho2)
    return float((s1 - s2) / (s1 + s2))


def lambda_star(rho1: float, rho2: float) -> float:
    """Unique downstream lower-layer thickness conjugate to the rest state."""
    if rho1 <= 0 or rho2 <= 0:
        raise ConfigurationError("densities must be positive")
    s1, s2 = np.sqrt(rho1), np.sqrt(rho2)
    return float(s1 / (s1 + s2))


def kappa1_bore(rho1: float, rho2: float) -> float:
    """Decay-rate constant of the small-amplitude bore.

    kappa1^2 = 3 (sqrt(rho1) + sqrt(rho2))^4
               / (4 rho1 (rho1 - sqrt(rho1 rho2) + rho2)).
    Invariant under common rescaling of the densities.
    """
    if rho1 <= 0 or rho2 <= 0:
        raise ConfigurationError("densities must be positive")
    s1, s2 = np.sqrt(rho1), np.sqrt(rho2)
    k2 = 3.0 * (s1 + s2) ** 4 / (4.0 * rho1 * (rho1 - s1 * s2 + rho2))
    return float(np.sqrt(k2))


@dataclass(frozen=True)
class BoreParams:
    """Densities (rho2 < rho1) and the upstream lower-layer thickness lam."""

    rho1: float
    rho2: float
    lam: float

    def __post_init__(self):
        if not 0 < self.rho2 < self.rho1:
            raise ConfigurationError("requires 0 < rho2 < rho1")
        if not 0.0 < self.lam < 1.0:
            raise ConfigurationError("lam must lie in (0, 1)")

    @property
    def froude_squared(self) -> float:
        return froude_squared(self.rho1, self.rho2)

    @property
    def lambda_star(self) -> float:
        return lambda_star(self.rho1, self.rho2)


@dataclass
class BoreState:
    u: Field
    params: BoreParams


@dataclass
class BoreDiagnostics:
    """Physical monitors evaluated on a bore state."""

    ellipticity_margin: float
    stagnation_indicator: float
    interface_max_slope: float
    wall_gap: float
    velocity_bound_check: float


def conjugate_state_bore(lam: float, params: BoreParams, grid: Grid) -> np.ndarray:
    """Downstream conjugate transverse profile (lam* - lam)(1 - |p|)."""
    ls = params.lambda_star
    return (ls - lam) * (1.0 - np.abs(grid.y))


def seed_bore(
    eps: float, grid: Grid, rho1: float, rho2: float, eps_seed_max: float = 0.05
) -> BoreState:
    """Leading-order small-amplitude bore with lam = lam* + eps.

    u = -(eps/2)(1 + tanh(kappa1 |eps| q))(1 - |p|); eps > 0 yields the
    strictly decreasing family, eps < 0 the increasing one.
    """
    if eps == 0.0 or abs(eps) > eps_seed_max:
        raise SeedRangeError(f"|eps| = {abs(eps)} outside (0, {eps_seed_max}]")
    ls = lambda_star(rho1, rho2)
    lam = ls + eps
    if not 0.0 < lam < 1.0:
        raise SeedRangeError(f"lam = lam* + eps = {lam} outside (0, 1)")
    k = kappa1_bore(rho1, rho2) * abs(eps)
    q = grid.x[:, None]
    shape = 1.0 - np.abs(grid.y)[None, :]
    u = -0.5 * eps * (1.0 + np.tanh(k * q)) * shape
    return BoreState(Field(grid, u), BoreParams(rho1, rho2, lam))


# ---------------------------------------------------------------------------
# sparse difference operators (grid-dependent, lam-independent)
# ---------------------------------------------------------------------------


def _d1_matrix(m: int, h: float) -> sp.csr_matrix:
    """Second-order first-derivative matrix on a uniform segment of m nodes."""
    rows, cols, vals = [], [], []
    for k in range(1, m - 1):
        rows += [k, k]
        cols += [k - 1, k + 1]
        vals += [-0.5 / h, 0.5 / h]
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [-1.5 / h, 2.0 / h, -0.5 / h]
    rows += [m - 1, m - 1, m - 1]
    cols += [m - 1, m - 2, m - 3]
    vals += [1.5 / h, -2.0 / h, 0.5 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def _half_diff_matrix(m: int, h: float) -> sp.csr_matrix:
    """(m-1) x m matrix of half-point differences (a[k+1] - a[k]) / h."""
    d = np.ones(m - 1) / h
    return sp.csr_matrix(
        sp.diags([-d, d], offsets=[0, 1], shape=(m - 1, m))
    )


def _half_avg_matrix(m: int) -> sp.csr_matrix:
    """(m-1) x m matrix of half-point averages."""
    d = 0.5 * np.ones(m - 1)
    return sp.csr_matrix(sp.diags([d, d], offsets=[0, 1], shape=(m - 1, m)))


def _scatter_p(ny: int, h: float) -> sp.csr_matrix:
    """ny x (ny-1) vertical-flux divergence (zero rows at layer edges)."""
    rows, cols, vals = [], [], []
    for j in range(1, ny - 1):
        rows += [j, j]
        cols += [j, j - 1]
        vals += [1.0 / h, -1.0 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(ny, ny - 1))


def _scatter_q(nx: int, h: float) -> sp.csr_matrix:
    """nx x (nx-1) horizontal-flux divergence, one-sided at the end columns."""
    rows, cols, vals = [], [], []
    for i in range(1, nx - 1):
        rows += [i, i]
        cols += [i, i - 1]
        vals += [1.0 / h, -1.0 / h]
    rows += [0, 0]
    cols += [1, 0]
    vals += [1.0 / h, -1.0 / h]
    rows += [nx - 1, nx - 1]
    cols += [nx - 2, nx - 3]
    vals += [1.0 / h, -1.0 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(nx, nx - 1))


class _BoreOperators:
    """Cached sparse stencil operators for one two-layer grid."""

    def __init__(self, grid: Grid):
        if grid.layout != "two-layer":
            raise ShapeError("bore problem requires the two-layer layout")
        nx, ny = grid.nx, grid.ny
        nt = 2 * ny
        dq, dp = grid.dx, grid.dy
        Ix = sp.identity(nx, format="csr")
        It = sp.identity(nt, format="csr")
        d1p = _d1_matrix(ny, dp)
        self.Dq = sp.csr_matrix(sp.kron(_d1_matrix(nx, dq), It))
        self.Dp = sp.csr_matrix(sp.kron(Ix, sp.block_diag([d1p, d1p])))
        hp1 = _half_diff_matrix(ny, dp)
        self.Hp = sp.csr_matrix(sp.kron(Ix, sp.block_diag([hp1, hp1])))
        ap1 = _half_avg_matrix(ny)
        self.Mp = sp.csr_matrix(sp.kron(Ix, sp.block_diag([ap1, ap1])))
        self.Hq = sp.csr_matrix(sp.kron(_half_diff_matrix(nx, dq), It))
        self.Mq = sp.csr_matrix(sp.kron(_half_avg_matrix(nx), It))
        self.Sdp = sp.csr_matrix(sp.kron(Ix, sp.block_diag([_scatter_p(ny, dp)] * 2)))
        self.Sdq = sp.csr_matrix(sp.kron(_scatter_q(nx, dq), It))
        self.MpDq = sp.csr_matrix(self.Mp @ self.Dq)
        self.MqDp = sp.csr_matrix(self.Mq @ self.Dp)

        node_j = np.tile(np.arange(nt), nx)
        self.node_j = node_j
        self.lower_mask = node_j < ny
        interior_j = ((node_j >= 1) & (node_j <= ny - 2)) | (
            (node_j >= ny + 1) & (node_j <= nt - 2)
        )
        self.layer_interior = interior_j
        # half-point layer membership
        half_layer = np.tile(np.repeat([True, False], ny - 1), nx)
        self.hp_lower = half_layer
        self.rows_j1 = np.arange(nx) * nt + (ny - 1)
        self.rows_j2 = np.arange(nx) * nt + ny
        self.Dq_j1 = sp.csr_matrix(self.Dq[self.rows_j1])
        self.Dq_j2 = sp.csr_matrix(self.Dq[self.rows_j2])
        self.Dp_j1 = sp.csr_matrix(self.Dp[self.rows_j1])
        self.Dp_j2 = sp.csr_matrix(self.Dp[self.rows_j2])


_OP_CACHE: dict = {}


def _operators(grid: Grid) -> _BoreOperators:
    key = (grid.nx, grid.ny, grid.half_length, grid.layout)
    if key not in _OP_CACHE:
        _OP_CACHE[key] = _BoreOperators(grid)
    return _OP_CACHE[key]


def _h_nodes(ops: _BoreOperators, lam: float) -> np.ndarray:
    return np.where(ops.lower_mask, lam, 1.0 - lam)


def _h_half_p(ops: _BoreOperators, lam: float) -> np.ndarray:
    return np.where(ops.hp_lower, lam, 1.0 - lam)


def _check_ellipticity(h_plus_up: np.ndarray, grid: Grid, floor: float = 0.0):
    m = float(np.min(h_plus_up))
    if m <= floor:
        k = int(np.argmin(h_plus_up))
        nt = grid.n_transverse
        raise EllipticityError(m, (k // nt, k % nt))


def bore_residual_stacked(s: BoreState, grid: Grid) -> np.ndarray:
    """Node-wise residual vector of the PDE system (no truncation rows).

    Row layout per node: walls carry the Dirichlet residual u, layer-interior
    nodes the divergence-form interior equation, the lower interface trace
    the dynamic jump condition, and the upper trace the continuity residual.
    """
    ops = _operators(grid)
    p = s.params
    lam = p.lam
    uf = s.u.values.reshape(-1)
    if not np.all(np.isfinite(uf)):
        k = int(np.argwhere(~np.isfinite(uf))[0])
        nt = grid.n_transverse
        raise NumericError(f"non-finite state value at node ({k // nt}, {k % nt})")
    h_n = _h_nodes(ops, lam)
    up = ops.Dp @ uf
    _check_ellipticity(h_n + up, grid)
    uq = ops.Dq @ uf

    d = ops.Hp @ uf
    m = ops.MpDq @ uf
    h_hp = _h_half_p(ops, lam)
    _check_ellipticity(h_hp + d, grid)
    A = -(1.0 + m * m) / (2.0 * (h_hp + d) ** 2)

    e = ops.Hq @ uf
    w = ops.MqDp @ uf
    h_hq = np.tile(h_n[: grid.n_transverse], grid.nx - 1)
    B = e / (h_hq + w)

    r = np.where(ops.layer_interior, ops.Sdp @ A + ops.Sdq @ B, 0.0)
    # walls
    nt = grid.n_transverse
    r[0::nt] = uf[0::nt]
    r[nt - 1 :: nt] = uf[nt - 1 :: nt]
    # interface rows
    q1 = uq[ops.rows_j1]
    q2 = uq[ops.rows_j2]
    d1 = up[ops.rows_j1]
    d2 = up[ops.rows_j2]
    h1, h2 = lam, 1.0 - lam
    jr = p.rho2 - p.rho1
    F2 = p.froude_squared
    T = (
        -0.5
        * (
            p.rho2 * h2 * h2 * (1.0 + q2 * q2) / (h2 + d2) ** 2
            - p.rho1 * h1 * h1 * (1.0 + q1 * q1) / (h1 + d1) ** 2
        )
        - (jr / F2) * uf[ops.rows_j1]
        + 0.5 * jr
    )
    r[ops.rows_j1] = T
    r[ops.rows_j2] = uf[ops.rows_j2] - uf[ops.rows_j1]
    return r


def bore_residual(s: BoreState, grid: Grid):
    """Residual split as (interior Field, interface vector, continuity vector)."""
    r = bore_residual_stacked(s, grid)
    ops = _operators(grid)
    interface = r[ops.rows_j1].copy()
    continuity = r[ops.rows_j2].copy()
    field = r.reshape(grid.nx, grid.n_transverse).copy()
    field[:, grid.interface_lower] = 0.0
    field[:, grid.interface_upper] = 0.0
    return Field(grid, field), interface, continuity


def bore_jacobian(s: BoreState, grid: Grid) -> sp.csr_matrix:
    """Analytic Jacobian of :func:`bore_residual_stacked` with respect to u."""
    ops = _operators(grid)
    p = s.params
    lam = p.lam
    uf = s.u.values.reshape(-1)
    h_hp = _h_half_p(ops, lam)
    d = ops.Hp @ uf
    m = ops.MpDq @ uf
    dAdd = (1.0 + m * m) / (h_hp + d) ** 3
    dAdm = -m / (h_hp + d) ** 2
    h_n = _h_nodes(ops, lam)
    h_hq = np.tile(h_n[: grid.n_transverse], grid.nx - 1)
    e = ops.Hq @ uf
    w = ops.MqDp @ uf
    dBde = 1.0 / (h_hq + w)
    dBdw = -e / (h_hq + w) ** 2

    JA = sp.diags(dAdd) @ ops.Hp + sp.diags(dAdm) @ ops.MpDq
    JB = sp.diags(dBde) @ ops.Hq + sp.diags(dBdw) @ ops.MqDp
    J = ops.Sdp @ JA + ops.Sdq @ JB
    n = grid.n_nodes
    nt = grid.n_transverse
    mask = sp.diags(ops.layer_interior.astype(float))
    J = sp.csr_matrix(mask @ J)

    # walls
    wall = np.concatenate([np.arange(0, n, nt), np.arange(nt - 1, n, nt)])
    J = J + sp.csr_matrix(
        (np.ones(wall.size), (wall, wall)), shape=(n, n)
    )

    # interface dynamic rows
    uq = ops.Dq @ uf
    up = ops.Dp @ uf
    q1 = uq[ops.rows_j1]
    q2 = uq[ops.rows_j2]
    d1 = up[ops.rows_j1]
    d2 = up[ops.rows_j2]
    h1, h2 = lam, 1.0 - lam
    jr = p.rho2 - p.rho1
    F2 = p.froude_squared
    dTdq1 = p.rho1 * h1 * h1 * q1 / (h1 + d1) ** 2
    dTdd1 = -p.rho1 * h1 * h1 * (1.0 + q1 * q1) / (h1 + d1) ** 3
    dTdq2 = -p.rho2 * h2 * h2 * q2 / (h2 + d2) ** 2
    dTdd2 = p.rho2 * h2 * h2 * (1.0 + q2 * q2) / (h2 + d2) ** 3
    J_if = (
        sp.diags(dTdq1) @ ops.Dq_j1
        + sp.diags(dTdd1) @ ops.Dp_j1
        + sp.diags(dTdq2) @ ops.Dq_j2
        + sp.diags(dTdd2) @ ops.Dp_j2
    )
    J_if = J_if + sp.csr_matrix(
        (
            np.full(grid.nx, -jr / F2),
            (np.arange(grid.nx), ops.rows_j1),
        ),
        shape=(grid.nx, n),
    )
    scatter_if = sp.csr_matrix(
        (np.ones(grid.nx), (ops.rows_j1, np.arange(grid.nx))), shape=(n, grid.nx)
    )
    J = J + scatter_if @ J_if

    # continuity rows
    ones = np.ones(grid.nx)
    J = J + sp.csr_matrix(
        (
            np.concatenate([ones, -ones]),
            (
                np.concatenate([ops.rows_j2, ops.rows_j2]),
                np.concatenate([ops.rows_j2, ops.rows_j1]),
            ),
        ),
        shape=(n, n),
    )
    return sp.csr_matrix(J)


def flow_force_bore_all(s: BoreState, grid: Grid) -> np.ndarray:
    """Flow force of every slice:

    S(q) = int_{-1}^{1} rho ( h^2 (1 - u_q^2) / (2 (h + u_p)^2) + 1/2
           - (h p + u)/F^2 ) (h + u_p) dp,
    evaluated per layer with the endpoint-corrected trapezoid rule.
    """
    ops = _operators(grid)
    p = s.params
    lam = p.lam
    F2 = p.froude_squared
    nx, ny = grid.nx, grid.ny
    nt = grid.n_transverse
    uf = s.u.values.reshape(-1)
    uq = (ops.Dq @ uf).reshape(nx, nt)
    up = (ops.Dp @ uf).reshape(nx, nt)
    h_n = _h_nodes(ops, lam)[:nt]
    _check_ellipticity((h_n[None, :] + up).reshape(-1), grid)
    pcoord = grid.y
    u = s.u.values
    integrand = np.empty_like(u)
    for sl, rho in ((slice(0, ny), p.rho1), (slice(ny, nt), p.rho2)):
        h = h_n[sl][None, :]
        hp_up = h + up[:, sl]
        integrand[:, sl] = rho * (
            h * h * (1.0 - uq[:, sl] ** 2) / (2.0 * hp_up**2)
            + 0.5
            - (h * pcoord[sl][None, :] + u[:, sl]) / F2
        ) * hp_up
    total = np.zeros(nx)
    for sl in grid.layer_slices():
        total += trapezoid_corrected(integrand[:, sl], grid.dy, axis=1)
    return total


def flow_force_bore(s: BoreState, grid: Grid, q_index: int) -> float:
    return float(flow_force_bore_all(s, grid)[q_index])


def bore_diagnostics(s: BoreState, grid: Grid) -> BoreDiagnostics:
    """Ellipticity, stagnation, overturning, and wall-contact monitors."""
    ops = _operators(grid)
    lam = s.params.lam
    uf = s.u.values.reshape(-1)
    up = ops.Dp @ uf
    uq = ops.Dq @ uf
    h_n = _h_nodes(ops, lam)
    hp_up = h_n + up
    margin = float(np.min(hp_up))
    h1, h2 = lam, 1.0 - lam
    stag = min(
        float(np.min(h1 / hp_up[ops.rows_j1])),
        float(np.min(h2 / hp_up[ops.rows_j2])),
    )
    slope = float(
        max(np.max(np.abs(uq[ops.rows_j1])), np.max(np.abs(uq[ops.rows_j2])))
    )
    wall_gap = min(lam, 1.0 - lam)
    with np.errstate(divide="ignore"):
        vel = float(max(np.max(np.abs(uq / hp_up)), np.max(1.0 / np.abs(hp_up))))
    return BoreDiagnostics(
        ellipticity_margin=margin,
        stagnation_indicator=stag,
        interface_max_slope=slope,
        wall_gap=wall_gap,
        velocity_bound_check=vel,
    )


class BoreProblem:
    """Full truncated-domain assembly used by the continuation driver."""

    kind = "bore"

    def __init__(self, grid: Grid, rho1: float, rho2: float, delta: float = 1e-3):
        if grid.layout != "two-layer":
            raise ShapeError("bore problem requires the two-layer layout")
        self.grid = grid
        self.rho1 = float(rho1)
        self.rho2 = float(rho2)
        self.delta = float(delta)
        self.ops = _operators(grid)

    @property
    def n(self) -> int:
        return self.grid.n_nodes

    def params(self, lam: float) -> BoreParams:
        return BoreParams(self.rho1, self.rho2, lam)

    def gamma1_rows(self) -> np.ndarray:
        """Interface dynamic-condition rows at interior columns."""
        nt = self.grid.n_transverse
        return np.array(
            [i * nt + (self.grid.ny - 1) for i in range(1, self.grid.nx - 1)]
        )

    @property
    def phase_row_index(self) -> int:
        """Transverse index of the phase anchor (interface trace p = 0-)."""
        return self.grid.interface_lower

    def downstream_profile(self, lam: float) -> np.ndarray:
        return conjugate_state_bore(lam, self.params(lam), self.grid)

    def seed(self, eps: float):
        s = seed_bore(eps, self.grid, self.rho1, self.rho2)
        return s.u.values.copy(), s.params.lam

    def admissible(self, u: np.ndarray, lam: float) -> bool:
        if not (np.all(np.isfinite(u)) and 0.0 < lam < 1.0):
            return False
        up = self.ops.Dp @ u.reshape(-1)
        h_n = _h_nodes(self.ops, lam)
        return bool(np.min(h_n + up) > self.delta)

    def residual_vector(self, u: np.ndarray, lam: float) -> np.ndarray:
        state = BoreState(Field(self.grid, u), self.params(lam))
        r = bore_residual_stacked(state, self.grid)
        r2 = r.reshape(self.grid.nx, self.grid.n_transverse)
        r2[0, :] = u[0, :]
        r2[-1, :] = u[-1, :] - self.downstream_profile(lam)
        return r2.reshape(-1)

    def jacobian(self, u: np.ndarray, lam: float):
        state = BoreState(Field(self.grid, u), self.params(lam))
        J = bore_jacobian(state, self.grid).tolil()
        nt = self.grid.n_transverse
        n = self.n
        for i in (0, self.grid.nx - 1):
            for j in range(nt):
                k = i * nt + j
                J.rows[k] = [k]
                J.data[k] = [1.0]
        J = J.tocsr()
        # lam-column by central differences (h and the downstream row depend
        # on lam through several nonlinear terms; FD keeps the assembly honest)
        dl = 1e-7 * (1.0 + abs(lam))
        rp = self.residual_vector(u, lam + dl)
        rm = self.residual_vector(u, lam - dl)
        dlam = (rp - rm) / (2.0 * dl)
        return J, dlam

    def flow_force_slices(self, u: np.ndarray, lam: float) -> np.ndarray:
        return flow_force_bore_all(
            BoreState(Field(self.grid, u), self.params(lam)), self.grid
        )

    def xindependent_residual(self, profile: np.ndarray, lam: float) -> float:
        """Max residual of a transverse profile in the q-independent problem."""
        g = self.grid
        ny = g.ny
        p = self.params(lam)
        res = []
        # layer interiors: flux (-1 / (2 (h+U_p)^2))_p with half-point fluxes
        for sl, h in ((slice(0, ny), lam), (slice(ny, 2 * ny), 1.0 - lam)):
            v = profile[sl]
            dv = np.diff(v) / g.dy
            A = -1.0 / (2.0 * (h + dv) ** 2)
            res.append(np.max(np.abs(np.diff(A) / g.dy)) if ny > 3 else 0.0)
        v1 = profile[:ny]
        v2 = profile[ny:]
        d1v1 = (3.0 * v1[-1] - 4.0 * v1[-2] + v1[-3]) / (2.0 * g.dy)
        d1v2 = (-3.0 * v2[0] + 4.0 * v2[1] - v2[2]) / (2.0 * g.dy)
        h1, h2 = lam, 1.0 - lam
        jr = p.rho2 - p.rho1
        T = (
            -0.5
            * (
                p.rho2 * h2 * h2 / (h2 + d1v2) ** 2
                - p.rho1 * h1 * h1 / (h1 + d1v1) ** 2
            )
            - (jr / p.froude_squared) * v1[-1]
            + 0.5 * jr
        )
        res.append(abs(T))
        res.append(abs(v2[0] - v1[-1]))
        res.append(abs(v1[0]))
        res.append(abs(v2[-1]))
        return float(max(res))

    def diagnostics(self, u: np.ndarray, lam: float) -> dict:
        d = bore_diagnostics(
            BoreState(Field(self.grid, u), self.params(lam)), self.grid
        )
        return {
            "ellipticity_margin": d.ellipticity_margin,
            "stagnation_indicator": d.stagnation_indicator,
            "interface_max_slope": d.interface_max_slope,
            "wall_gap": d.wall_gap,
            "velocity_bound_check": d.velocity_bound_check,
        }

    def c2_proxy_norm(self, u: np.ndarray) -> float:
        from .grid import differentiate

        f = Field(self.grid, u)
        parts = [np.max(np.abs(u))]
        for axis in ("x", "y"):
            parts.append(np.max(np.abs(differentiate(f, axis, 1).values)))
            parts.append(np.max(np.abs(differentiate(f, axis, 2).values)))
        return float(max(parts))

    def blowup_proxy(self, u: np.ndarray, lam: float) -> float:
        up = self.ops.Dp @ u.reshape(-1)
        h_n = _h_nodes(self.ops, lam)
        margin = float(np.min(h_n + up))
        inv = 1.0 / margin if margin > 0 else np.inf
        return self.c2_proxy_norm(u) + abs(lam) + inv
