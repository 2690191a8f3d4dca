"""Semilinear Robin problem on the single-layer cylinder.

The PDE is Laplace's equation in the strip with a nonlinear Robin condition
on the top boundary:

    Delta u = 0                    in (-L, L) x (0, 1)
    u_y - u + g(u, lam) = 0        on y = 1
    u = 0                          on y = 0

together with truncation conditions u(-L, .) = 0 and u(+L, .) = r * y where
r is the active downstream conjugate slope (r = lam for the default family).
Monotone fronts connect the trivial state upstream to the linear state r*y
downstream; linear states r*y with g(r, lam) = 0 are the x-independent
solutions, and two of them are conjugate when they share the same flow force
G(r, lam).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import (
    HypothesisViolationError,
    NumericError,
    RootFindingError,
    SeedRangeError,
    ShapeError,
)
from .grid import Field, Grid, _deriv2, differentiate, trapezoid_corrected

GEvaluator = Callable[[float, float], Tuple[float, float, float, float]]


@dataclass(frozen=True)
class RobinNonlinearity:
    """Boundary nonlinearity g and its primitive G.

    ``evaluate(z, lam)`` returns ``(g, g_z, g_lam, G)``; inputs may be numpy
    arrays.  ``g12``, ``g21``, ``g30`` are the reduced Taylor coefficients
    g_{lm} = d_z^l d_lam^m g(0,0) / (l! m!); the admissible structural class
    forces g12 = -g21/3 and g30 = -2*g21/3.
    """

    evaluate: GEvaluator
    a: float
    g21: float

    @property
    def g12(self) -> float:
        return -self.g21 / 3.0

    @property
    def g30(self) -> float:
        return -2.0 * self.g21 / 3.0


def quartic_g(z, lam, a: float):
    """Double-well family G(z, lam) = a z^2 (z - lam)^2, g = G_z.

    Returns ``(g, g_z, g_lam, G)``.  The induced reduced coefficient is
    g21 = -6a.
    """
    if a <= 0:
        raise HypothesisViolationError("quartic coefficient a must be positive")
    G = a * z**2 * (z - lam) ** 2
    g = 2.0 * a * z * (z - lam) * (2.0 * z - lam)
    g_z = 2.0 * a * (6.0 * z**2 - 6.0 * lam * z + lam**2)
    g_lam = 2.0 * a * (2.0 * lam * z - 3.0 * z**2)
    return g, g_z, g_lam, G


def quartic_nonlinearity(a: float = 1.0) -> RobinNonlinearity:
    """Default quartic nonlinearity with coefficient ``a``."""

    def evaluate(z, lam):
        return quartic_g(z, lam, a)

    return RobinNonlinearity(evaluate=evaluate, a=a, g21=-6.0 * a)


def reduced_coefficients_fd(nl: RobinNonlinearity, h: float = 1e-3):
    """Extract (g12, g21, g30) from g by central finite differences at (0,0)."""

    def g(z, lam):
        return nl.evaluate(z, lam)[0]

    # g21 = d_z^2 d_lam g / 2, g12 = d_z d_lam^2 g / 2, g30 = d_z^3 g / 6
    def dz2(lam):
        return (g(h, lam) - 2.0 * g(0.0, lam) + g(-h, lam)) / h**2

    def dzdlam2(z):
        return (g(z, h) - 2.0 * g(z, 0.0) + g(z, -h)) / h**2

    g21 = (dz2(h) - dz2(-h)) / (2.0 * h) / 2.0
    g12 = (dzdlam2(h) - dzdlam2(-h)) / (2.0 * h) / 2.0
    g30 = (g(2 * h, 0.0) - 2 * g(h, 0.0) + 2 * g(-h, 0.0) - g(-2 * h, 0.0)) / (
        2.0 * h**3
    ) / 6.0
    return g12, g21, g30


@dataclass
class RobinState:
    """A field on a single-layer grid together with the parameter lam."""

    u: Field
    lam: float


def robin_residual(s: RobinState, grid: Grid, nl: RobinNonlinearity):
    """PDE residual: (interior field, top-boundary vector).

    The interior field holds the Dirichlet residual u on y = 0, the discrete
    Laplacian at interior rows (one-sided x-stencils at the end columns), and
    zeros on the top row.  The boundary vector holds the Robin residual
    u_y - u + g(u, lam) along y = 1.  Truncation rows are handled by the
    solver, not here.
    """
    if s.u.grid is not grid and s.u.grid != grid:
        raise ShapeError("state grid does not match")
    u = s.u.values
    if not np.all(np.isfinite(u)):
        i, j = np.argwhere(~np.isfinite(u))[0]
        raise NumericError(f"non-finite state value at node ({i}, {j})")
    uxx = _deriv2(u, grid.dx, axis=0)
    uyy = _deriv2(u, grid.dy, axis=1)
    interior = np.zeros_like(u)
    interior[:, 0] = u[:, 0]
    interior[:, 1:-1] = (uxx + uyy)[:, 1:-1]
    uy_top = (3.0 * u[:, -1] - 4.0 * u[:, -2] + u[:, -3]) / (2.0 * grid.dy)
    g_top = nl.evaluate(u[:, -1], s.lam)[0]
    boundary = uy_top - u[:, -1] + g_top
    if not (np.all(np.isfinite(interior)) and np.all(np.isfinite(boundary))):
        raise NumericError("non-finite residual value")
    return Field(grid, interior), boundary


def flow_force_robin(s: RobinState, grid: Grid, nl: RobinNonlinearity, x_index: int) -> float:
    """Conserved flow force of one transverse slice.

    S(x) = int_0^1 (u_y^2 - u_x^2)/2 dy - u(x,1)^2/2 + G(u(x,1), lam).
    Evaluated with the endpoint-corrected trapezoid rule; for x-independent
    states r*y this returns G(r, lam) up to quadrature error.
    """
    return float(flow_force_robin_all(s, grid, nl)[x_index])


def flow_force_robin_all(s: RobinState, grid: Grid, nl: RobinNonlinearity) -> np.ndarray:
    """Flow force of every transverse slice at once."""
    ux = differentiate(s.u, "x").values
    uy = differentiate(s.u, "y").values
    integrand = 0.5 * (uy**2 - ux**2)
    top = s.u.values[:, -1]
    G_top = nl.evaluate(top, s.lam)[3]
    return trapezoid_corrected(integrand, grid.dy, axis=1) - 0.5 * top**2 + G_top


def stationary_roots_robin(lam: float, nl: RobinNonlinearity, bracket=None,
                           n_samples: int = 2001):
    """All slopes r with g(r, lam) = 0 (stationary points of the boundary
    potential), with no conjugacy filter applied."""
    return _scan_g_roots(lam, nl, bracket, n_samples)


def conjugate_set_robin(lam: float, nl: RobinNonlinearity, bracket=None, n_samples: int = 2001):
    """All slopes r with g(r, lam) = 0 and G(r, lam) on the zero level set.

    Roots are located by dense sampling plus bisection; roots whose |G|
    exceeds the conjugacy tolerance are excluded.  For admissible families
    the result always contains 0 and lam.
    """
    uniq = _scan_g_roots(lam, nl, bracket, n_samples)
    G_scale = max((abs(nl.evaluate(r, lam)[3]) for r in uniq), default=0.0)
    tol = 1e-10 * (1.0 + G_scale)
    out = [0.0 if abs(r) < 1e-12 else r for r in uniq if abs(nl.evaluate(r, lam)[3]) <= tol]
    return out


def _scan_g_roots(lam: float, nl: RobinNonlinearity, bracket=None,
                  n_samples: int = 2001):
    """Dense sampling plus bisection root scan of g(., lam)."""
    if bracket is None:
        w = 2.0 * abs(lam) + 1.0
        bracket = (-w, w)
    zs = np.linspace(bracket[0], bracket[1], n_samples)
    gv = nl.evaluate(zs, lam)[0]
    roots = []
    failed = []
    for k in range(n_samples - 1):
        a, b = zs[k], zs[k + 1]
        fa, fb = gv[k], gv[k + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = nl.evaluate(mid, lam)[0]
                if fm == 0.0 or hi - lo < 1e-15 * (1.0 + abs(mid)):
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            else:
                failed.append((a, b))
                continue
            roots.append(0.5 * (lo + hi))
    if gv[-1] == 0.0:
        roots.append(zs[-1])
    if failed:
        raise RootFindingError(f"bisection failed on brackets {failed}")
    # dedupe
    uniq = []
    for r in sorted(roots):
        if not uniq or abs(r - uniq[-1]) > 1e-9 * (1.0 + abs(r)):
            uniq.append(r)
    return uniq


def kappa1_robin(nl: RobinNonlinearity) -> float:
    """Decay-rate constant |g21|^(1/2) / 2 of the small-amplitude front."""
    if nl.g21 >= 0:
        raise HypothesisViolationError(
            f"g21 = {nl.g21} must be negative (g_zzlam(0,0) < 0 fails)"
        )
    return np.sqrt(-nl.g21) / 2.0


def seed_robin(lam: float, grid: Grid, nl: RobinNonlinearity, lam_seed_max: float = 0.15) -> RobinState:
    """Leading-order small-amplitude front (lam/2)(1 + tanh(kappa1 |lam| x)) y."""
    if lam == 0.0 or abs(lam) > lam_seed_max:
        raise SeedRangeError(
            f"|lam| = {abs(lam)} outside (0, {lam_seed_max}]: seed invalid"
        )
    k = kappa1_robin(nl) * abs(lam)
    x = grid.x[:, None]
    y = grid.y[None, :]
    u = 0.5 * lam * (1.0 + np.tanh(k * x)) * y
    return RobinState(Field(grid, u), lam)


def verify_truncated_heteroclinic(
    lam: float, nl: RobinNonlinearity, n_samples: int = 1001, span: float = 50.0
) -> float:
    """Max defect of the explicit tanh orbit in the truncated reduced ODE.

    Substitutes v(x) = lam (1 + tanh(kappa1 |lam| x)) / 2 with analytic
    derivatives into v'' = g21 (-lam^2 v + 3 lam v^2 - 2 v^3) and returns the
    max pointwise defect, which is zero up to rounding.
    """
    if lam == 0.0:
        return 0.0
    if nl.g21 >= 0:
        raise HypothesisViolationError("g21 must be negative")
    k = kappa1_robin(nl) * abs(lam)
    x = np.linspace(-span, span, n_samples)
    T = np.tanh(k * x)
    v = 0.5 * lam * (1.0 + T)
    vxx = -lam * k * k * T * (1.0 - T * T)
    rhs = nl.g21 * (-(lam**2) * v + 3.0 * lam * v**2 - 2.0 * v**3)
    return float(np.max(np.abs(vxx - rhs)))


class RobinProblem:
    """Full truncated-domain assembly used by the continuation driver."""

    kind = "robin"

    def __init__(self, grid: Grid, nl: RobinNonlinearity | None = None):
        if grid.layout != "single":
            raise ShapeError("robin problem requires the single-layer layout")
        self.grid = grid
        self.nl = nl if nl is not None else quartic_nonlinearity()

    # -- indexing helpers ---------------------------------------------------
    @property
    def n(self) -> int:
        return self.grid.n_nodes

    def flat(self, i, j):
        return i * self.grid.ny + j

    def gamma1_rows(self) -> np.ndarray:
        """Flat equation indices of the top-boundary rows (interior columns)."""
        g = self.grid
        return np.array([self.flat(i, g.ny - 1) for i in range(1, g.nx - 1)])

    @property
    def phase_row_index(self) -> int:
        """Transverse index of the phase-functional anchor (y = 1)."""
        return self.grid.ny - 1

    # -- states -------------------------------------------------------------
    def downstream_slope(self, lam: float) -> float:
        return lam

    def downstream_profile(self, lam: float) -> np.ndarray:
        return lam * self.grid.y

    def seed(self, lam: float):
        s = seed_robin(lam, self.grid, self.nl)
        return s.u.values.copy(), lam

    def admissible(self, u: np.ndarray, lam: float) -> bool:
        return bool(np.all(np.isfinite(u)) and np.isfinite(lam))

    # -- residual / jacobian on the truncated domain ------------------------
    def residual_vector(self, u: np.ndarray, lam: float) -> np.ndarray:
        """Residual of the full square system (truncation rows included)."""
        g = self.grid
        state = RobinState(Field(g, u), lam)
        interior, boundary = robin_residual(state, g, self.nl)
        r = interior.values.copy()
        r[:, -1] = boundary
        r[0, :] = u[0, :]
        r[-1, :] = u[-1, :] - self.downstream_profile(lam)
        return r.reshape(-1)

    def jacobian(self, u: np.ndarray, lam: float):
        """(sparse d residual / du, dense d residual / d lam)."""
        g = self.grid
        nx, ny = g.nx, g.ny
        dx2, dy = g.dx**2, g.dy
        dy2 = dy * dy
        rows, cols, vals = [], [], []

        def add(r, c, v):
            rows.append(r)
            cols.append(c)
            vals.append(v)

        # truncation columns: identity rows
        for i in (0, nx - 1):
            for j in range(ny):
                add(self.flat(i, j), self.flat(i, j), 1.0)
        g_z_top = self.nl.evaluate(u[:, -1], lam)[1]
        for i in range(1, nx - 1):
            # bottom Dirichlet
            add(self.flat(i, 0), self.flat(i, 0), 1.0)
            # interior Laplacian
            for j in range(1, ny - 1):
                r = self.flat(i, j)
                add(r, r, -2.0 / dx2 - 2.0 / dy2)
                add(r, self.flat(i - 1, j), 1.0 / dx2)
                add(r, self.flat(i + 1, j), 1.0 / dx2)
                add(r, self.flat(i, j - 1), 1.0 / dy2)
                add(r, self.flat(i, j + 1), 1.0 / dy2)
            # top Robin row: one-sided u_y - u + g(u)
            r = self.flat(i, ny - 1)
            add(r, self.flat(i, ny - 1), 1.5 / dy - 1.0 + g_z_top[i])
            add(r, self.flat(i, ny - 2), -2.0 / dy)
            add(r, self.flat(i, ny - 3), 0.5 / dy)
        J = sp.csr_matrix(
            (vals, (rows, cols)), shape=(self.n, self.n)
        )
        dlam = np.zeros(self.n)
        g_lam_top = self.nl.evaluate(u[:, -1], lam)[2]
        for i in range(1, nx - 1):
            dlam[self.flat(i, ny - 1)] = g_lam_top[i]
        # downstream truncation rows depend on lam through r_plus = lam
        for j in range(ny):
            dlam[self.flat(nx - 1, j)] = -g.y[j]
        return J, dlam

    # -- diagnostics ---------------------------------------------------------
    def flow_force_slices(self, u: np.ndarray, lam: float) -> np.ndarray:
        return flow_force_robin_all(RobinState(Field(self.grid, u), lam), self.grid, self.nl)

    def xindependent_residual(self, profile: np.ndarray, lam: float) -> float:
        """Max residual of a transverse profile in the x-independent problem."""
        g = self.grid
        upp = _deriv2(profile, g.dy, axis=0)
        r_int = np.max(np.abs(upp[1:-1])) if g.ny > 2 else 0.0
        uy = (3.0 * profile[-1] - 4.0 * profile[-2] + profile[-3]) / (2.0 * g.dy)
        r_top = abs(uy - profile[-1] + float(self.nl.evaluate(profile[-1], lam)[0]))
        return max(float(r_int), r_top, abs(float(profile[0])))

    def diagnostics(self, u: np.ndarray, lam: float) -> dict:
        return {}

    def c2_proxy_norm(self, u: np.ndarray) -> float:
        g = self.grid
        f = Field(g, u)
        parts = [np.max(np.abs(u))]
        for axis in ("x", "y"):
            parts.append(np.max(np.abs(differentiate(f, axis, 1).values)))
            parts.append(np.max(np.abs(differentiate(f, axis, 2).values)))
        return float(max(parts))

    def blowup_proxy(self, u: np.ndarray, lam: float) -> float:
        return self.c2_proxy_norm(u) + abs(lam)
