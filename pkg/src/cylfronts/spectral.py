"""Transversal linearized operators at the cylinder ends and their principal
eigenvalues.

A front connecting two x-independent states is spectrally healthy when the
transverse linearization about each far-field state has a strictly negative
principal eigenvalue sigma_0 (the rightmost real eigenvalue, which carries a
positive eigenfunction).  The continuation driver monitors sigma_0 on both
sides and flags spectral degeneracy when either one approaches zero.

The eigenvalue enters interior rows only; Dirichlet, oblique-boundary,
interface-jump and continuity rows are constraints, which are condensed out
before the eigenvalue iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import ConfigurationError, EigensolverError, EllipticityError, TruncationError


@dataclass
class Operator1D:
    """Dense transverse operator with an eigenvalue mask.

    ``matrix`` holds all rows (interior stencils plus constraint rows);
    ``mask`` is True on rows where the eigenvalue appears; ``weight`` is the
    positive diagonal of the mass matrix on masked rows (zero elsewhere).
    ``positivity_nodes`` lists the nodes where the principal eigenfunction
    must not change sign.
    """

    matrix: np.ndarray
    mask: np.ndarray
    weight: np.ndarray
    positivity_nodes: np.ndarray
    kind: str = ""
    side: str = ""


@dataclass
class EigenReport:
    sigma0: float
    eigenfunction: np.ndarray
    positivity_ok: bool
    iterations: int
    residual: float


def _settled_column(u: np.ndarray, side: str, tail_tol: float) -> np.ndarray:
    """Extract a far-field column, requiring it to have settled in x."""
    if side == "upstream":
        col, nbr = u[0], u[1]
    elif side == "downstream":
        col, nbr = u[-1], u[-2]
    else:
        raise ConfigurationError(f"side must be 'upstream' or 'downstream', got {side!r}")
    drift = float(np.max(np.abs(col - nbr)))
    if drift > tail_tol:
        raise TruncationError(
            f"{side} column not settled: adjacent-column variation "
            f"{drift:.3e} exceeds {tail_tol:.1e}; truncation too short"
        )
    return col.copy()


def _robin_operator(grid, nl, profile: np.ndarray, lam: float, side: str) -> Operator1D:
    ny = grid.ny
    dy = grid.dy
    A = np.zeros((ny, ny))
    A[0, 0] = 1.0
    for j in range(1, ny - 1):
        A[j, j - 1 : j + 2] = [1.0 / dy**2, -2.0 / dy**2, 1.0 / dy**2]
    gz = nl.evaluate(profile[-1], lam)[1]
    # third-order one-sided derivative keeps the constraint-row truncation
    # error below the interior one
    A[-1, -1] = 11.0 / (6.0 * dy) + (gz - 1.0)
    A[-1, -2] = -18.0 / (6.0 * dy)
    A[-1, -3] = 9.0 / (6.0 * dy)
    A[-1, -4] = -2.0 / (6.0 * dy)
    mask = np.zeros(ny, dtype=bool)
    mask[1:-1] = True
    weight = mask.astype(float)
    pos = np.arange(1, ny)  # interior plus the oblique-boundary node
    return Operator1D(A, mask, weight, pos, kind="robin", side=side)


def _bore_operator(grid, rho1, rho2, profile: np.ndarray, lam: float, side: str) -> Operator1D:
    ny = grid.ny
    nt = 2 * ny
    dp = grid.dy
    froude_sq = (np.sqrt(rho1) - np.sqrt(rho2)) / (np.sqrt(rho1) + np.sqrt(rho2))
    A = np.zeros((nt, nt))
    mask = np.zeros(nt, dtype=bool)
    weight = np.zeros(nt)
    for sl, h, rho in ((slice(0, ny), lam, rho1), (slice(ny, nt), 1.0 - lam, rho2)):
        v = profile[sl]
        dv_half = np.diff(v) / dp
        if np.min(h + dv_half) <= 0.0:
            raise EllipticityError(float(np.min(h + dv_half)), (side, "half-point"))
        c = 1.0 / (h + dv_half) ** 3
        # nodal derivative for the mass weight
        dv_nodal = np.empty(ny)
        dv_nodal[1:-1] = (v[2:] - v[:-2]) / (2.0 * dp)
        dv_nodal[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dp)
        dv_nodal[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dp)
        base = sl.start
        for j in range(1, ny - 1):
            k = base + j
            A[k, k - 1] = c[j - 1] / dp**2
            A[k, k] = -(c[j - 1] + c[j]) / dp**2
            A[k, k + 1] = c[j] / dp**2
            mask[k] = True
            weight[k] = 1.0 / (h + dv_nodal[j])
    A[0, 0] = 1.0
    A[nt - 1, nt - 1] = 1.0
    # interface jump row (upper minus lower) at the lower trace node
    j1, j2 = ny - 1, ny
    h1, h2 = lam, 1.0 - lam
    v1, v2 = profile[:ny], profile[ny:]
    d1 = (3.0 * v1[-1] - 4.0 * v1[-2] + v1[-3]) / (2.0 * dp)
    d2 = (-3.0 * v2[0] + 4.0 * v2[1] - v2[2]) / (2.0 * dp)
    c1 = rho1 * h1 * h1 / (h1 + d1) ** 3
    c2 = rho2 * h2 * h2 / (h2 + d2) ** 3
    A[j1, j1] += -c1 * 3.0 / (2.0 * dp)
    A[j1, j1 - 1] += -c1 * (-4.0) / (2.0 * dp)
    A[j1, j1 - 2] += -c1 * 1.0 / (2.0 * dp)
    A[j1, j2] += c2 * (-3.0) / (2.0 * dp)
    A[j1, j2 + 1] += c2 * 4.0 / (2.0 * dp)
    A[j1, j2 + 2] += c2 * (-1.0) / (2.0 * dp)
    A[j1, j1] += -(rho2 - rho1) / froude_sq
    # continuity row at the upper trace node
    A[j2, j2] = 1.0
    A[j2, j1] = -1.0
    pos = np.arange(1, nt - 1)  # interior plus both interface traces
    return Operator1D(A, mask, weight, pos, kind="bore", side=side)


def transversal_operator(problem, u: np.ndarray, lam: float, side: str,
                         tail_tol: float = 1e-6) -> Operator1D:
    """Linearized transverse operator about a far-field column of ``u``.

    ``problem`` is a RobinProblem or BoreProblem; ``u`` the (nx, n_transverse)
    state array.  Raises TruncationError if the requested column has not
    settled to an x-independent profile within ``tail_tol``.
    """
    u = np.asarray(u, dtype=float)
    profile = _settled_column(u, side, tail_tol)
    if problem.kind == "robin":
        return _robin_operator(problem.grid, problem.nl, profile, lam, side)
    if problem.kind == "bore":
        return _bore_operator(problem.grid, problem.rho1, problem.rho2, profile, lam, side)
    raise ConfigurationError(f"unknown problem kind {problem.kind!r}")


def _condense(op: Operator1D):
    """Eliminate constraint rows, returning the reduced eigenproblem."""
    E = np.flatnonzero(op.mask)
    C = np.flatnonzero(~op.mask)
    A = op.matrix
    Acc = A[np.ix_(C, C)]
    Ace = A[np.ix_(C, E)]
    try:
        X = np.linalg.solve(Acc, Ace)  # w_C = -X @ w_E
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"singular constraint block: {exc}") from exc
    Ared = A[np.ix_(E, E)] - A[np.ix_(E, C)] @ X
    m = op.weight[E]
    return Ared, m, E, C, X


def _embed(op: Operator1D, wE: np.ndarray, E, C, X) -> np.ndarray:
    w = np.zeros(op.matrix.shape[0])
    w[E] = wE
    w[C] = -X @ wE
    return w


def principal_eigenvalue(op: Operator1D, max_iters: int = 500,
                         tol: float = 1e-13) -> EigenReport:
    """Rightmost real eigenvalue of the masked generalized eigenproblem.

    Shift-invert power iteration from the all-ones interior vector with the
    shift above a Gershgorin bound, so the iteration converges to the
    rightmost eigenvalue.  If the converged eigenfunction changes sign, the
    computation restarts from a dense solve that scans eigenvalues from the
    right for a sign-definite eigenfunction.
    """
    Ared, m, E, C, X = _condense(op)
    nE = Ared.shape[0]
    scale = float(np.max(np.abs(Ared))) or 1.0
    # Gershgorin upper bound of diag(1/m) @ Ared
    G = Ared / m[:, None]
    bound = float(np.max(np.diag(G) + np.sum(np.abs(G), axis=1) - np.abs(np.diag(G))))
    shift = bound + 1.0
    w = np.ones(nE)
    w /= np.linalg.norm(w)
    sigma = None
    iterations = 0
    converged = False
    # outer loop re-shifts toward the Rayleigh estimate: the Gershgorin shift
    # guarantees the rightmost eigenvalue dominates but can converge slowly
    # when it sits far above the spectrum
    for _restart in range(6):
        try:
            lu = scipy.linalg.lu_factor(Ared - shift * np.diag(m))
        except scipy.linalg.LinAlgError:
            shift += 1e-6 * (1.0 + abs(shift))
            continue
        stage_iters = 40 if _restart == 0 else max_iters
        for _ in range(stage_iters):
            iterations += 1
            w_new = scipy.linalg.lu_solve(lu, m * w)
            nrm = np.linalg.norm(w_new)
            if not np.isfinite(nrm) or nrm == 0.0:
                break
            w_new /= nrm
            s_new = float((w_new @ (Ared @ w_new)) / (w_new @ (m * w_new)))
            done = sigma is not None and abs(s_new - sigma) <= tol * (1.0 + abs(s_new))
            sigma, w = s_new, w_new
            if done:
                converged = True
                break
        if converged or iterations >= max_iters:
            break
        shift = sigma + max(1e-6, 1e-3 * (1.0 + abs(sigma)))
    if not converged:
        # dense fallback keeps the computation total
        vals = scipy.linalg.eigvals(Ared, np.diag(m))
        real = vals[np.abs(vals.imag) <= 1e-8 * (1.0 + np.abs(vals.real))].real
        real = real[np.isfinite(real)]
        if real.size == 0:
            raise EigensolverError(
                f"no convergence after {iterations} iterations; last sigma={sigma}"
            )
        sigma = float(np.max(real))
        lu = scipy.linalg.lu_factor(
            Ared - (sigma + 1e-8 * (1.0 + abs(sigma))) * np.diag(m)
        )
        for _ in range(3):
            w = scipy.linalg.lu_solve(lu, m * w)
            w /= np.linalg.norm(w)
    w_full = _embed(op, w, E, C, X)

    def sign_definite(vec):
        sub = vec[op.positivity_nodes]
        big = float(np.max(np.abs(sub))) or 1.0
        return np.all(sub >= -1e-8 * big) or np.all(sub <= 1e-8 * big)

    positivity_ok = sign_definite(w_full)
    if not positivity_ok:
        # dense restart: scan real eigenvalues from the right
        vals, vecs = scipy.linalg.eig(Ared, np.diag(m))
        order = np.argsort(-vals.real)
        for k in order:
            if not np.isfinite(vals[k].real) or abs(vals[k].imag) > 1e-8 * (
                1.0 + abs(vals[k].real)
            ):
                continue
            cand = vecs[:, k].real
            cand_full = _embed(op, cand, E, C, X)
            if sign_definite(cand_full):
                sigma = float(vals[k].real)
                w, w_full = cand, cand_full
                positivity_ok = True
                break
    if np.sum(w_full[op.positivity_nodes]) < 0:
        w_full = -w_full
        w = -w
    residual = float(np.max(np.abs(Ared @ w - sigma * (m * w)))) / scale
    return EigenReport(
        sigma0=float(sigma),
        eigenfunction=w_full,
        positivity_ok=bool(positivity_ok),
        iterations=iterations,
        residual=residual,
    )


def robin_sigma_oracle(g_z: float) -> float:
    """Closed-form principal eigenvalue of the constant-coefficient operator
    w'' on (0,1) with w(0)=0 and w'(1) + (g_z - 1) w(1) = 0.

    For g_z < 0 the principal eigenvalue is positive, sigma = xi^2 with
    tanh(xi)/xi = 1/(1-g_z); for g_z > 0 it is negative, sigma = -xi^2 with
    xi the first root of xi cos(xi) = (1-g_z) sin(xi) in (0, pi); g_z = 0
    gives sigma = 0 (eigenfunction w = y).
    """
    if g_z == 0.0:
        return 0.0
    if g_z < 0.0:
        target = 1.0 / (1.0 - g_z)

        def f(xi):
            return np.tanh(xi) / xi - target

        xi = brentq(f, 1e-8, 100.0, xtol=1e-15, rtol=8.9e-16)
        return float(xi * xi)

    def phi(xi):
        return xi * np.cos(xi) - (1.0 - g_z) * np.sin(xi)

    xi = brentq(phi, 1e-8, np.pi - 1e-12, xtol=1e-15, rtol=8.9e-16)
    return float(-xi * xi)


def spectral_margin(problem, u: np.ndarray, lam: float,
                    tail_tol: float = 1e-6):
    """Principal eigenvalues (sigma0_upstream, sigma0_downstream) of a state."""
    rep_m = principal_eigenvalue(
        transversal_operator(problem, u, lam, "upstream", tail_tol)
    )
    rep_p = principal_eigenvalue(
        transversal_operator(problem, u, lam, "downstream", tail_tol)
    )
    return rep_m.sigma0, rep_p.sigma0
