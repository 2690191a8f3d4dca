"""Pseudo-arclength continuation of monotone fronts with a bordered corrector.

The corrector solves the square bordered system

    F(u, lam) + mu * chi1 = 0,   C(u) = 0,   arclength row = 0

over the unknowns (u, lam, mu).  C is a translational phase functional that
selects one translate of each front, chi1 is a fixed localized bump supported
on the distinguished boundary rows, and mu is an auxiliary amplitude that
vanishes (to solver tolerance) at genuine solutions; carrying it regularizes
the nearly singular translation mode on long domains, and its smallness is a
per-point quality certificate.

Branches terminate in one of the classified alternatives: blowup of a norm /
parameter / admissibility proxy (A1), splitting of the front across an
intermediate x-independent state (A2, "table-top" broadening), a principal
eigenvalue of a far-field transverse linearization reaching zero (A3), a
closed loop in the branch (A4), or the mundane step budget / solver failure.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConfigurationError,
    CylfrontsError,
    DegenerateTangentError,
    NewtonError,
)
from .grid import Field, differentiate, save_field
from .spectral import spectral_margin

A1_BLOWUP = "A1_blowup"
A2_HETEROCLINIC_DEGENERACY = "A2_heteroclinic_degeneracy"
A3_SPECTRAL_DEGENERACY = "A3_spectral_degeneracy"
A4_LOOP = "A4_loop"
STEP_BUDGET = "step_budget"
SOLVER_FAILURE = "solver_failure"


@dataclass
class ContinuationConfig:
    """Numerical parameters of one branch run."""

    seed_param: float
    ds: float = 0.01
    ds_min: float = 1e-7
    ds_max: float = 0.05
    eps_newton: float = 1e-10
    max_steps: int = 50
    max_newton_iters: int = 25
    n_max: float = 50.0
    tol_plateau: float = 0.02
    plateau_fraction: float = 0.15
    sigma_guard: float = 1e-3
    loop_tol: float = 1e-8
    direction: float = 1.0
    lam_min: float = -np.inf
    lam_max: float = np.inf
    tail_tol: float = 1e-6
    tol_flow_force: float = 1e-6
    snapshot_stride: int = 0
    mono_floor_rel: float = 1e-10

    def __post_init__(self):
        if not self.ds_min <= self.ds <= self.ds_max:
            raise ConfigurationError("ds must lie within [ds_min, ds_max]")
        for name in ("eps_newton", "tol_plateau", "plateau_fraction",
                     "sigma_guard", "loop_tol", "tail_tol", "tol_flow_force"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.direction not in (-1.0, 1.0):
            raise ConfigurationError("direction must be +1 or -1")


@dataclass
class BranchPoint:
    u: np.ndarray
    lam: float
    mu: float
    s_arclength: float
    phase: float
    residual: float
    newton_iters: int
    norm_u_inf: float
    c2_proxy: float
    n_proxy: float
    sigma_minus: float
    sigma_plus: float
    flow_force: float
    flow_force_dev: float
    min_dxu: float
    max_dxu: float
    monotone_ok: bool
    diagnostics: dict = field(default_factory=dict)
    accepted: bool = True


@dataclass
class Branch:
    points: list
    termination: str
    info: dict = field(default_factory=dict)


def bordering_bump(problem) -> np.ndarray:
    """Fixed localized bump chi1 on the distinguished boundary rows.

    A unit-norm Gaussian of width L/10 centered at x = 0, living on the
    oblique-boundary (Robin) or interface dynamic-condition (bore) rows.
    """
    grid = problem.grid
    rows = problem.gamma1_rows()
    x_interior = grid.x[1:-1]
    bump = np.exp(-0.5 * (x_interior / (grid.half_length / 10.0)) ** 2)
    bump /= np.linalg.norm(bump)
    chi = np.zeros(grid.n_nodes)
    chi[rows] = bump
    return chi


def phase_value(u: np.ndarray, problem) -> float:
    """Phase functional C(u) = u(0, y0) - u(+L, y0)/2.

    The upstream value at y0 is 0 by the truncation boundary condition, so
    this is the centered value minus the mean of the two far-field values.
    """
    g = problem.grid
    j = problem.phase_row_index
    return float(u[g.i_mid, j] - 0.5 * u[-1, j])


def monotone_check(u: np.ndarray, problem, mono_floor_rel: float = 1e-10,
                   floor_abs: float = 0.0):
    """Check one-signed x-derivative on interior and distinguished-boundary
    nodes; returns (ok, min dxu, max dxu).

    The floor combines a relative term (roundoff at far-field plateaus where
    the derivative legitimately vanishes) with an absolute term: the state is
    only determined to the Newton tolerance, so derivative values below
    eps_newton/dx are indistinguishable from zero.
    """
    g = problem.grid
    dxu = differentiate(Field(g, u), "x", 1).values
    if problem.kind == "robin":
        sub = dxu[:, 1:]
    else:
        sub = dxu[:, 1 : g.n_transverse - 1]
    lo = float(np.min(sub))
    hi = float(np.max(sub))
    floor = max(mono_floor_rel * max(abs(lo), abs(hi)), floor_abs)
    ok = lo >= -floor or hi <= floor
    return ok, lo, hi


def _weighted_dot(du, dlam, dv, dlam2, n):
    return float(np.dot(du, dv) / n + dlam * dlam2)


def newton_correct(problem, u0, lam0, mu0, constraint, cfg):
    """Damped Newton on the bordered square system.

    ``constraint`` is a pair of callables ``(value(u, lam), row(u, lam))``
    returning the scalar constraint and its (dense u-row, lam-coefficient).
    Returns (u, lam, mu, iterations, residual).
    """
    g = problem.grid
    n = g.n_nodes
    chi = getattr(problem, "chi1", None)
    if chi is None:
        chi = problem.chi1 = bordering_bump(problem)
    j_phase = problem.phase_row_index
    phase_row = np.zeros(n)
    phase_row[g.i_mid * g.n_transverse + j_phase] = 1.0
    phase_row[(g.nx - 1) * g.n_transverse + j_phase] = -0.5

    u = u0.copy()
    lam = float(lam0)
    mu = float(mu0)
    if not problem.admissible(u, lam):
        raise NewtonError("initial guess inadmissible", guard="admissibility")

    def assemble_residual(u_, lam_, mu_):
        r = problem.residual_vector(u_, lam_) + mu_ * chi
        cval, _ = constraint
        return np.concatenate([r, [phase_value(u_, problem)], [cval(u_, lam_)]])

    G = assemble_residual(u, lam, mu)
    res = float(np.max(np.abs(G)))
    for it in range(1, cfg.max_newton_iters + 1):
        if res <= cfg.eps_newton:
            return u, lam, mu, it - 1, res
        J, dlam_col = problem.jacobian(u, lam)
        _, crow = constraint
        c_u, c_lam = crow(u, lam)
        bordered = sp.bmat(
            [
                [J, dlam_col[:, None], chi[:, None]],
                [sp.csr_matrix(phase_row[None, :]), None, None],
                [sp.csr_matrix(c_u[None, :]), sp.csr_matrix([[c_lam]]), None],
            ],
            format="csc",
        )
        try:
            lu = spla.splu(bordered)
            delta = lu.solve(-G)
        except RuntimeError as exc:
            raise NewtonError(f"bordered solve failed: {exc}", guard="linear") from exc
        if not np.all(np.isfinite(delta)):
            raise NewtonError("non-finite Newton step", guard="linear")
        du = delta[:n].reshape(u.shape)
        dlam = delta[n]
        dmu = delta[n + 1]
        alpha = 1.0
        for _ in range(12):
            u_t = u + alpha * du
            lam_t = lam + alpha * dlam
            mu_t = mu + alpha * dmu
            if problem.admissible(u_t, lam_t):
                try:
                    G_t = assemble_residual(u_t, lam_t, mu_t)
                except CylfrontsError:
                    alpha *= 0.5
                    continue
                res_t = float(np.max(np.abs(G_t)))
                if res_t < res or res_t <= cfg.eps_newton:
                    break
            alpha *= 0.5
        else:
            raise NewtonError(
                f"line search failed at iteration {it} (residual {res:.3e})",
                guard="line-search" if problem.admissible(u + du, lam + dlam)
                else "admissibility",
            )
        u, lam, mu, G, res = u_t, lam_t, mu_t, G_t, res_t
    if res <= cfg.eps_newton:
        return u, lam, mu, cfg.max_newton_iters, res
    raise NewtonError(
        f"no convergence after {cfg.max_newton_iters} iterations "
        f"(residual {res:.3e})",
        guard="max-iterations",
    )


def fixed_lambda_constraint(lam_target: float):
    """Constraint row pinning lam (used to correct the initial seed)."""

    def value(u, lam):
        return lam - lam_target

    def row(u, lam):
        return np.zeros(u.size), 1.0

    return value, row


def tangent_predict(p1: BranchPoint, p2: BranchPoint, ds: float):
    """Secant predictor and matching arclength constraint row.

    The tangent is the normalized secant through the last two accepted points
    in the weighted inner product (mean square over nodes plus the lam term);
    the constraint row reads <(u, lam) - (u2, lam2), t> = ds.
    """
    n = p2.u.size
    du = (p2.u - p1.u).reshape(-1)
    dlam = p2.lam - p1.lam
    nrm = np.sqrt(_weighted_dot(du, dlam, du, dlam, n))
    if nrm == 0.0:
        raise DegenerateTangentError("secant predictor received identical points")
    t_u = du / nrm
    t_lam = dlam / nrm
    guess_u = p2.u + ds * t_u.reshape(p2.u.shape)
    guess_lam = p2.lam + ds * t_lam
    u2 = p2.u.reshape(-1).copy()
    lam2 = p2.lam

    def value(u, lam):
        return _weighted_dot(u.reshape(-1) - u2, lam - lam2, t_u, t_lam, n) - ds

    def row(u, lam):
        return t_u / n, t_lam

    return guess_u, guess_lam, (value, row)


def first_step_constraint(p: BranchPoint, ds: float, direction: float):
    """First predictor: pure parameter step away from the bifurcation point."""
    t_lam = float(direction)
    lam2 = p.lam
    guess_u = p.u.copy()
    guess_lam = p.lam + ds * t_lam

    def value(u, lam):
        return (lam - lam2) * t_lam - ds

    def row(u, lam):
        return np.zeros(u.size), t_lam

    return guess_u, guess_lam, (value, row)


def detect_plateau(u: np.ndarray, lam: float, problem, cfg) -> dict | None:
    """Interior flat interval whose profile solves the x-independent problem
    while being distinct from both far-field states ("table-top" splitting)."""
    g = problem.grid
    dxu = differentiate(Field(g, u), "x", 1).values
    amp = float(np.max(np.abs(dxu)))
    if amp == 0.0:
        return None
    flat = np.max(np.abs(dxu), axis=1) <= cfg.tol_plateau * amp
    min_cols = int(np.ceil(cfg.plateau_fraction * (g.nx - 1)))
    i = 0
    while i < g.nx:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < g.nx and flat[j + 1]:
            j += 1
        # interior runs only: the far-field flats touch the domain ends
        if i > 0 and j < g.nx - 1 and (j - i + 1) >= min_cols:
            mid = (i + j) // 2
            profile = u[mid].copy()
            xres = problem.xindependent_residual(profile, lam)
            d_up = float(np.max(np.abs(profile)))
            d_down = float(np.max(np.abs(profile - problem.downstream_profile(lam))))
            if (
                xres <= cfg.eps_newton * 100
                and d_up > 10 * cfg.eps_newton
                and d_down > 10 * cfg.eps_newton
            ):
                return {
                    "start": i,
                    "end": j,
                    "width": (j - i + 1) * g.dx,
                    "xres": xres,
                }
        i = j + 1
    return None


def classify_termination(points: list, cfg: ContinuationConfig, problem) -> str | None:
    """Alternative classification at the branch tail, in priority order
    A3 > A2 > A1 > A4; None when the branch may continue."""
    if not points:
        return None
    p = points[-1]
    if max(p.sigma_minus, p.sigma_plus) >= -cfg.sigma_guard:
        return A3_SPECTRAL_DEGENERACY
    if detect_plateau(p.u, p.lam, problem, cfg) is not None:
        return A2_HETEROCLINIC_DEGENERACY
    if (
        p.n_proxy >= cfg.n_max
        or p.lam >= cfg.lam_max
        or p.lam <= cfg.lam_min
        or not problem.admissible(p.u, p.lam)
    ):
        return A1_BLOWUP
    for q in points[:-10]:
        d = max(
            abs(p.norm_u_inf - q.norm_u_inf),
            abs(p.lam - q.lam),
            abs(p.flow_force - q.flow_force),
        )
        if d <= cfg.loop_tol:
            return A4_LOOP
    return None


def _make_point(problem, cfg, u, lam, mu, iters, res, s_arc) -> BranchPoint:
    S = problem.flow_force_slices(u, lam)
    S_mean = float(np.mean(S))
    S_dev = float(np.max(np.abs(S - S_mean)))
    sm, sp_ = spectral_margin(problem, u, lam, cfg.tail_tol)
    ok, lo, hi = monotone_check(
        u, problem, cfg.mono_floor_rel, cfg.eps_newton / problem.grid.dx
    )
    c2 = problem.c2_proxy_norm(u)
    return BranchPoint(
        u=u,
        lam=lam,
        mu=mu,
        s_arclength=s_arc,
        phase=phase_value(u, problem),
        residual=res,
        newton_iters=iters,
        norm_u_inf=float(np.max(np.abs(u))),
        c2_proxy=c2,
        n_proxy=problem.blowup_proxy(u, lam),
        sigma_minus=sm,
        sigma_plus=sp_,
        flow_force=S_mean,
        flow_force_dev=S_dev,
        min_dxu=lo,
        max_dxu=hi,
        monotone_ok=ok,
        diagnostics=problem.diagnostics(u, lam),
    )


def run_branch(problem, cfg: ContinuationConfig, out_dir=None, log=None) -> Branch:
    """Seed, correct, and follow one branch until classification or budget."""
    problem.chi1 = bordering_bump(problem)
    info = {"config": asdict(cfg), "problem": problem.kind}

    u_seed, lam_seed = problem.seed(cfg.seed_param)
    try:
        u, lam, mu, iters, res = newton_correct(
            problem, u_seed, lam_seed, 0.0, fixed_lambda_constraint(lam_seed), cfg
        )
    except NewtonError as exc:
        return Branch([], SOLVER_FAILURE, {**info, "error": str(exc), "step": 0})
    points = [_make_point(problem, cfg, u, lam, mu, iters, res, 0.0)]
    if log:
        log(points[-1], 0)
    if cfg.max_steps == 0:
        return Branch(points, STEP_BUDGET, info)

    ds = cfg.ds
    termination = None
    step = 0
    while step < cfg.max_steps:
        if len(points) == 1:
            guess_u, guess_lam, constraint = first_step_constraint(
                points[-1], ds, cfg.direction
            )
        else:
            guess_u, guess_lam, constraint = tangent_predict(
                points[-2], points[-1], ds
            )
        try:
            u, lam, mu, iters, res = newton_correct(
                problem, guess_u, guess_lam, 0.0, constraint, cfg
            )
            pt = _make_point(
                problem, cfg, u, lam, mu, iters, res,
                points[-1].s_arclength + ds,
            )
            bad = (
                not pt.monotone_ok
                or abs(pt.phase) > cfg.eps_newton
                or abs(pt.mu) > 10 * cfg.eps_newton
                or pt.flow_force_dev > cfg.tol_flow_force * (1 + abs(pt.flow_force))
            )
            if bad:
                raise NewtonError("point invariants violated", guard="invariants")
        except CylfrontsError as exc:
            if ds / 2 >= cfg.ds_min:
                ds /= 2
                continue
            termination = SOLVER_FAILURE
            info["error"] = str(exc)
            info["step"] = step + 1
            break
        step += 1
        points.append(pt)
        if log:
            log(pt, step)
        if out_dir is not None and cfg.snapshot_stride and step % cfg.snapshot_stride == 0:
            save_field(
                Field(problem.grid, pt.u), f"{out_dir}/snapshot_{step:05d}.txt"
            )
        termination = classify_termination(points, cfg, problem)
        if termination is not None:
            break
        if iters <= 3:
            ds = min(ds * 1.3, cfg.ds_max)
    if termination is None:
        termination = STEP_BUDGET
    return Branch(points, termination, info)


CSV_COLUMNS = [
    "step",
    "s_arclength",
    "lambda",
    "mu",
    "norm_u_inf",
    "norm_u_C2proxy",
    "N_proxy",
    "sigma_minus",
    "sigma_plus",
    "flow_force",
    "flow_force_dev",
    "min_dxu",
    "max_dxu",
    "newton_iters",
]
BORE_EXTRA_COLUMNS = [
    "ellipticity_margin",
    "stagnation_indicator",
    "interface_max_slope",
    "wall_gap",
]


def write_branch_csv(branch: Branch, path, kind: str) -> None:
    """Branch table with one row per accepted point; termination final row."""
    cols = CSV_COLUMNS + (BORE_EXTRA_COLUMNS if kind == "bore" else [])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k, p in enumerate(branch.points):
            row = [
                str(k),
                f"{p.s_arclength:.17g}",
                f"{p.lam:.17g}",
                f"{p.mu:.17g}",
                f"{p.norm_u_inf:.17g}",
                f"{p.c2_proxy:.17g}",
                f"{p.n_proxy:.17g}",
                f"{p.sigma_minus:.17g}",
                f"{p.sigma_plus:.17g}",
                f"{p.flow_force:.17g}",
                f"{p.flow_force_dev:.17g}",
                f"{p.min_dxu:.17g}",
                f"{p.max_dxu:.17g}",
                str(p.newton_iters),
            ]
            if kind == "bore":
                row += [f"{p.diagnostics[c]:.17g}" for c in BORE_EXTRA_COLUMNS]
            fh.write(",".join(row) + "\n")
        fh.write(f"termination,{branch.termination}\n")


def write_branch_summary(branch: Branch, path) -> None:
    """JSON summary: config echo, termination, extrema."""
    pts = branch.points
    summary = {
        "termination": branch.termination,
        "n_points": len(pts),
        "info": branch.info,
    }
    if pts:
        summary["extrema"] = {
            "lambda_min": min(p.lam for p in pts),
            "lambda_max": max(p.lam for p in pts),
            "norm_u_inf_max": max(p.norm_u_inf for p in pts),
            "N_proxy_max": max(p.n_proxy for p in pts),
            "sigma_max": max(max(p.sigma_minus, p.sigma_plus) for p in pts),
            "flow_force_dev_max": max(p.flow_force_dev for p in pts),
        }
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
