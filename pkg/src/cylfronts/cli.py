"""Command-line entry points.

Subcommands:

* ``conjugate`` — conjugate-state table: lam*, Froude number squared, and the
  flow force of each x-independent state (bore), or the conjugate slope set
  with excluded stationary roots (Robin).
* ``eigen`` — principal eigenvalue of a far-field transverse linearization.
* ``seed`` — write a small-amplitude seed state snapshot.
* ``continue`` — run a continuation branch from a JSON config.
* ``verify`` — closed-form oracle suite (exit 0 iff every check passes).

All floating-point output uses 17 significant digits for diffability.
Exit codes for ``continue``: 0 on any classified termination or budget,
1 on solver failure, 2 on a malformed config, 3 on an unwritable output
directory.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bore as bore_mod
from . import robin as robin_mod
from .config import build_continuation, build_problem, load_config
from .continuation import SOLVER_FAILURE, run_branch, write_branch_csv, write_branch_summary
from .errors import ConfigurationError, CylfrontsError
from .grid import Field, build_grid, load_field, save_field
from .spectral import principal_eigenvalue, transversal_operator


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_conjugate(args) -> int:
    if args.problem == "bore":
        if args.rho2 >= args.rho1:
            print("error: requires rho2 < rho1 (stable stratification)",
                  file=sys.stderr)
            return 2
        ls = bore_mod.lambda_star(args.rho1, args.rho2)
        f2 = bore_mod.froude_squared(args.rho1, args.rho2)
        print(f"lambda_star {_fmt(ls)}")
        print(f"froude_squared {_fmt(f2)}")
        lam = args.lam if args.lam is not None else 0.5
        g = build_grid(args.half_length, 41, args.ny, "two-layer")
        prob = bore_mod.BoreProblem(g, args.rho1, args.rho2)
        params = bore_mod.BoreParams(args.rho1, args.rho2, lam)
        u0 = np.zeros((g.nx, g.n_transverse))
        s_rest = bore_mod.flow_force_bore(
            bore_mod.BoreState(Field(g, u0), params), g, 0
        )
        u_conj = np.tile(prob.downstream_profile(lam), (g.nx, 1))
        s_conj = bore_mod.flow_force_bore(
            bore_mod.BoreState(Field(g, u_conj), params), g, 0
        )
        print(f"lam {_fmt(lam)}")
        print(f"flow_force_rest {_fmt(s_rest)}")
        print(f"flow_force_conjugate {_fmt(s_conj)}")
        return 0
    nl = robin_mod.quartic_nonlinearity(args.a)
    slopes = robin_mod.conjugate_set_robin(args.lam, nl)
    print("conjugate_slopes " + " ".join(_fmt(s) for s in slopes))
    for s in slopes:
        G = nl.evaluate(s, args.lam)[3]
        print(f"slope {_fmt(s)} flow_force {_fmt(G)}")
    # stationary roots of the boundary potential that are not conjugate
    for r in robin_mod.stationary_roots_robin(args.lam, nl):
        if min(abs(r - s) for s in slopes) > 1e-9 * (1 + abs(args.lam)):
            G = nl.evaluate(r, args.lam)[3]
            print(f"excluded_root {_fmt(r)} flow_force {_fmt(G)}")
    return 0


class _ConstantSlopeNonlinearity:
    """Boundary nonlinearity with fixed derivative, for eigen-only runs."""

    def __init__(self, gz):
        self.gz = float(gz)

    def evaluate(self, z, lam):
        return self.gz * z, self.gz, 0.0, 0.5 * self.gz * z * z


def cmd_eigen(args) -> int:
    if args.problem == "robin" and args.lam is None:
        args.lam = 0.0
    if args.problem == "robin":
        if args.state:
            f = load_field(args.state)
            grid = f.grid
            u = f.values
        else:
            grid = build_grid(args.half_length, 41, args.ny, "single")
            if args.analytic == "conjugate":
                u = np.tile(args.lam * grid.y, (grid.nx, 1))
            else:
                u = np.zeros((grid.nx, grid.ny))
        if args.gz is not None:
            nl = _ConstantSlopeNonlinearity(args.gz)
        else:
            nl = robin_mod.quartic_nonlinearity(args.a)
        problem = robin_mod.RobinProblem(grid, nl)
        lam = args.lam
    else:
        if args.state:
            f = load_field(args.state)
            grid = f.grid
            u = f.values
        else:
            grid = build_grid(args.half_length, 41, args.ny, "two-layer")
            lam_ = args.lam if args.lam is not None else bore_mod.lambda_star(
                args.rho1, args.rho2
            )
            args.lam = lam_
            if args.analytic == "conjugate":
                u = (bore_mod.lambda_star(args.rho1, args.rho2) - lam_) * (
                    1.0 - np.abs(grid.y)
                )[None, :].repeat(grid.nx, axis=0)
            else:
                u = np.zeros((grid.nx, grid.n_transverse))
        problem = bore_mod.BoreProblem(grid, args.rho1, args.rho2)
        lam = args.lam
    op = transversal_operator(problem, u, lam, args.side)
    rep = principal_eigenvalue(op)
    print(f"sigma0 {_fmt(rep.sigma0)}")
    print(f"positivity_ok {rep.positivity_ok}")
    print(f"iterations {rep.iterations}")
    print(f"residual {_fmt(rep.residual)}")
    return 0 if rep.positivity_ok else 1


def cmd_seed(args) -> int:
    if args.problem == "robin":
        grid = build_grid(args.half_length, args.nx, args.ny, "single")
        nl = robin_mod.quartic_nonlinearity(args.a)
        state = robin_mod.seed_robin(args.lam, grid, nl)
        u, lam = state.u, state.lam
    else:
        grid = build_grid(args.half_length, args.nx, args.ny, "two-layer")
        state = bore_mod.seed_bore(args.eps, grid, args.rho1, args.rho2)
        u, lam = state.u, state.params.lam
    save_field(u, args.out_file)
    print(f"lam {_fmt(lam)}")
    print(f"wrote {args.out_file}")
    return 0


def cmd_continue(args, quiet: bool) -> int:
    try:
        rc = load_config(args.config)
        problem = build_problem(rc)
        cfg = build_continuation(rc)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or rc.output["directory"]
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        print(f"output directory not writable: {exc}", file=sys.stderr)
        return 3

    def log(pt, k):
        if not quiet:
            print(
                f"step {k}: lambda={_fmt(pt.lam)} mu={_fmt(pt.mu)} "
                f"sigma=({_fmt(pt.sigma_minus)},{_fmt(pt.sigma_plus)}) "
                f"newton_iters={pt.newton_iters}"
            )

    branch = run_branch(problem, cfg, out_dir=out_dir, log=log)
    write_branch_csv(branch, os.path.join(out_dir, rc.output["csv_name"]),
                     problem.kind)
    write_branch_summary(branch, os.path.join(out_dir, rc.output["summary_name"]))
    print(f"termination {branch.termination}")
    print(f"points {len(branch.points)}")
    return 1 if branch.termination == SOLVER_FAILURE else 0


def _verify_checks():
    """Closed-form oracle suite; yields (name, ok, detail)."""
    from .spectral import robin_sigma_oracle, _robin_operator

    sq6h = np.sqrt(6.0) / 2.0
    nl = robin_mod.quartic_nonlinearity(1.0)
    yield (
        "kappa1_robin_quartic_a1",
        abs(robin_mod.kappa1_robin(nl) - sq6h) <= 1e-14,
        _fmt(robin_mod.kappa1_robin(nl)),
    )
    yield (
        "kappa1_bore_1_025",
        abs(bore_mod.kappa1_bore(1.0, 0.25) - 2.25) <= 1e-14,
        _fmt(bore_mod.kappa1_bore(1.0, 0.25)),
    )
    yield (
        "kappa1_bore_equal_densities",
        abs(bore_mod.kappa1_bore(1.0, 1.0) - 2.0 * np.sqrt(3.0)) <= 1e-14,
        _fmt(bore_mod.kappa1_bore(1.0, 1.0)),
    )
    yield (
        "lambda_star_1_025",
        abs(bore_mod.lambda_star(1.0, 0.25) - 2.0 / 3.0) <= 1e-14,
        _fmt(bore_mod.lambda_star(1.0, 0.25)),
    )
    yield (
        "froude_squared_1_025",
        abs(bore_mod.froude_squared(1.0, 0.25) - 1.0 / 3.0) <= 1e-14,
        _fmt(bore_mod.froude_squared(1.0, 0.25)),
    )
    defect = max(
        robin_mod.verify_truncated_heteroclinic(lam, nl)
        for lam in (0.1, -0.1, 0.3, -0.3)
    )
    yield ("truncated_heteroclinic_defect", defect <= 1e-12, _fmt(defect))
    d0 = abs(robin_sigma_oracle(0.0))
    d1 = abs(robin_sigma_oracle(1.0) + np.pi**2 / 4.0)
    yield ("dispersion_root_gz0", d0 <= 1e-14, _fmt(d0))
    yield ("dispersion_root_gz1", d1 <= 1e-12, _fmt(d1))
    g = build_grid(5.0, 41, 41, "two-layer")
    prob = bore_mod.BoreProblem(g, 1.0, 0.25)
    params = bore_mod.BoreParams(1.0, 0.25, 0.5)
    u0 = np.zeros((g.nx, g.n_transverse))
    s_rest = bore_mod.flow_force_bore(bore_mod.BoreState(Field(g, u0), params), g, 0)
    u_c = np.tile(prob.downstream_profile(0.5), (g.nx, 1))
    s_conj = bore_mod.flow_force_bore(bore_mod.BoreState(Field(g, u_c), params), g, 0)
    yield (
        "conjugate_flow_force_equality",
        abs(s_rest - s_conj) <= 1e-12 and abs(s_rest - 0.90625) <= g.dy**2,
        f"{_fmt(s_rest)} {_fmt(s_conj)}",
    )


def cmd_verify(args) -> int:
    all_ok = True
    for name, ok, detail in _verify_checks():
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name} {detail}")
        all_ok &= ok
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cylfronts",
        description="Monotone fronts of elliptic PDEs on truncated cylinders",
    )
    p.add_argument("--config", default=None, help="run configuration (JSON)")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--quiet", action="store_true", help="suppress step logs")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("conjugate", help="conjugate-state table")
    pc.add_argument("--problem", choices=["robin", "bore"], required=True)
    pc.add_argument("--lam", type=float, default=None)
    pc.add_argument("--a", type=float, default=1.0)
    pc.add_argument("--rho1", type=float, default=1.0)
    pc.add_argument("--rho2", type=float, default=0.25)
    pc.add_argument("--half-length", type=float, default=5.0)
    pc.add_argument("--ny", type=int, default=41)

    pe = sub.add_parser("eigen", help="principal transverse eigenvalue")
    pe.add_argument("--problem", choices=["robin", "bore"], required=True)
    pe.add_argument("--side", choices=["upstream", "downstream"],
                    default="upstream")
    pe.add_argument("--state", default=None, help="field snapshot file")
    pe.add_argument("--analytic", choices=["zero", "conjugate"], default="zero")
    pe.add_argument("--lam", type=float, default=None)
    pe.add_argument("--a", type=float, default=1.0)
    pe.add_argument("--gz", type=float, default=None,
                    help="constant boundary-derivative coefficient (robin)")
    pe.add_argument("--rho1", type=float, default=1.0)
    pe.add_argument("--rho2", type=float, default=0.25)
    pe.add_argument("--half-length", type=float, default=5.0)
    pe.add_argument("--ny", type=int, default=41)

    ps = sub.add_parser("seed", help="write a small-amplitude seed snapshot")
    ps.add_argument("--problem", choices=["robin", "bore"], required=True)
    ps.add_argument("--lam", type=float, default=0.1)
    ps.add_argument("--eps", type=float, default=0.02)
    ps.add_argument("--a", type=float, default=1.0)
    ps.add_argument("--rho1", type=float, default=1.0)
    ps.add_argument("--rho2", type=float, default=0.25)
    ps.add_argument("--half-length", type=float, default=80.0)
    ps.add_argument("--nx", type=int, default=401)
    ps.add_argument("--ny", type=int, default=41)
    ps.add_argument("--out-file", default="seed.txt")

    sub.add_parser("continue", help="run a continuation branch from --config")
    sub.add_parser("verify", help="closed-form oracle suite")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "conjugate":
            return cmd_conjugate(args)
        if args.command == "eigen":
            return cmd_eigen(args)
        if args.command == "seed":
            return cmd_seed(args)
        if args.command == "continue":
            if not args.config:
                print("error: continue requires --config", file=sys.stderr)
                return 2
            return cmd_continue(args, args.quiet)
        if args.command == "verify":
            return cmd_verify(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CylfrontsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
