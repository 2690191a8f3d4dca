"""Continuation of a front branch for the oblique-boundary problem.

Starts from the small-amplitude front near lam = 0.1 and follows the
branch upward in lam with the pseudo-arclength corrector, printing the
per-point certificates (residual, phase pin, auxiliary amplitude mu,
flow-force conservation) that make each point trustworthy.

Desk scale: a coarse grid and a short step budget; see the acceptance
suite for the full-resolution run.
"""

from cylfronts import RobinProblem, build_grid, quartic_nonlinearity
from cylfronts.continuation import ContinuationConfig, run_branch

grid = build_grid(60.0, 151, 21, "single")
problem = RobinProblem(grid, quartic_nonlinearity(1.0))

config = ContinuationConfig(
    seed_param=0.1,
    ds=0.005,
    ds_max=0.01,
    max_steps=10,
    tol_flow_force=1e-4,
)

branch = run_branch(problem, config)

print(f"{'step':>4} {'lam':>10} {'|u|_inf':>10} {'mu':>10} "
      f"{'sigma-':>9} {'sigma+':>9} {'S dev':>9} {'iters':>5}")
for k, p in enumerate(branch.points):
    print(f"{k:>4} {p.lam:>10.6f} {p.norm_u_inf:>10.6f} {p.mu:>10.2e} "
          f"{p.sigma_minus:>9.5f} {p.sigma_plus:>9.5f} "
          f"{p.flow_force_dev:>9.2e} {p.newton_iters:>5}")

print(f"\ntermination: {branch.termination}")
print("every point is a strictly monotone front:",
      all(p.monotone_ok for p in branch.points))
