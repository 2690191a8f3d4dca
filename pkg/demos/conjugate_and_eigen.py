"""Conjugate states and far-field spectra, at desk scale.

Walks through the x-independent ingredients of a front computation:
the conjugate pair of each problem, the flow-force equality that pairs
them, and the principal eigenvalue of the far-field transverse
linearizations whose negativity keeps a branch alive.
"""

import numpy as np

from cylfronts import (
    BoreParams,
    BoreProblem,
    BoreState,
    Field,
    RobinProblem,
    build_grid,
    conjugate_set_robin,
    flow_force_bore,
    froude_squared,
    lambda_star,
    quartic_nonlinearity,
    stationary_roots_robin,
)
from cylfronts.spectral import principal_eigenvalue, spectral_margin, transversal_operator


def robin_conjugates():
    nl = quartic_nonlinearity(1.0)
    lam = 0.3
    print(f"-- boundary problem, lam = {lam}")
    slopes = conjugate_set_robin(lam, nl)
    print(f"conjugate slopes (equal boundary potential): {slopes}")
    for r in stationary_roots_robin(lam, nl):
        G = nl.evaluate(r, lam)[3]
        tag = "conjugate" if any(abs(r - s) < 1e-9 for s in slopes) else "excluded"
        print(f"  stationary slope {r:+.4f}: potential {G:.10g} ({tag})")
    print()


def bore_conjugates():
    rho1, rho2 = 1.0, 0.25
    ls = lambda_star(rho1, rho2)
    print(f"-- two-layer bore, rho = ({rho1}, {rho2})")
    print(f"critical lower-layer thickness lambda* = {ls:.15f}")
    print(f"Froude number squared = {froude_squared(rho1, rho2):.15f}")
    g = build_grid(6.0, 21, 41, "two-layer")
    prob = BoreProblem(g, rho1, rho2)
    lam = 0.5
    params = BoreParams(rho1, rho2, lam)
    rest = BoreState(Field(g, np.zeros((g.nx, g.n_transverse))), params)
    conj = BoreState(
        Field(g, np.tile(prob.downstream_profile(lam), (g.nx, 1))), params
    )
    print(f"flow force, rest state:      {flow_force_bore(rest, g, 0):.12f}")
    print(f"flow force, conjugate state: {flow_force_bore(conj, g, 0):.12f}")
    print("(equal: the two states can be joined by a front)")
    print()


def far_field_spectra():
    print("-- principal eigenvalues of the far-field linearizations")
    g = build_grid(8.0, 21, 41, "single")
    prob = RobinProblem(g, quartic_nonlinearity(1.0))
    u = np.tile(0.3 * g.y, (g.nx, 1))
    sm, sp = spectral_margin(prob, u, 0.3)
    print(f"boundary problem at lam=0.3: sigma0 = ({sm:.6f}, {sp:.6f})")

    g2 = build_grid(8.0, 21, 41, "two-layer")
    prob2 = BoreProblem(g2, 1.0, 0.25)
    for lam in (2.0 / 3.0, 0.75, 0.85):
        u2 = np.zeros((g2.nx, g2.n_transverse))
        rep = principal_eigenvalue(transversal_operator(prob2, u2, lam, "upstream"))
        print(f"bore upstream at lam={lam:.4f}: sigma0 = {rep.sigma0:+.6f} "
              f"(positive eigenfunction: {rep.positivity_ok})")
    print("sigma0 = 0 exactly at lambda*; it moves negative as lam grows.")


if __name__ == "__main__":
    robin_conjugates()
    bore_conjugates()
    far_field_spectra()
