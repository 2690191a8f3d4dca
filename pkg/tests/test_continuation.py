"""Tests of the bordered corrector, predictor, classification, and branch IO."""

import json

import numpy as np
import pytest

from cylfronts.continuation import (
    A1_BLOWUP,
    A2_HETEROCLINIC_DEGENERACY,
    A3_SPECTRAL_DEGENERACY,
    A4_LOOP,
    STEP_BUDGET,
    BranchPoint,
    ContinuationConfig,
    classify_termination,
    detect_plateau,
    fixed_lambda_constraint,
    monotone_check,
    newton_correct,
    phase_value,
    run_branch,
    tangent_predict,
    write_branch_csv,
    write_branch_summary,
)
from cylfronts.errors import ConfigurationError, DegenerateTangentError, NewtonError
from cylfronts.grid import build_grid
from cylfronts.robin import RobinProblem, kappa1_robin, quartic_nonlinearity, seed_robin


NL = quartic_nonlinearity(1.0)


@pytest.fixture(scope="module")
def robin_setup():
    g = build_grid(60.0, 101, 11, "single")
    return RobinProblem(g, NL)


def _mk_point(u, lam, **over):
    base = dict(
        u=u, lam=lam, mu=0.0, s_arclength=0.0, phase=0.0, residual=1e-12,
        newton_iters=1, norm_u_inf=float(np.max(np.abs(u))), c2_proxy=1.0,
        n_proxy=1.0, sigma_minus=-0.5, sigma_plus=-0.5, flow_force=0.0,
        flow_force_dev=0.0, min_dxu=0.0, max_dxu=1.0, monotone_ok=True,
    )
    base.update(over)
    return BranchPoint(**base)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ContinuationConfig(seed_param=0.1, ds=1.0, ds_max=0.1)
    with pytest.raises(ConfigurationError):
        ContinuationConfig(seed_param=0.1, direction=0.5)
    with pytest.raises(ConfigurationError):
        ContinuationConfig(seed_param=0.1, sigma_guard=-1.0)


def test_phase_value_examples(robin_setup):
    prob = robin_setup
    g = prob.grid
    assert phase_value(np.zeros((g.nx, g.ny)), prob) == 0.0
    lam = 0.12
    s = seed_robin(lam, g, prob.nl)
    k = kappa1_robin(prob.nl)
    bound = lam * np.exp(-2.0 * k * lam * g.half_length)
    assert abs(phase_value(s.u.values, prob)) <= bound + 1e-15
    # a small forward shift makes the centered value exceed half the jump
    shifted = (lam / 2.0) * (1.0 + np.tanh(k * lam * (g.x[:, None] + 0.5))) * g.y
    assert phase_value(shifted, prob) > 0.0


def test_monotone_check_examples(robin_setup):
    prob = robin_setup
    g = prob.grid
    s = seed_robin(0.12, g, prob.nl)
    ok, lo, hi = monotone_check(s.u.values, prob)
    assert ok and hi > 0.0
    u_bad = np.sin(np.pi * g.x[:, None] / g.half_length) * g.y[None, :]
    ok2, lo2, hi2 = monotone_check(u_bad, prob)
    assert not ok2 and lo2 < 0.0 < hi2


def test_newton_correct_from_exact_solution(robin_setup):
    # the zero state at lam = 0 solves the truncated problem exactly,
    # so the corrector must accept it without taking a step
    prob = robin_setup
    g = prob.grid
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    u0 = np.zeros((g.nx, g.ny))
    u, lam, mu, iters, res = newton_correct(
        prob, u0, 0.0, 0.0, fixed_lambda_constraint(0.0), cfg
    )
    assert iters == 0
    assert mu == 0.0
    assert np.max(np.abs(u)) == 0.0


def test_newton_correct_seed_and_translation_pinning(robin_setup):
    prob = robin_setup
    g = prob.grid
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    s = seed_robin(0.1, g, prob.nl)
    u, lam, mu, iters, res = newton_correct(
        prob, s.u.values, 0.1, 0.0, fixed_lambda_constraint(0.1), cfg
    )
    assert res <= cfg.eps_newton
    assert abs(mu) <= 10 * cfg.eps_newton
    assert abs(phase_value(u, prob)) <= cfg.eps_newton
    # shift the converged state by 2 dx and re-correct: the phase row pins
    # the translate again and the corrector returns to the same front
    shift = 2
    u_shifted = u.copy()
    u_shifted[shift:] = u[:-shift]
    u_shifted[:shift] = u[0]
    u2, lam2, mu2, _, _ = newton_correct(
        prob, u_shifted, 0.1, 0.0, fixed_lambda_constraint(0.1), cfg
    )
    assert abs(phase_value(u2, prob)) <= cfg.eps_newton
    assert abs(lam2 - lam) <= 1e-8
    assert np.max(np.abs(u2 - u)) <= 1e-6


def test_newton_correct_inadmissible_guess():
    g = build_grid(40.0, 41, 9, "two-layer")
    from cylfronts.bore import BoreProblem

    prob = BoreProblem(g, 1.0, 0.25)
    cfg = ContinuationConfig(seed_param=0.02, max_steps=0)
    u = np.zeros((g.nx, g.n_transverse))
    # squeeze the lower-layer height margin below the admissibility guard
    u[:, : g.ny] = -0.499 * (1.0 + g.y[: g.ny])
    with pytest.raises(NewtonError):
        newton_correct(prob, u, 0.5, 0.0, fixed_lambda_constraint(0.5), cfg)


def test_tangent_predict_pure_lambda_step():
    u = np.zeros((5, 3))
    p1 = _mk_point(u, 0.1)
    p2 = _mk_point(u, 0.11)
    guess_u, guess_lam, (value, row) = tangent_predict(p1, p2, 0.02)
    assert guess_lam == pytest.approx(0.13)
    assert np.max(np.abs(guess_u)) == 0.0
    # the predicted point satisfies the arclength constraint exactly
    assert value(guess_u, guess_lam) == pytest.approx(0.0, abs=1e-14)


def test_tangent_predict_collinear_exactness():
    rng = np.random.default_rng(2)
    u1 = rng.standard_normal((5, 3))
    du = rng.standard_normal((5, 3))
    p1 = _mk_point(u1, 0.1)
    p2 = _mk_point(u1 + du, 0.15)
    guess_u, guess_lam, _ = tangent_predict(p1, p2, 0.0)
    assert np.allclose(guess_u, p2.u)
    assert guess_lam == pytest.approx(p2.lam)
    # predicted point continues along the line through p1, p2
    guess_u2, guess_lam2, _ = tangent_predict(p1, p2, 1e-3)
    dir_pred = (guess_u2 - p2.u) / (guess_lam2 - p2.lam)
    assert np.allclose(dir_pred, du / 0.05, rtol=1e-10)


def test_tangent_predict_degenerate():
    u = np.ones((4, 3))
    p = _mk_point(u, 0.2)
    with pytest.raises(DegenerateTangentError):
        tangent_predict(p, _mk_point(u.copy(), 0.2), 0.01)


def _healthy_points(n, prob, lam0=0.1):
    s = seed_robin(lam0, prob.grid, prob.nl)
    return [
        _mk_point(s.u.values, lam0 + 0.01 * k, n_proxy=1.0) for k in range(n)
    ]


def test_classify_a3_sigma_crossing(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    pts = _healthy_points(3, robin_setup)
    for p, sig in zip(pts, (-0.5, -0.1, -0.0005)):
        p.sigma_minus = sig
    assert classify_termination(pts[:1], cfg, robin_setup) is None
    assert classify_termination(pts[:2], cfg, robin_setup) is None
    assert classify_termination(pts, cfg, robin_setup) == A3_SPECTRAL_DEGENERACY
    # the classification is a pure function of its inputs
    assert classify_termination(pts, cfg, robin_setup) == A3_SPECTRAL_DEGENERACY


def test_classify_a1_lambda_beyond_max(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0, lam_max=0.3)
    pts = _healthy_points(2, robin_setup)
    pts[-1].lam = 0.35
    assert classify_termination(pts, cfg, robin_setup) == A1_BLOWUP


def test_classify_a1_norm_blowup(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0, n_max=5.0)
    pts = _healthy_points(2, robin_setup)
    pts[-1].n_proxy = 7.0
    assert classify_termination(pts, cfg, robin_setup) == A1_BLOWUP


def test_classify_a4_loop(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    pts = _healthy_points(14, robin_setup)
    pts[-1].lam = pts[0].lam
    pts[-1].norm_u_inf = pts[0].norm_u_inf
    pts[-1].flow_force = pts[0].flow_force
    assert classify_termination(pts, cfg, robin_setup) == A4_LOOP


def test_classify_none_when_healthy(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    pts = _healthy_points(3, robin_setup)
    assert classify_termination(pts, cfg, robin_setup) is None


def test_detect_plateau_middle_intermediate_state(robin_setup):
    # synthetic "table-top" front: two separated transition layers with a
    # long flat middle at the intermediate stationary slope lam/2
    prob = robin_setup
    g = prob.grid
    lam = 0.3
    k, c = 3.0, 30.0
    v = (lam / 4.0) * (np.tanh(k * (g.x + c)) + np.tanh(k * (g.x - c))) + lam / 2.0
    u = v[:, None] * g.y[None, :]
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    hit = detect_plateau(u, lam, prob, cfg)
    assert hit is not None
    assert hit["width"] >= cfg.plateau_fraction * 2 * g.half_length
    assert hit["xres"] <= 100 * cfg.eps_newton
    assert classify_termination(
        [_mk_point(u, lam)], cfg, prob
    ) == A2_HETEROCLINIC_DEGENERACY
    # a single monotone front must never trigger the detector
    s = seed_robin(0.1, g, prob.nl)
    assert detect_plateau(s.u.values, 0.1, prob, cfg) is None


def test_run_branch_zero_budget(robin_setup):
    cfg = ContinuationConfig(seed_param=0.1, max_steps=0)
    br = run_branch(robin_setup, cfg)
    assert br.termination == STEP_BUDGET
    assert len(br.points) == 1


def test_run_branch_small_and_io(robin_setup, tmp_path):
    cfg = ContinuationConfig(
        seed_param=0.1, ds=0.005, ds_max=0.01, max_steps=4,
        snapshot_stride=2, tol_flow_force=1e-4,
    )
    br = run_branch(robin_setup, cfg, out_dir=str(tmp_path))
    assert br.termination == STEP_BUDGET
    assert len(br.points) == 5
    for p in br.points:
        assert p.residual <= cfg.eps_newton
        assert abs(p.phase) <= cfg.eps_newton
        assert abs(p.mu) <= 10 * cfg.eps_newton
        assert p.monotone_ok
        assert p.flow_force_dev <= cfg.tol_flow_force * (1 + abs(p.flow_force))
    lams = [p.lam for p in br.points]
    assert all(b > a for a, b in zip(lams, lams[1:]))
    # downstream boundary column equals the conjugate profile
    last = br.points[-1]
    conj = robin_setup.downstream_profile(last.lam)
    assert np.max(np.abs(last.u[-1] - conj)) <= 1e-8

    csv = tmp_path / "branch.csv"
    write_branch_csv(br, csv, "robin")
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("step,s_arclength,lambda,mu")
    assert lines[-1] == "termination,step_budget"
    assert len(lines) == 2 + len(br.points)
    summary = tmp_path / "summary.json"
    write_branch_summary(br, summary)
    doc = json.loads(summary.read_text())
    assert doc["termination"] == "step_budget"
    assert doc["info"]["config"]["ds"] == 0.005
    assert doc["extrema"]["lambda_max"] == pytest.approx(last.lam)
    assert (tmp_path / "snapshot_00002.txt").exists()
    assert (tmp_path / "snapshot_00004.txt").exists()


def test_run_branch_downhill_direction(robin_setup):
    cfg = ContinuationConfig(
        seed_param=0.15, ds=0.005, ds_max=0.01, max_steps=3,
        direction=-1.0, tol_flow_force=1e-4,
    )
    br = run_branch(robin_setup, cfg)
    assert br.termination == STEP_BUDGET
    lams = [p.lam for p in br.points]
    assert all(b < a for a, b in zip(lams, lams[1:]))
    assert all(p.monotone_ok for p in br.points)
