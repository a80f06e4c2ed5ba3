import math

import numpy as np
import pytest

from conftest import canonical_problem, infeasible_problem, low_rank_problem, random_problem
from pdhg_primal.errors import ConfigurationError, DimensionError
from pdhg_primal.models.states import PDHGState, PrimalState
from pdhg_primal.models.step_sizes import StepSizes
from pdhg_primal.services.oracle import certify
from pdhg_primal.services.problem import ConstrainedProblem, SmoothTerm
from pdhg_primal.services.prox import QuadraticFunction
from pdhg_primal.services.solvers import (accel_schedule, accel_schedule_next, default_step_sizes,
                                          initial_dualspace_state, resolve_step_sizes, run,
                                          step_pdhg, step_primal, step_primal_dualspace,
                                          step_tseng, validate_step_sizes)


def test_pdhg_hand_trace(canonical, canonical_steps):
    state = PDHGState.initial(np.zeros(1), 1)
    state = step_pdhg(state, canonical, canonical_steps)
    np.testing.assert_allclose(state.y, [-0.2], rtol=1e-12)
    np.testing.assert_allclose(state.x, [0.2], rtol=1e-12)
    state = step_pdhg(state, canonical, canonical_steps)
    np.testing.assert_allclose(state.y, [-0.32], rtol=1e-12)
    np.testing.assert_allclose(state.x, [0.42], rtol=1e-12)


def test_primal_hand_trace(canonical, canonical_steps):
    state = PrimalState.initial(np.zeros(1))
    state = step_primal(state, canonical, canonical_steps)
    np.testing.assert_allclose(state.x, [0.2], rtol=1e-12)
    np.testing.assert_allclose(state.s, [0.2], rtol=1e-12)
    state = step_primal(state, canonical, canonical_steps)
    np.testing.assert_allclose(state.x, [0.42], rtol=1e-12)
    np.testing.assert_allclose(state.s, [0.31], rtol=1e-12)


def test_tseng_first_step(canonical):
    state = step_tseng(PrimalState.initial(np.zeros(1)), canonical, 0.1)
    np.testing.assert_allclose(state.x, [0.4 / 1.1], rtol=1e-12)
    np.testing.assert_allclose(state.s, state.x, rtol=1e-12)


@pytest.mark.parametrize("variant", ["smooth", "condat-vu"])
def test_smooth_term_first_step(canonical_steps, variant):
    p = canonical_problem(h=SmoothTerm.linear([1.0]))
    trace = run(variant, p, canonical_steps, max_iters=1, snapshots=True)
    np.testing.assert_allclose(trace.final.x, [-0.3], rtol=1e-12)


def test_canonical_trace_values(canonical, canonical_steps):
    trace = run("primal", canonical, canonical_steps, max_iters=2, snapshots=True)
    final = trace.final
    assert final.k == 2
    np.testing.assert_allclose(final.s, [0.31], rtol=1e-12)
    assert final.penalty_s == pytest.approx(0.23849)
    assert final.f_s == pytest.approx(0.9522)
    assert final.residual_s == pytest.approx(1.38)
    assert final.dx_norm == pytest.approx(0.22)
    assert trace.metadata["lambda"] == pytest.approx(0.1)


def _x_series(variant, p, ss, iterations=500):
    return run(variant, p, ss, max_iters=iterations, snapshots=True).x_series()


@pytest.mark.parametrize("family", ["quadratic", "l1", "box"])
def test_primal_forms_match_pdhg(family):
    for seed in range(10):
        p = random_problem(seed, m=20, n=30, family=family, consistent=seed % 2 == 0)
        ss = StepSizes(tau=0.7, sigma=0.9 / (0.7 * p.operator_norm() ** 2))
        reference = _x_series("pdhg", p, ss)
        np.testing.assert_allclose(_x_series("primal", p, ss), reference, rtol=0, atol=1e-9)
        np.testing.assert_allclose(_x_series("dualspace", p, ss), reference, rtol=0, atol=1e-9)


def test_smooth_primal_matches_condat_vu():
    for seed in range(10):
        base = random_problem(seed, m=20, n=30, family="l1")
        p = ConstrainedProblem(base.A, base.b, base.g, h=SmoothTerm.quadratic(30, rho=0.5, center=1.0))
        ss = default_step_sizes("smooth", p)
        np.testing.assert_allclose(_x_series("smooth", p, ss), _x_series("condat-vu", p, ss),
                                   rtol=0, atol=1e-9)


@pytest.mark.parametrize("family", ["quadratic", "elastic"])
def test_accelerated_primal_matches_accelerated_pdhg(family):
    for seed in range(10):
        p = random_problem(seed, m=20, n=30, family=family)
        ss = default_step_sizes("accel", p)
        np.testing.assert_allclose(_x_series("accel", p, ss), _x_series("accel-pdhg", p, ss),
                                   rtol=0, atol=1e-9)


def test_accelerated_matches_with_gamma_two():
    base = random_problem(4, m=20, n=30)
    p = ConstrainedProblem(base.A, base.b, QuadraticFunction(30, rho=2.0, center=0.5))
    ss = default_step_sizes("accel", p)
    np.testing.assert_allclose(_x_series("accel", p, ss), _x_series("accel-pdhg", p, ss),
                               rtol=0, atol=1e-9)


def test_tseng_with_harmonic_theta_is_primal_scheme_on_indicators():
    p = random_problem(5, m=20, n=30, family="box")
    ss = StepSizes.from_lambda(0.9 / p.operator_norm() ** 2)
    tseng = run("tseng", p, ss, max_iters=300, snapshots=True, theta=lambda k: 1.0 / (k + 1))
    primal = run("primal", p, ss, max_iters=300, snapshots=True)
    np.testing.assert_allclose(tseng.x_series(), primal.x_series(), rtol=0, atol=1e-9)


def test_accel_schedule_sandwich():
    count = 10 ** 6 + 1
    schedule = accel_schedule(1.0, 0.25, count)
    k = np.arange(count, dtype=float)
    taus = schedule["tau"]
    assert np.all(taus >= 2.0 / (k + 2.0) * (1 - 1e-12))
    assert np.all(taus <= 1.0 / (1.0 + 0.4 * k) * (1 + 1e-12))
    sums = schedule["sigma_sum"]
    assert np.all(sums >= 0.25 * (k + 1) * (1 + 0.2 * k) * (1 - 1e-12))
    assert np.all(sums <= 0.25 * (k + 1) * (1 + 0.25 * k) * (1 + 1e-12))


def test_accel_schedule_next():
    tau, sigma, theta = accel_schedule_next(1.0, 0.5)
    assert tau == pytest.approx(1.0 / math.sqrt(2.0))
    assert sigma == pytest.approx(0.5 * math.sqrt(2.0))
    assert theta == pytest.approx(tau)
    with pytest.raises(ConfigurationError):
        accel_schedule_next(0.0, 0.5)


def test_inadmissible_stepsize_is_rejected(canonical):
    ss = resolve_step_sizes("primal", canonical, lam=10.0)
    with pytest.raises(ConfigurationError, match=r"lambda\*\|\|A\|\|\^2 = 40 >= 1"):
        run("primal", canonical, ss, max_iters=5)
    with pytest.raises(ConfigurationError, match="1 - tau\\*beta"):
        p = canonical_problem(h=SmoothTerm.quadratic(1, rho=1.0))
        validate_step_sizes("smooth", p, StepSizes(tau=0.5, sigma=0.5))


def test_resolve_step_sizes(canonical):
    defaults = resolve_step_sizes("primal", canonical)
    assert defaults.lam == pytest.approx(0.99 / 4.0)
    assert defaults.tau == pytest.approx(defaults.sigma)
    partial = resolve_step_sizes("primal", canonical, tau=2.0)
    assert partial.lam == pytest.approx(0.99 / 4.0)
    assert partial.tau == 2.0
    with pytest.raises(ConfigurationError):
        resolve_step_sizes("primal", canonical, tau=1.0, sigma=0.1, lam=0.5)


def test_record_schedule(canonical, canonical_steps):
    trace = run("primal", canonical, canonical_steps, max_iters=20, record_every=7)
    assert list(trace.ks()) == [0, 7, 14, 20]
    assert not trace.has_snapshots


def test_run_rejects_bad_arguments(canonical, canonical_steps):
    with pytest.raises(ConfigurationError):
        run("primal", canonical, canonical_steps, record_every=0)
    with pytest.raises(DimensionError):
        run("primal", canonical, canonical_steps, x0=np.zeros(3))


@pytest.mark.parametrize("variant", ["accel", "accel-pdhg"])
def test_accelerated_needs_strong_convexity(variant):
    p = random_problem(0, family="l1")
    with pytest.raises(ConfigurationError, match="strongly convex"):
        run(variant, p, max_iters=5)


def test_accelerated_records_schedule(canonical):
    trace = run("accel", canonical, max_iters=10)
    assert {"tau_k", "sigma_k", "Sigma_km1"} <= set(trace.extra_columns)
    assert trace.records[0].get("Sigma_km1") == 0.0
    schedule = accel_schedule(1.0, trace.metadata["lambda"], 11)
    assert trace.final.get("Sigma_km1") == pytest.approx(schedule["sigma_sum"][9])


@pytest.mark.parametrize("variant", ["primal", "pdhg", "gram"])
def test_infeasible_problem_converges_to_least_squares_point(variant):
    p = infeasible_problem()
    trace = run(variant, p, max_iters=20000, record_every=1000)
    final = trace.final
    assert final.f_s - p.fstar < 1e-6
    assert final.g_s == pytest.approx(0.5, abs=1e-3)
    assert final.residual_s == pytest.approx(math.sqrt(2.0), abs=1e-3)


def test_low_rank_iterates_reach_kkt_point():
    p = low_rank_problem(11)
    cert = certify(p, np.zeros(p.n))
    trace = run("primal", p, max_iters=20000, record_every=1000, snapshots=True)
    assert np.linalg.norm(trace.final.x - cert.x_bar) < 1e-4
    assert trace.final.g_s == pytest.approx(cert.g_star, abs=1e-3)


def test_l1_problem_reaches_feasibility():
    p = random_problem(8, m=10, n=15, family="l1")
    trace = run("primal", p, max_iters=5000, record_every=500)
    assert trace.final.residual_s < 1e-2 * trace.records[0].residual_s
    assert trace.column("residual_s")[-1] < trace.column("residual_s")[1]


@pytest.mark.parametrize("variant", ["primal", "pdhg", "dualspace", "smooth", "tseng-harmonic"])
def test_running_average_is_mean_of_iterates(variant):
    p = random_problem(3, m=20, n=30, family="l1", consistent=False)
    if variant == "smooth":
        p = ConstrainedProblem(p.A, p.b, p.g, h=SmoothTerm.quadratic(30, rho=0.5))
    theta = None
    if variant == "tseng-harmonic":
        variant, theta = "tseng", (lambda k: 1.0 / (k + 1))
    trace = run(variant, p, max_iters=200, snapshots=True, theta=theta)
    xs = trace.x_series()
    for record in trace.records[1:]:
        np.testing.assert_allclose(record.s, xs[1:record.k + 1].mean(axis=0), rtol=0, atol=1e-10)


def test_dualspace_images_track_iterates():
    p = random_problem(2, m=20, n=30, family="box", consistent=False)
    ss = default_step_sizes("dualspace", p)
    A = p.A.to_dense()
    state = initial_dualspace_state(p, np.ones(30))
    xs = []
    for _ in range(200):
        state = step_primal_dualspace(state, p, ss)
        xs.append(state.x)
        assert np.linalg.norm(state.x_tilde - A @ state.x) <= 1e-10
        assert np.linalg.norm(state.s_tilde - A @ np.mean(xs, axis=0)) <= 1e-10
