import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csoa.bench import DeskQP
from csoa.core import (ConfigError, HyperParams, NumericalAbort, OracleEval, ProblemConstants,
                       SampleContext, SampleStream, SolverState, primal_grad_aug_lagrangian)
from csoa.sets import BoxSet, L1BallSet
from csoa.solvers import (ManualSchedule, ScheduleWarning, csoa_step, dual_update, fw_csoa_step,
                          gap_lower_bound, lower_bound_q, run, schedule_theorem1,
                          schedule_theorem2)

from .oracles import projected_sgd, q_constant, theorem1_constants


def _constants(**kw):
    base = dict(sigma_f=1.0, sigma_h=1.0, sigma_lambda=1.0, G_f=1.0, G_h=1.0, L_f=1.0,
                L_h=1.0, D=1.0, slater_sigma=2.0, N=1)
    base.update(kw)
    return ProblemConstants(**base)


# ---------------------------------------------------------------- schedules


def test_theorem1_example_values():
    c = _constants()
    s = schedule_theorem1(c, 10 ** 6, warn=False)
    assert (s.P, s.K1, s.K2) == (10.0, 6.0, 36.0)
    assert s.K == pytest.approx(math.sqrt(216), rel=1e-14)
    assert s.C1 == pytest.approx(math.sqrt(1 / 6), rel=1e-14)
    assert s.delta == 4.0


@given(st.floats(0.1, 10), st.integers(1, 5), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 10), st.floats(0.1, 10))
def test_theorem1_matches_independent_formula(sf, N, sl, D, gf, slater):
    c = _constants(sigma_f=sf, sigma_h=sf / 2, N=N, sigma_lambda=sl, D=D, G_f=gf,
                   slater_sigma=slater)
    s = schedule_theorem1(c, 100, warn=False)
    ref = theorem1_constants(c.B, N, sl, D, gf, slater)
    for k in ("P", "K1", "K2", "K", "C1"):
        assert getattr(s, k) == pytest.approx(ref[k], rel=1e-12)
    assert s.C == pytest.approx(ref["C"], rel=1e-12)


def test_theorem1_eta_halves_squared_when_T_doubles():
    s = schedule_theorem1(_constants(), 10 ** 6, warn=False)
    assert s.eta(2000) / s.eta(1000) == pytest.approx(2 ** -0.5, rel=1e-14)


def test_theorem1_warns_on_short_horizon():
    with pytest.warns(ScheduleWarning):
        schedule_theorem1(_constants(), 1)


def test_theorem2_floor_at_one():
    c = _constants(L_f=0.5, L_h=0.5)
    assert schedule_theorem2(c, 10, warn=False).L == 1.0
    assert schedule_theorem2(_constants(L_f=3.0), 10, warn=False).L == 3.0


def test_theorem2_rates_and_rho():
    s = schedule_theorem2(_constants(), 10 ** 4, warn=False)
    assert s.eta(16) / s.eta(1) == pytest.approx(16 ** -0.75)
    assert s.upsilon(16) / s.upsilon(1) == pytest.approx(0.5)
    assert s.rho(10 ** 4) == pytest.approx(1e-2 / (8 * s.B))
    assert s.delta == 18.0
    assert schedule_theorem2(_constants(), 10, delta=9.0, warn=False).delta == 9.0


def test_schedule_rejects_bad_horizon():
    with pytest.raises(ValueError):
        schedule_theorem1(_constants(), 0)


def test_lower_bound_q_example():
    c = _constants(G_f=1.0, D=1.0, slater_sigma=2.0)  # C = 1
    s = schedule_theorem1(c, 100, warn=False)
    s.C1, s.delta = 1.0, 1.0
    assert lower_bound_q(c, s, 1.0) == pytest.approx(13.0, rel=1e-15)
    assert q_constant(1.0, 1.0, 1.0, 1.0, 1.0) == 13.0


@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(1e-2, 1e3))
def test_q_matches_reference_and_bound_is_negative(gf, slater, r):
    c = _constants(G_f=gf, slater_sigma=slater)
    s = schedule_theorem1(c, 100, warn=False)
    assert lower_bound_q(c, s, r) == pytest.approx(q_constant(s.C1, s.delta, c.C, c.D, r),
                                                   rel=1e-12)
    assert gap_lower_bound(c, s, r, 100) < 0


def test_q_blows_up_near_zero_and_rejects_nonpositive_r():
    c = _constants()
    s = schedule_theorem1(c, 100, warn=False)
    qs = [lower_bound_q(c, s, r) for r in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a < b for a, b in zip(qs, qs[1:]))
    with pytest.raises(ValueError):
        lower_bound_q(c, s, 0.0)


def test_manual_schedule_power_laws():
    m = ManualSchedule(eta0=0.68, delta=0.25, upsilon0=0.77, rho0=1.25, eta_power=0.75,
                       upsilon_power=0.25, rho_power=0.5)
    hp = m.hyperparams(10 ** 4)
    assert hp.eta == pytest.approx(0.68e-3)
    assert hp.upsilon == pytest.approx(0.077)
    assert hp.rho == pytest.approx(0.0125)
    assert m.hyperparams(1).rho == 1.0


# ---------------------------------------------------------------- single steps


class OneDim:
    """``f = x^2/2``-like 1-d problem with a scripted sample."""

    n_constraints = 1
    block_size = 8

    def __init__(self, grad, h, jac=1.0, lower=-1.0, upper=1.0):
        self.grad, self.h, self.jac = grad, h, jac
        self.feasible_set = BoxSet([lower], [upper])

    def draw(self, rng, count):
        return np.zeros(count)

    def oracle(self, x, ctx):
        return OracleEval(np.array([self.grad]), np.array([self.h]), np.array([[self.jac]]))


def test_csoa_step_dual_stays_zero_when_tightened_constraint_holds():
    prob = OneDim(grad=0.5, h=-0.4)
    hp = HyperParams(eta=0.1, delta=1.0, upsilon=0.3)
    st0 = SolverState.initial(np.array([0.0]), 1)
    out = csoa_step(st0, hp, prob, SampleContext(1, 0.0))
    assert out.lam[0] == 0.0
    assert out.x[0] == pytest.approx(-0.05)


def test_csoa_step_clamps_to_box():
    # x - eta*(g + lam*J) = 0 - 1*(0.3 + 0) -> -0.3 inside; then with a bigger step -> -1
    prob = OneDim(grad=0.3, h=0.0, lower=-0.5, upper=0.5)
    hp = HyperParams(eta=1.0, delta=0.0, upsilon=0.0)
    out = csoa_step(SolverState.initial(np.array([0.0]), 1), hp, prob, SampleContext(1, 0.0))
    assert out.x[0] == pytest.approx(-0.3)
    prob.grad = 3.0
    out = csoa_step(SolverState.initial(np.array([0.0]), 1), hp, prob, SampleContext(1, 0.0))
    assert out.x[0] == -0.5


def test_dual_update_decay_clamp_warns():
    hp = HyperParams(eta=2.0, delta=1.0, upsilon=0.0)
    with pytest.warns(RuntimeWarning, match="clamped"):
        lam = dual_update(np.array([5.0]), np.array([0.1]), hp)
    assert lam[0] == pytest.approx(0.2)


def test_csoa_step_aborts_on_nonfinite_oracle():
    prob = OneDim(grad=np.nan, h=0.0)
    hp = HyperParams(eta=0.1, delta=1.0, upsilon=0.0)
    with pytest.raises(NumericalAbort) as info:
        csoa_step(SolverState.initial(np.array([0.0]), 1), hp, prob, SampleContext(7, 0.0))
    assert info.value.iteration == 7


def _fw_state(qp, x, lam, d, x_prev, lam_prev):
    return SolverState(x=np.array(x), lam=np.array(lam), d=np.array(d),
                       x_prev=np.array(x_prev), lam_prev=np.array(lam_prev))


def test_fw_rho_one_gives_instantaneous_gradient():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    ctx = SampleStream(qp, 0)(3)
    stt = _fw_state(qp, [0.1, 0.2], [0.7], [5.0, -5.0], [0.3, -0.1], [0.2])
    hp = HyperParams(eta=0.1, delta=1.0, upsilon=0.0, rho=1.0)
    out = fw_csoa_step(stt, hp, qp, ctx)
    g = primal_grad_aug_lagrangian(qp.oracle(stt.x, ctx), stt.lam)
    assert np.max(np.abs(out.d - g)) <= 1e-12


def test_fw_stationary_iterate_keeps_gradient():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    ctx = SampleStream(qp, 0)(4)
    x, lam = np.array([0.1, -0.3]), np.array([0.4])
    g = primal_grad_aug_lagrangian(qp.oracle(x, ctx), lam)
    stt = _fw_state(qp, x, lam, g, x, lam)
    out = fw_csoa_step(stt, HyperParams(eta=0.1, delta=1.0, upsilon=0.0, rho=0.3), qp, ctx)
    assert np.max(np.abs(out.d - g)) <= 1e-12


def test_fw_eta_one_jumps_to_vertex():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    ctx = SampleStream(qp, 0)(1)
    stt = SolverState.initial(np.array([0.1, 0.1]), 1, tracking=True)
    out = fw_csoa_step(stt, HyperParams(eta=1.0, delta=1.0, upsilon=0.0, rho=0.5), qp, ctx)
    assert np.array_equal(out.x, qp.feasible_set.lmo(out.d))
    assert np.count_nonzero(out.x) == 1 and abs(out.x).sum() == 1.0


def test_fw_first_direction_is_rho_times_gradient():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    ctx = SampleStream(qp, 0)(1)
    stt = SolverState.initial(np.array([0.2, 0.0]), 1, tracking=True)
    out = fw_csoa_step(stt, HyperParams(eta=0.5, delta=1.0, upsilon=0.0, rho=0.25), qp, ctx)
    g = primal_grad_aug_lagrangian(qp.oracle(stt.x, ctx), stt.lam)
    assert np.allclose(out.d, 0.25 * g, rtol=0, atol=1e-15)


# ---------------------------------------------------------------- run loop


def test_run_zero_horizon_is_noop():
    qp = DeskQP()
    res = run("csoa", qp, HyperParams(eta=0.1, delta=1.0, upsilon=0.0), 0, seed=0)
    assert res.trace == [] and res.iterations == 0
    assert np.array_equal(res.state.x, qp.initial_point())


def test_run_rejects_wrong_set_capability():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    with pytest.raises(ConfigError):
        run("csoa", qp, HyperParams(eta=0.1, delta=1.0, upsilon=0.0), 10, seed=0)
    with pytest.raises(ConfigError):
        run("sgd", DeskQP(), HyperParams(eta=0.1, delta=1.0, upsilon=0.0), 10, seed=0)


def test_run_trace_stride_and_final_record():
    res = run("csoa", DeskQP(), HyperParams(eta=0.01, delta=1.0, upsilon=0.0), 1001, seed=0,
              trace_stride=100)
    ts = [r.t for r in res.trace]
    assert ts[:2] == [100, 200] and ts[-1] == 1001 and len(ts) == 11


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.sampled_from(["csoa", "fw_csoa"]),
       st.floats(1e-3, 0.5), st.floats(0.0, 50.0), st.floats(0.0, 0.5))
def test_invariants_dual_nonnegative_and_membership(seed, alg, eta, delta, ups):
    xset = L1BallSet(2, 1.0) if alg == "fw_csoa" else None
    qp = DeskQP(feasible_set=xset)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run(alg, qp, HyperParams(eta=eta, delta=delta, upsilon=ups, rho=0.5), 200,
                  seed=seed, check_invariants=True)
    assert res.min_lambda >= 0.0
    assert res.max_residual <= 1e-9
    if alg == "fw_csoa":
        assert res.projection_calls == 0 and res.lmo_calls == 200
    else:
        assert res.projection_calls == 200 and res.lmo_calls == 0


@given(st.integers(0, 10 ** 6), st.floats(1e-3, 0.3))
@settings(max_examples=20)
def test_unconstrained_csoa_equals_projected_sgd(seed, eta):
    qp = DeskQP(A=np.zeros((0, 2)), b=())
    stream = SampleStream(qp, seed)
    samples = [stream(t).sample_id for t in range(1, 101)]
    ref = projected_sgd(qp.feasible_set.project, lambda x, th: 2.0 * (x - th[:2]),
                        qp.initial_point(), eta, samples)
    xs = [qp.initial_point()]
    run("csoa", qp, HyperParams(eta=eta, delta=0.0, upsilon=0.0), 100, seed=seed,
        on_step=lambda s: xs.append(s.x))
    for a, b in zip(xs, ref):
        assert np.array_equal(a, b)


def test_fw_rho_one_tracks_gradient_along_a_run():
    qp = DeskQP(feasible_set=L1BallSet(2, 1.0))
    stream = SampleStream(qp, 9)
    states = [SolverState.initial(qp.initial_point(), 1, tracking=True)]
    run("fw_csoa", qp, HyperParams(eta=0.05, delta=1.0, upsilon=0.1, rho=1.0), 300, seed=9,
        on_step=states.append)
    worst = 0.0
    for t in range(1, 301):
        prev, cur = states[t - 1], states[t]
        g = primal_grad_aug_lagrangian(qp.oracle(prev.x, stream(t)), prev.lam)
        worst = max(worst, float(np.max(np.abs(cur.d - g))))
    assert worst <= 1e-12


def test_desk_qp_short_run_violation_example():
    qp = DeskQP()
    c = qp.exact_constants()
    T = 10 ** 4
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScheduleWarning)
        sched = schedule_theorem1(c, T)
    res = run("csoa", qp, sched, T, seed=0)
    h1 = abs(qp.constraints(qp.initial_point())[0])
    assert res.avg_constraints[0] <= 1e-3 * h1
