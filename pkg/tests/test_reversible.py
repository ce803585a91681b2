import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revdmp import ClassicalDMP, Perturbation, ReversibleDMP
from revdmp.errors import DegenerateDemoError, DomainError, InvalidArgument
from revdmp.reversible import ReversibleState, reference, reversible_step
from revdmp.sim import coincide_error, min_jerk, mirror_error

DT = 0.002


def test_fit_residual_and_unit_scale(rev_model):
    assert rev_model.fit_residual < 1e-3
    assert rev_model.spatial_scale()[0] == pytest.approx(1.0, abs=1e-4)


def test_planar_fit_shares_phase(planar_model):
    assert planar_model.n_dofs == 2
    assert planar_model.fit_residual < 1e-3


def test_closed_loop_demo_is_degenerate():
    t = np.linspace(0, 2, 501)
    with pytest.raises(DegenerateDemoError):
        ReversibleDMP.train(t, np.sin(np.pi * t))


def test_training_rejects_bad_time_stamps():
    with pytest.raises(InvalidArgument):
        ReversibleDMP.train([0.0, 1.0, 1.0], [0.0, 0.5, 1.0])


def test_reference_at_phase_ends(rev_model):
    y, yd, ydd = reference(rev_model, 0.0, 0.5, 0.0)
    assert y[0] == pytest.approx(0.0, abs=1e-15)
    y, yd, ydd = reference(rev_model, 1.0, 0.0, 0.0)
    assert y[0] == pytest.approx(1.0, abs=1e-15) and yd[0] == 0.0 and ydd[0] == 0.0


def test_reference_chain_rule_scaling(rev_model):
    _, yd1, ydd1 = reference(rev_model, 0.37, 0.5, 0.0)
    _, yd2, ydd2 = reference(rev_model, 0.37, 1.0, 0.0)
    assert yd2[0] == pytest.approx(2 * yd1[0], rel=1e-12)
    assert ydd2[0] == pytest.approx(4 * ydd1[0], rel=1e-12)
    # against finite differences along x(t) = 0.37 + 0.5 t
    h = 1e-5
    f = lambda t: reference(rev_model, 0.37 + 0.5 * t, 0.5, 0.0)[0][0]  # noqa: E731
    assert yd1[0] == pytest.approx((f(h) - f(-h)) / (2 * h), rel=1e-7)
    assert ydd1[0] == pytest.approx((f(h) - 2 * f(0) + f(-h)) / h ** 2, rel=1e-4)


def test_exact_tracking_manifold(rev_model):
    tr = rev_model.rollout("forward", dt=DT)
    ref = rev_model.reference_fn()
    r = ref(tr.x, tr.x_dot, np.zeros_like(tr.x))[0]
    assert np.max(np.abs(tr.y - r)) < 1e-6


def test_mirror_property(rev_model):
    f = rev_model.rollout("forward", dt=DT)
    b = rev_model.rollout("backward", dt=DT)
    assert mirror_error(f, b, rev_model.tau_d) < 1e-3


def test_mirror_property_slowed_down(rev_model):
    f = rev_model.rollout("forward", tau=4.0, dt=DT)
    b = rev_model.rollout("backward", tau=4.0, dt=DT)
    assert mirror_error(f, b, 4.0) < 1e-3
    assert f.at(4.0)[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_forward_coincides_with_classical(rev_model, cls_model):
    f = rev_model.rollout("forward", dt=DT)
    c = cls_model.rollout("forward", dt=DT)
    assert coincide_error(f, c) < 1e-2


def test_goal_change_mid_motion(rev_model):
    tr = rev_model.rollout("forward", dt=DT, events=[Perturbation(1.2, goal=[1.4])])
    assert abs(tr.y[-1, 0] - 1.4) < 1e-3
    assert np.all(np.abs(np.diff(tr.y[:, 0])) < 0.01)


def test_backward_start_change(rev_model):
    tr = rev_model.rollout("backward", dt=DT, events=[Perturbation(1.4, start=[-0.5])])
    assert abs(tr.y[-1, 0] + 0.5) < 1e-3


def test_kick_recovers(rev_model):
    tr = rev_model.rollout("forward", dt=DT, duration=4.0, events=[Perturbation(1.0, kick=[0.3])])
    assert abs(tr.y[-1, 0] - 1.0) < 1e-6


def test_spatial_scale_guard(rev_model):
    with pytest.raises(DomainError):
        rev_model.rollout("forward", dt=DT, goal=1e5)


def test_step_function_matches_rollout(rev_model):
    tr = rev_model.rollout("forward", dt=DT, duration=0.2)
    s = ReversibleState(tr.y[0], tr.yd[0], 0.0, 0.5)
    for k in range(100):
        s = reversible_step(rev_model, s, DT, t=k * DT)
    assert s.y[0] == pytest.approx(tr.y[-1, 0], abs=1e-9)
    assert s.x == pytest.approx(tr.x[-1], abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([-2.0, -0.5, 0.7, 1.5, 3.0]), st.sampled_from([0.8, 1.5, 2.0, 3.1]))
def test_mirror_property_for_random_scalings(goal, tau):
    # rest-to-rest demo with an overshoot
    s = np.linspace(0, 1, 501)
    model = ReversibleDMP.train(2 * s, min_jerk(s)[0] + 8 * s ** 2 * (1 - s) ** 2)
    f = model.rollout("forward", tau, dt=0.004, goal=goal)
    b = model.rollout("backward", tau, dt=0.004, goal=goal)
    span = abs(goal - model.y0[0])
    assert mirror_error(f, b, tau) < 1e-3 * span
    assert abs(f.y[-1, 0] - goal) < 1e-6 and abs(b.y[-1, 0] - model.y0[0]) < 1e-6


def test_matched_gains_make_scaled_runs_coincide(mj_demo):
    rev = ReversibleDMP.train(mj_demo.t, mj_demo.y)
    cla = ClassicalDMP.train(mj_demo)
    for tau in (1.25, 2.0, 4.0):
        K, D = cla.effective_gains(tau)
        f = rev.rollout("forward", tau, dt=DT, goal=-1.5, K=K, D=D)
        c = cla.rollout("forward", tau, dt=DT, goal=-1.5)
        assert coincide_error(f, c) < 1e-2
