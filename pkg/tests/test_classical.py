import numpy as np
import pytest

from revdmp import ClassicalDMP
from revdmp.classical import (Gating, classical_step, impedance_form_reference, impedance_rollout,
                              reverse_residual, scaling_factors)
from revdmp.errors import DegenerateDemoError, InvalidArgument
from revdmp.sim import Trajectory, coincide_error, min_jerk_demo

DT = 0.002


@pytest.mark.parametrize("canonical", ["linear", "exponential"])
def test_forward_reproduction(mj_demo, canonical):
    m = ClassicalDMP.train(mj_demo, canonical=canonical, gating=Gating("exponential", 4.6))
    tr = m.rollout("forward", dt=DT)
    assert coincide_error(tr, mj_demo) < 5e-3
    assert tr.at(2.0)[0, 0] == pytest.approx(1.0, abs=5e-3)


def test_gate_value_at_phase_end():
    assert Gating("exponential", 4.6)(1.0) == pytest.approx(0.01, rel=0.01)


def test_constant_demo_is_degenerate():
    t = np.linspace(0, 1, 101)
    with pytest.raises(DegenerateDemoError):
        ClassicalDMP.train(Trajectory(t, np.full(101, 0.3), np.zeros(101), np.zeros(101)))


def test_straight_line_demo():
    t = np.linspace(0.0, 2.0, 1001)
    line = Trajectory(t, 0.5 * t, np.full_like(t, 0.5), np.zeros_like(t))
    m = ClassicalDMP.train(line)
    assert np.all(np.isfinite(m.w))
    # start from the demo's initial velocity (z = tau * yd)
    tr = m.rollout("forward", dt=DT, z_init=[2.0 * 0.5])
    assert coincide_error(tr, line) < 5e-3


def test_equilibrium_without_forcing(cls_model):
    m = ClassicalDMP(cls_model.kernels, np.zeros_like(cls_model.w), 20.0, 5.0, cls_model.gating,
                     cls_model.y0_d, cls_model.g_d, cls_model.cs, cls_model.demo)
    y, z, x = classical_step(m, ([1.0], [0.0], 0.3), [1.0], 2.0, DT)
    assert y[0] == 1.0 and z[0] == 0.0


def test_spatial_scaling_doubles_trajectory(cls_model):
    base = cls_model.rollout("forward", dt=DT)
    doubled = cls_model.rollout("forward", dt=DT, goal=2.0)
    assert np.max(np.abs(doubled.y - 2 * base.y)) < 1e-2


def test_scaling_factors_and_reference(cls_model, mj_demo):
    ks, kt = scaling_factors(cls_model, 2.0, 0.0, 4.0)
    assert ks[0] == 2.0 and kt == 0.5
    y, yd, ydd = impedance_form_reference(cls_model, 1.0, 0.0, 2.0, 0.0)
    assert (y[0], yd[0], ydd[0]) == (0.0, 0.0, 0.0)
    t = 1.3
    _, yd, ydd = impedance_form_reference(cls_model, 2.0, 0.0, 4.0, t)
    assert yd[0] == pytest.approx(mj_demo.yd[int(round(0.5 * t / DT)), 0], abs=1e-4)
    assert ydd[0] == pytest.approx(0.5 * mj_demo.ydd[int(round(0.5 * t / DT)), 0], abs=1e-4)


def test_impedance_form_matches_classical(cls_model):
    a = cls_model.rollout("forward", dt=DT)
    b = impedance_rollout(cls_model, dt=DT)
    assert coincide_error(a, b) < 1e-3


def test_stationary_demo_reverses_exactly():
    t = np.linspace(0, 2, 1001)
    demo = Trajectory(t, np.linspace(0.0, 1.0, 1001) * 0 + 0.2 + 0 * t, 0 * t, 0 * t)
    with pytest.raises(DegenerateDemoError):
        ClassicalDMP.train(demo)


def test_residual_peak_value():
    m = ClassicalDMP.train(min_jerk_demo(0.0, 1.0, 2.0, DT), alpha_z=20.0)
    rr = reverse_residual(m, dt=DT)
    assert np.max(np.abs(rr.predicted)) == pytest.approx(18.75, abs=1e-9)


def test_reverse_run_fails_to_mirror(cls_model):
    rr = reverse_residual(cls_model, dt=DT)
    assert rr.max_tracking_error > 0.05


def test_residual_equation_holds_on_reverse_run(cls_model):
    rr = reverse_residual(cls_model, dt=DT)
    active = np.abs(rr.yd_rev) > 0.1 * np.max(np.abs(rr.yd_rev))
    rel = np.abs(rr.measured - rr.predicted)[active] / np.abs(rr.predicted)[active]
    assert np.max(rel) < 0.05


def test_rollout_argument_checks(cls_model):
    with pytest.raises(InvalidArgument):
        cls_model.rollout("sideways")
    with pytest.raises(InvalidArgument):
        Gating("cosine")
