import math

import numpy as np
import pytest

from revdmp import OrientationDMP
from revdmp import rotations as rot
from revdmp.errors import DegenerateDemoError, DomainError
from revdmp.orientation import orientation_reference, slerp_demo, spline_demo
from revdmp.sim import mirror_error

DT = 0.002
Q0 = rot.qexp([0.2, -0.1, 0.4])


@pytest.fixture(scope="module")
def spline_model():
    t, Q = spline_demo([0.8, -0.5, 1.2], Q0, 2.0, DT)
    return OrientationDMP.train(t, Q)


def test_constant_orientation_is_degenerate():
    t = np.linspace(0, 1, 101)
    with pytest.raises(DegenerateDemoError):
        OrientationDMP.train(t, np.tile(Q0, (101, 1)))


def test_single_axis_slew():
    t, Q = slerp_demo(rot.IDENTITY, rot.qexp([0, 0, math.pi / 2]), 2.0, DT)
    m = OrientationDMP.train(t, Q)
    assert np.max(np.abs(m.W[:, :2])) < 1e-9
    assert m.fit_residual < 1e-3
    assert list(m.degenerate_axes) == [True, True, False]
    f = m.rollout("forward", dt=DT)
    assert rot.geodesic_distance(f.Q[-1], m.Qg) < 1e-3
    with pytest.raises(DegenerateDemoError):
        m.rollout("forward", dt=DT, goal=rot.qexp([0.3, 0, 0.2]))


def test_spline_fit_and_unit_scaling(spline_model):
    assert spline_model.fit_residual < 1e-3
    Ks, *_ = spline_model.scaling()
    assert np.allclose(Ks, 1.0, atol=1e-6)


def test_reference_at_phase_ends(spline_model):
    eta, deta, ddeta = orientation_reference(spline_model, 1.0, 0.0, 0.0)
    assert np.allclose(eta, spline_model.eta_g, atol=1e-14)
    assert np.all(deta == 0) and np.all(ddeta == 0)
    eta0, _, _ = orientation_reference(spline_model, 0.0, 0.5, 0.0)
    assert np.max(np.abs(eta0)) < 1e-3


def test_forward_backward_and_new_goal(spline_model):
    f = spline_model.rollout("forward", dt=DT)
    b = spline_model.rollout("backward", dt=DT)
    assert rot.geodesic_distance(f.Q[-1], spline_model.Qg) < 1e-3
    assert rot.geodesic_distance(b.Q[-1], spline_model.Q0) < 1e-3
    assert mirror_error(f.as_eta_trajectory(), b.as_eta_trajectory(), spline_model.tau_d) < 1e-3
    Qg = rot.qexp([0.3, 1.5, -1.0])
    g = spline_model.rollout("forward", dt=DT, goal=Qg, tau=3.0)
    assert rot.geodesic_distance(g.Q[-1], Qg) < 1e-3


def test_unit_norm_along_rollout(spline_model):
    f = spline_model.rollout("forward", dt=DT)
    assert np.max(np.abs(np.linalg.norm(f.Q, axis=1) - 1.0)) < 1e-12


def test_axes_are_decoupled(spline_model):
    # moving the goal about one axis of the chart leaves the other components untouched
    eta_g = spline_model.eta_g.copy()
    eta_g[0] += 0.3
    g = spline_model.rollout("forward", dt=DT, goal=rot.qprod(rot.qexp(eta_g), spline_model.Q0))
    f = spline_model.rollout("forward", dt=DT)
    assert np.max(np.abs(g.eta[:, 1:] - f.eta[:, 1:])) < 1e-12
    assert np.max(np.abs(g.eta[:, 0] - f.eta[:, 0])) > 0.1


def test_omega_matches_finite_differences_of_orientation():
    t, Q = slerp_demo(Q0, rot.qexp([1.0, -0.4, 0.7]), 2.0, DT)
    m = OrientationDMP.train(t, Q)
    f = m.rollout("forward", dt=DT)
    Qdot = np.gradient(f.Q, f.t, axis=0, edge_order=2)
    Om = 2 * rot.qprod(Qdot, rot.qconj(f.Q), renormalize=False)
    assert np.max(np.abs(Om[2:-2, 1:] - f.omega[2:-2])) < 1e-4


def test_goal_outside_chart_raises(spline_model):
    with pytest.raises(DomainError):
        spline_model.rollout("forward", dt=DT, goal=rot.qprod([0.0, 1.0, 0.0, 0.0], spline_model.Q0))
