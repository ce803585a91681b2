import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdmp import LimitCoupling, ObstacleCoupling, ReversibleDMP
from revdmp.errors import InvalidArgument

LIMIT = LimitCoupling((np.inf, 0.72), 1e-6)


def test_limit_inactive_dof_is_zero():
    assert LIMIT.velocity(np.array([5.0, 0.0]))[0] == 0.0


def test_limit_value_near_limit():
    assert LIMIT.velocity(np.array([0.0, 0.62]))[1] == pytest.approx(-1e-3, rel=1e-9)


def test_limit_far_from_limit_is_negligible():
    assert LIMIT.velocity(np.array([0.0, -0.28]))[1] == pytest.approx(-1e-6, rel=1e-9)


def test_limit_saturates_beyond_the_limit():
    v = LIMIT.velocity(np.array([0.0, 0.9]))[1]
    assert np.isfinite(v) and v == pytest.approx(-1e-6 / 1e-12)


def test_limit_validation():
    with pytest.raises(InvalidArgument):
        LimitCoupling((0.5,), -1.0)
    with pytest.raises(InvalidArgument):
        LimitCoupling((0.5,), 1.0).velocity(np.zeros(2))


OBST = ObstacleCoupling((0.5, 0.5), 1000.0, 8.0)


def test_obstacle_zero_velocity_gives_zero():
    assert np.all(OBST.acceleration(np.zeros(2), np.zeros(2)) == 0.0)


def test_obstacle_heading_straight_at_it_gives_zero():
    assert np.allclose(OBST.acceleration(np.zeros(2), np.array([1.0, 1.0])), 0.0, atol=1e-9)


def test_obstacle_term_peaks_at_inverse_beta():
    y = np.zeros(2)
    angles = np.linspace(0.0, 1.0, 2001)
    mags = []
    for a in angles:
        # heading rotated by a from the obstacle direction
        c, s = np.cos(np.pi / 4 + a), np.sin(np.pi / 4 + a)
        mags.append(np.linalg.norm(OBST.acceleration(y, np.array([c, s]))))
    assert angles[int(np.argmax(mags))] == pytest.approx(1.0 / 8.0, abs=1e-3)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3), st.floats(-3, 3))
def test_obstacle_term_is_orthogonal_to_velocity(y1, y2, v1, v2):
    y, yd = np.array([y1, y2]), np.array([v1, v2])
    a = OBST.acceleration(y, yd)
    assert abs(a @ yd) <= 1e-9 * max(1.0, np.linalg.norm(a) * np.linalg.norm(yd))


def test_obstacle_turns_velocity_away():
    # moving along +x just below the obstacle: steer towards -y
    a = OBST.acceleration(np.array([0.0, 0.45]), np.array([1.0, 0.0]))
    assert a[1] < 0


def test_obstacle_3d():
    oc = ObstacleCoupling((0.0, 0.0, 1.0), 10.0, 2.0)
    yd = np.array([0.3, 0.0, 1.0])
    a = oc.acceleration(np.zeros(3), yd)
    assert a.shape == (3,) and abs(a @ yd) < 1e-12 and np.linalg.norm(a) > 0


def test_zero_gain_couplings_do_not_change_rollout(planar_model):
    free = planar_model.rollout("forward", dt=0.002)
    for c in (LimitCoupling((np.inf, 0.72), 0.0), ObstacleCoupling((0.3, 0.2), 0.0, 8.0)):
        tr = planar_model.rollout("forward", dt=0.002, couplings=[c])
        assert np.max(np.abs(tr.y - free.y)) < 1e-12


def test_limit_rollout_respects_limit(planar_model):
    tr = planar_model.rollout("forward", dt=0.002, couplings=[LIMIT])
    assert np.max(tr.y[:, 1]) < 0.72
    back = planar_model.rollout("backward", dt=0.002, couplings=[LIMIT])
    assert np.max(back.y[:, 1]) < 0.72
