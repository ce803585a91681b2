import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdmp.basis import KernelSet, fit_weights, make_kernels
from revdmp.errors import InvalidArgument
from revdmp.phase import CanonicalSystem
from revdmp.sim import min_jerk

CS = CanonicalSystem(tau=2.0)
KS30 = make_kernels(30, CS)


def test_equally_spaced_centers():
    assert np.allclose(KS30.centers, np.arange(30) / 29, atol=1e-15)


def test_two_kernel_widths():
    ks = make_kernels(2, CanonicalSystem(tau=1.0), a_h=1.0)
    assert np.array_equal(ks.centers, [0.0, 1.0])
    assert np.array_equal(ks.inv_widths, [1.0, 1.0])
    assert np.allclose(ks.eval(0.5), [0.5, 0.5], atol=1e-15)


def test_exponential_centers_sorted():
    cs = CanonicalSystem.exponential(tau=2.0)
    ks = make_kernels(5, cs)
    expected = np.sort(cs.phase_at(np.linspace(0, 2.0, 5)))
    assert np.allclose(ks.centers, expected, atol=1e-15)
    assert np.all(np.diff(ks.centers) > 0)


def test_peak_dominates_for_separated_kernels():
    ks = KernelSet.from_centers(np.linspace(0, 1, 6), a_h=4.0)
    for k, c in enumerate(ks.centers):
        assert np.argmax(ks.eval(c)) == k


@given(st.floats(-0.5, 1.5))
def test_partition_of_unity_and_derivative_sums(x):
    phi, dphi, ddphi = KS30.eval_derivs(x, 2)
    assert abs(phi.sum() - 1.0) < 1e-12
    assert abs(dphi.sum()) < 1e-8
    assert abs(ddphi.sum()) < 1e-5


def test_derivatives_match_central_differences(rng):
    h = 1e-5
    for x in rng.uniform(0.0, 1.0, 100):
        _, dphi, ddphi = KS30.eval_derivs(x, 2)
        fd1 = (KS30.eval(x + h) - KS30.eval(x - h)) / (2 * h)
        fd2 = (KS30.eval_derivs(x + h, 1)[1] - KS30.eval_derivs(x - h, 1)[1]) / (2 * h)
        assert np.max(np.abs(dphi - fd1)) < 1e-6
        assert np.max(np.abs(ddphi - fd2)) / max(1.0, np.max(np.abs(ddphi))) < 1e-6


def test_far_outside_range_falls_back_to_nearest_kernel():
    phi = KS30.eval(1e6)
    assert phi[-1] == 1.0 and phi.sum() == 1.0


def test_zero_target_gives_zero_weights():
    xs = np.linspace(0, 1, 200)
    assert np.linalg.norm(fit_weights(KS30, xs, np.zeros(200))) < 1e-9


@pytest.mark.parametrize("method", ["ls", "lwr"])
def test_constant_target_reproduced(method):
    xs = np.linspace(0, 1, 200)
    w = fit_weights(KS30, xs, np.full(200, 5.0), method=method)
    assert np.max(np.abs(KS30.eval(xs) @ w - 5.0)) < 1e-6


def test_min_jerk_fit_at_1khz():
    t = np.linspace(0.0, 2.0, 2001)
    y = min_jerk(t / 2.0)[0]
    w = fit_weights(KS30, CS.phase_at(t), y)
    assert np.max(np.abs(KS30.eval(CS.phase_at(t)) @ w - y)) < 1e-3


def test_pinned_fit_is_exact_at_pin():
    xs = np.linspace(0, 1, 300)
    ys = np.sin(7 * xs) + 0.3 * np.cos(31 * xs)
    w = fit_weights(KS30, xs, ys, pin=(1.0, [ys[-1]]))
    assert KS30.eval(1.0) @ w == pytest.approx(ys[-1], abs=1e-10)


def test_multi_column_targets_fit_independently():
    xs = np.linspace(0, 1, 300)
    Y = np.stack([xs ** 2, np.sin(3 * xs)], axis=1)
    W = fit_weights(KS30, xs, Y)
    for j in range(2):
        assert np.allclose(W[:, j], fit_weights(KS30, xs, Y[:, j]))


def test_fit_argument_checks():
    with pytest.raises(InvalidArgument):
        fit_weights(KS30, [0.5], [1.0])
    with pytest.raises(InvalidArgument):
        fit_weights(KS30, np.linspace(0, 1, 10), np.zeros(9))
    with pytest.raises(InvalidArgument):
        fit_weights(KS30, np.linspace(0, 1, 10), np.zeros(10), method="gp")
    with pytest.raises(InvalidArgument):
        KernelSet.from_centers([0.0])
