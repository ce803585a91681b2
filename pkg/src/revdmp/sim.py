"""Fixed-step integration, trajectory containers and demonstration generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IntegrationError, InvalidArgument

DEFAULT_DT = 0.002


def default_dt() -> float:
    """Default step, overridable through the ``REVDMP_DT`` environment variable."""
    import os

    value = os.environ.get("REVDMP_DT")
    if not value:
        return DEFAULT_DT
    try:
        dt = float(value)
    except ValueError:
        raise InvalidArgument(f"REVDMP_DT is not a number: {value!r}") from None
    if not dt > 0:
        raise InvalidArgument("REVDMP_DT must be > 0")
    return dt


def rk4_step(f, t, y, dt):
    """Classical fourth-order Runge-Kutta step of ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def n_steps(duration: float, dt: float) -> int:
    if not dt > 0:
        raise InvalidArgument(f"dt must be > 0, got {dt}")
    if not duration >= dt * (1 - 1e-9):
        raise InvalidArgument(f"duration {duration} shorter than dt {dt}")
    return int(math.ceil(duration / dt - 1e-9))


def check_finite(t, y):
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"non-finite state at t={t:.6g}: {np.array2string(np.asarray(y))}")


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray


def integrate(f: Callable, y0, duration: float, dt: float, t0: float = 0.0,
              post_step: Optional[Callable] = None) -> Solution:
    """Integrate ``y' = f(t, y)`` with fixed-step RK4, recording every step.

    ``post_step(t, y)`` may return a modified state (clamping, events).
    Raises :class:`IntegrationError` as soon as a non-finite value shows up.
    """
    n = n_steps(duration, dt)
    y = np.array(y0, dtype=float)
    ys = np.empty((n + 1,) + y.shape)
    ts = t0 + dt * np.arange(n + 1)
    check_finite(t0, y)
    ys[0] = y
    for k in range(n):
        y = rk4_step(f, ts[k], y, dt)
        check_finite(ts[k + 1], y)
        if post_step is not None:
            y = post_step(ts[k + 1], y)
        ys[k + 1] = y
    return Solution(ts, ys)


@dataclass
class Trajectory:
    """Sampled multi-DoF motion: ``y``, ``yd``, ``ydd`` have shape ``(len(t), n_dofs)``."""

    t: np.ndarray
    y: np.ndarray
    yd: np.ndarray
    ydd: np.ndarray
    x: Optional[np.ndarray] = None
    x_dot: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = len(self.t)
        self.y, self.yd, self.ydd = (_as_2d(a, n) for a in (self.y, self.yd, self.ydd))
        if self.x is None:
            self.x = np.full(n, np.nan)
        if self.x_dot is None:
            self.x_dot = np.full(n, np.nan)
        self.x = np.asarray(self.x, dtype=float)
        self.x_dot = np.asarray(self.x_dot, dtype=float)
        if n >= 2 and np.any(np.diff(self.t) <= 0):
            raise InvalidArgument("trajectory times must be strictly increasing")
        for a in (self.y, self.yd, self.ydd):
            if a.shape[0] != n:
                raise InvalidArgument("inconsistent trajectory column lengths")

    @property
    def n_dofs(self) -> int:
        return self.y.shape[1]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.y, axis=0), axis=1)))

    def at(self, t):
        """Linearly interpolated positions at times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([np.interp(t, self.t, self.y[:, j]) for j in range(self.n_dofs)], axis=1)

    def until(self, t_end: float) -> "Trajectory":
        m = self.t <= t_end + 1e-9
        return Trajectory(self.t[m], self.y[m], self.yd[m], self.ydd[m], self.x[m], self.x_dot[m],
                          dict(self.meta))


def _as_2d(a, n):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(n, 1) if a.shape[0] == n else a.reshape(1, -1)
    return a


@dataclass
class QuaternionTrajectory:
    """Orientation motion: quaternions ``[w, x, y, z]`` plus world-frame rates."""

    t: np.ndarray
    Q: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    eta: np.ndarray
    eta_dot: np.ndarray
    eta_ddot: np.ndarray
    x: np.ndarray
    meta: dict = field(default_factory=dict)

    def as_eta_trajectory(self) -> Trajectory:
        return Trajectory(self.t, self.eta, self.eta_dot, self.eta_ddot, self.x, meta=dict(self.meta))


# --------------------------------------------------------------------------
# comparisons


def mirror_error(forward: Trajectory, backward: Trajectory, T: float) -> float:
    """``sup_t |y_b(t) - y_f(T - t)|`` over ``t in [0, T]``."""
    t = backward.t[backward.t <= T + 1e-9]
    yb = backward.y[: len(t)]
    yf = forward.at(np.clip(T - t, forward.t[0], forward.t[-1]))
    return float(np.max(np.abs(yb - yf)))


def coincide_error(a: Trajectory, b: Trajectory) -> float:
    """Sup-norm position difference over the common time span (``b`` interpolated)."""
    m = a.t <= b.t[-1] + 1e-9
    return float(np.max(np.abs(a.y[m] - b.at(a.t[m]))))


# --------------------------------------------------------------------------
# demonstrations


def min_jerk(s):
    """Normalized fifth-order profile ``10 s^3 - 15 s^4 + 6 s^5`` and two derivatives."""
    s = np.asarray(s, dtype=float)
    p = s ** 3 * (10 - 15 * s + 6 * s ** 2)
    dp = 30 * s ** 2 * (1 - s) ** 2
    ddp = 60 * s * (1 - s) * (1 - 2 * s)
    return p, dp, ddp


def min_jerk_demo(y0=0.0, g=1.0, T=2.0, dt=DEFAULT_DT) -> Trajectory:
    """Minimum-jerk point-to-point motion sampled on a uniform grid."""
    if not T > 0:
        raise InvalidArgument("T must be > 0")
    n = n_steps(T, dt)
    if not math.isclose(n * dt, T, rel_tol=1e-9, abs_tol=1e-12):
        raise InvalidArgument(f"T={T} is not a multiple of dt={dt}")
    y0, g = np.atleast_1d(np.asarray(y0, float)), np.atleast_1d(np.asarray(g, float))
    t = dt * np.arange(n + 1)
    p, dp, ddp = min_jerk(t / T)
    amp = g - y0
    return Trajectory(t, y0 + np.outer(p, amp), np.outer(dp / T, amp), np.outer(ddp / T ** 2, amp),
                      meta={"kind": "min_jerk", "T": T})


def sigmoid_arcs_demo(T=2.0, dt=DEFAULT_DT, start=(0.0, 0.0), goal=(1.0, 0.4), bump=0.6,
                      width=0.12) -> Trajectory:
    """Smooth planar curve built from two sigmoid arcs.

    The first coordinate advances from ``start[0]`` to ``goal[0]``; the second
    rises over a hump of height ``bump`` above the straight line and settles
    at ``goal[1]``. Timing follows a minimum-jerk profile so the velocity
    vanishes at both ends.
    """
    n = n_steps(T, dt)
    t = dt * np.arange(n + 1)
    s, ds, dds = min_jerk(t / T)
    ds, dds = ds / T, dds / T ** 2
    start, goal = np.asarray(start, float), np.asarray(goal, float)

    def sig(u, c):
        e = np.exp(-(u - c) / width)
        f = 1.0 / (1.0 + e)
        df = f * (1 - f) / width
        ddf = df * (1 - 2 * f) / width
        return f, df, ddf

    # hump = rising arc minus falling arc, normalized so that it starts and ends at 0
    a, da, dda = sig(s, 0.3)
    b, db, ddb = sig(s, 0.7)
    a0, b0 = sig(np.array(0.0), 0.3)[0], sig(np.array(0.0), 0.7)[0]
    a1, b1 = sig(np.array(1.0), 0.3)[0], sig(np.array(1.0), 0.7)[0]
    lin = s
    # remove the residual end offsets with a linear correction in s
    off0, off1 = a0 - b0, a1 - b1
    hump = (a - b) - off0 - (off1 - off0) * lin
    dhump = (da - db) - (off1 - off0)
    ddhump = dda - ddb
    peak = np.max(hump)
    hump, dhump, ddhump = hump / peak, dhump / peak, ddhump / peak

    y = np.empty((n + 1, 2))
    yd = np.empty_like(y)
    ydd = np.empty_like(y)
    y[:, 0] = start[0] + (goal[0] - start[0]) * s
    yd[:, 0] = (goal[0] - start[0]) * ds
    ydd[:, 0] = (goal[0] - start[0]) * dds
    q = start[1] + (goal[1] - start[1]) * s + bump * hump
    dq_ds = (goal[1] - start[1]) + bump * dhump
    ddq_ds = bump * ddhump
    y[:, 1] = q
    yd[:, 1] = dq_ds * ds
    ydd[:, 1] = ddq_ds * ds ** 2 + dq_ds * dds
    return Trajectory(t, y, yd, ydd, meta={"kind": "sigmoid_arcs", "T": T})


def differentiate(t, y):
    """Central-difference velocity and acceleration (second-order one-sided ends)."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    yd = np.gradient(y, t, axis=0, edge_order=2)
    ydd = np.gradient(yd, t, axis=0, edge_order=2)
    return yd, ydd


def settling_time(t, err, threshold, t_start=0.0) -> float:
    """Time after ``t_start`` beyond which ``|err|`` stays below ``threshold``.

    The crossing is located by linear interpolation between samples.
    """
    t = np.asarray(t, float)
    e = np.abs(np.asarray(err, float))
    if e.ndim > 1:
        e = np.max(e, axis=1)
    above = np.nonzero((e > threshold) & (t >= t_start - 1e-12))[0]
    if len(above) == 0:
        return 0.0
    k = above[-1]
    if k + 1 >= len(t):
        return float("inf")
    # e[k] > threshold >= e[k+1]
    frac = (e[k] - threshold) / (e[k] - e[k + 1])
    return float(t[k] + frac * (t[k + 1] - t[k]) - t_start)
