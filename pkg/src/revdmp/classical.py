"""Classical DMP with a gated forcing term, plus its impedance-form analysis.

    tau z' = alpha_z (beta_z (g - y) - z) + g_f(x) (g - y0) f_s(x)
    tau y' = z
    tau x' = h(x)

Besides training and rollouts this module exposes the equivalent
reference-tracking form (the learned demo scaled by ``k_s`` in space and
``k_t = tau_d / tau`` in time, tracked with gains ``alpha_z beta_z / tau^2``
and ``alpha_z / tau``) and the residual that appears when the phase is run
backwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .basis import KernelSet, fit_weights, make_kernels
from .errors import DegenerateDemoError, InvalidArgument
from .phase import FORWARD, CanonicalSystem, PhaseStopConfig, classical_tau_stop, normalize_direction
from .reversible import Perturbation, _make_cs, _vec
from .sim import Trajectory, check_finite, default_dt, differentiate, integrate, n_steps, rk4_step

DEGENERATE_EPS = 1e-8
GATE_EPS = 1e-6


@dataclass(frozen=True)
class Gating:
    """Gating of the forcing term over normalized progress ``s in [0, 1]``.

    ``exponential``: ``exp(-a_g s)``; ``linear``: ``1 - s``;
    ``sigmoid``: ``1 / (1 + exp(a_g (s - center)))``.
    """

    kind: str = "exponential"
    a_g: float = 4.6
    center: float = 0.9

    def __post_init__(self):
        if self.kind not in ("exponential", "linear", "sigmoid"):
            raise InvalidArgument(f"unknown gating {self.kind!r}")
        if self.kind != "linear" and not self.a_g > 0:
            raise InvalidArgument("a_g must be > 0")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "exponential":
            return np.exp(-self.a_g * s)
        if self.kind == "linear":
            return np.clip(1.0 - s, 0.0, 1.0)
        return 1.0 / (1.0 + np.exp(self.a_g * (s - self.center)))


@dataclass(frozen=True)
class ClassicalDMP:
    """Trained classical DMP (one or more DoFs sharing a canonical system).

    The demonstration is kept (``demo``) because the impedance-form analysis
    replays it directly.
    """

    kernels: KernelSet
    w: np.ndarray
    alpha_z: float
    beta_z: float
    gating: Gating
    y0_d: np.ndarray
    g_d: np.ndarray
    cs: CanonicalSystem
    demo: Trajectory = field(repr=False)
    fit_residual: float = float("nan")

    def __post_init__(self):
        if not (self.alpha_z > 0 and self.beta_z > 0):
            raise InvalidArgument("alpha_z and beta_z must be > 0")
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w[:, None] if w.ndim == 1 else w)
        amp = np.asarray(self.g_d) - np.asarray(self.y0_d)
        if np.any(np.abs(amp) < DEGENERATE_EPS):
            raise DegenerateDemoError("demonstration goal equals its start; forcing term undefined")

    @property
    def n_dofs(self) -> int:
        return self.w.shape[1]

    @property
    def tau_d(self) -> float:
        return self.cs.tau

    @classmethod
    def train(cls, demo: Trajectory, n_kernels: int = 30, a_h: float = 1.0,
              alpha_z: float = 20.0, beta_z: Optional[float] = None,
              gating: Gating = Gating(), canonical="linear", lam: float = 1e-8,
              method: str = "ls", differentiate_demo: bool = False) -> "ClassicalDMP":
        """Fit the forcing term to a demonstration.

        ``demo.yd``/``demo.ydd`` are used when finite; otherwise (or with
        ``differentiate_demo``) they are obtained by central differences.
        ``beta_z`` defaults to ``alpha_z / 4`` (critical damping).
        """
        beta_z = alpha_z / 4.0 if beta_z is None else beta_z
        t = demo.t - demo.t[0]
        if len(t) < 2:
            raise InvalidArgument("demo needs >= 2 samples")
        y = demo.y
        yd, ydd = demo.yd, demo.ydd
        if differentiate_demo or not (np.all(np.isfinite(yd)) and np.all(np.isfinite(ydd))):
            yd, ydd = differentiate(t, y)
        y0, g = y[0].copy(), y[-1].copy()
        if np.any(np.abs(g - y0) < DEGENERATE_EPS):
            raise DegenerateDemoError("demonstration goal equals its start; forcing term undefined")
        T = float(t[-1])
        cs = _make_cs(canonical, T)
        xs = cs.phase_at(t)
        ks = make_kernels(n_kernels, cs, a_h)
        gate = gating(_progress(cs, xs))
        # gated forcing g_f(x) f_s(x) needed to replay the demo exactly
        target = (T ** 2 * ydd - alpha_z * beta_z * (g - y) + alpha_z * T * yd) / (g - y0)
        # samples where the gate has vanished carry no information about f_s
        keep = gate > GATE_EPS
        if np.count_nonzero(keep) < 2:
            raise InvalidArgument("gating function vanishes over the whole demonstration")
        fs = target[keep] / gate[keep, None]
        # pin the last usable sample so the forcing is exact where the motion ends
        last = np.nonzero(keep)[0][-1]
        w = fit_weights(ks, xs[keep], fs, lam=lam, method=method, pin=(xs[last], fs[-1:]))
        resid = float(np.max(np.abs(gate[:, None] * (ks.eval(xs) @ w) - target)))
        stored = Trajectory(t, y, yd, ydd, meta=dict(demo.meta))
        return cls(ks, w, alpha_z, beta_z, gating, y0, g, cs, stored, resid)

    def gated_forcing(self, x):
        """``g_f(x) f_s(x)`` per DoF (shape ``(n,)`` or ``(M, n)``)."""
        gate = self.gating(_progress(self.cs, x))
        return np.asarray(gate)[..., None] * (self.kernels.eval(x) @ self.w)

    def effective_gains(self, tau: Optional[float] = None):
        """Stiffness ``alpha_z beta_z / tau^2`` and damping ``alpha_z / tau``."""
        tau = self.tau_d if tau is None else tau
        return self.alpha_z * self.beta_z / tau ** 2, self.alpha_z / tau

    def rollout(self, direction: str = FORWARD, tau: Optional[float] = None,
                duration: Optional[float] = None, dt: Optional[float] = None, *,
                goal=None, start=None, stop: Optional[PhaseStopConfig] = None,
                events: Sequence[Perturbation] = (), couplings=(), y_init=None,
                z_init=None) -> Trajectory:
        """Integrate the classical DMP.

        Backward runs flip the phase and start at ``goal`` with zero velocity;
        the goal attractor still pulls towards ``goal``. Phase stopping
        stretches ``tau`` as ``tau (1 + a_d |d|)``. Couplings enter the
        ``tau``-scaled equations (``tau y' = z + c_v``, ``tau z' = ... + c_a``).
        """
        direction = normalize_direction(direction)
        tau = self.tau_d if tau is None else float(tau)
        dt = default_dt() if dt is None else dt
        duration = 1.5 * tau if duration is None else duration
        n = self.n_dofs
        cs = self.cs.with_tau(tau).with_direction(direction)
        g = self.g_d.copy() if goal is None else _vec(goal, n)
        y0 = self.y0_d.copy() if start is None else _vec(start, n)
        anchors = {"g": g, "y0": y0}
        az, bz = self.alpha_z, self.beta_z
        couplings = tuple(couplings)

        def tau_at(t):
            return tau if stop is None else classical_tau_stop(tau, stop, t)

        def rhs(t, s):
            x, y, z = s[0], s[1:1 + n], s[1 + n:]
            te = tau_at(t)
            f = self.gated_forcing(x)
            cv, ca = _couplings(couplings, y, z, te)
            xd = cs.rate(x) * tau / te
            dz = (az * (bz * (anchors["g"] - y) - z) + f * (anchors["g"] - anchors["y0"]) + ca) / te
            return np.concatenate(([xd], (z + cv) / te, dz))

        steps = n_steps(duration, dt)
        ts = dt * np.arange(steps + 1)
        y_start = (g if direction != FORWARD else y0) if y_init is None else _vec(y_init, n)
        s = np.concatenate(([cs.start], y_start, np.zeros(n) if z_init is None else _vec(z_init, n)))
        pending = sorted(events, key=lambda e: e.t)
        S = np.empty((steps + 1, len(s)))
        for k in range(steps + 1):
            t = ts[k]
            while pending and pending[0].t <= t + 1e-6 * dt:
                ev = pending.pop(0)
                if ev.goal is not None:
                    anchors["g"] = _vec(ev.goal, n)
                if ev.start is not None:
                    anchors["y0"] = _vec(ev.start, n)
                if ev.kick is not None:
                    s[1:1 + n] += _vec(ev.kick, n)
            S[k] = s
            if k == steps:
                break
            s = rk4_step(rhs, t, s, dt)
            check_finite(ts[k + 1], s)
            s[0] = cs.clamp(s[0])
        Y, Zs = S[:, 1:1 + n], S[:, 1 + n:]
        Yd = np.empty_like(Y)
        Ydd = np.empty_like(Y)
        CA = np.zeros_like(Y)
        xdot = np.empty(steps + 1)
        # rates re-evaluated with the anchors in force at each sample
        anchors_hist = _anchor_history(ts, self, events, g, y0, dt)
        for k in range(steps + 1):
            anchors["g"], anchors["y0"] = anchors_hist[k]
            d = rhs(ts[k], S[k])
            te = tau_at(ts[k])
            Yd[k] = d[1:1 + n]
            dte = 0.0 if stop is None else tau * stop.factor_rate(ts[k])
            Ydd[k] = d[1 + n:] / te - Zs[k] * dte / te ** 2
            xdot[k] = d[0]
            if couplings:
                CA[k] = _couplings(couplings, Y[k], Zs[k], te)[1]
        meta = {"model": "classical", "direction": direction, "tau": tau, "dt": dt,
                "goal": g.tolist(), "start": y0.tolist(), "coupling_acc": CA}
        return Trajectory(ts, Y, Yd, Ydd, S[:, 0], xdot, meta)


def _couplings(couplings, y, z, tau):
    if not couplings:
        return 0.0, 0.0
    cv = sum(c.velocity(y) for c in couplings)
    yd = (z + cv) / tau
    return cv, sum(c.acceleration(y, yd) for c in couplings)


def _anchor_history(ts, model, events, g, y0, dt):
    hist = []
    pending = sorted(events, key=lambda e: e.t)
    g, y0 = g.copy(), y0.copy()
    for t in ts:
        while pending and pending[0].t <= t + 1e-6 * dt:
            ev = pending.pop(0)
            if ev.goal is not None:
                g = _vec(ev.goal, model.n_dofs)
            if ev.start is not None:
                y0 = _vec(ev.start, model.n_dofs)
        hist.append((g, y0))
    return hist


def _progress(cs: CanonicalSystem, x):
    return (np.asarray(x, dtype=float) - cs.x0) / (cs.xf - cs.x0)


def train_classical(demo: Trajectory, **kwargs) -> ClassicalDMP:
    return ClassicalDMP.train(demo, **kwargs)


# --------------------------------------------------------------------------
# impedance-form analysis


def scaling_factors(model: ClassicalDMP, g, y0, tau):
    """``k_s = (g - y0) / (g_d - y0_d)`` and ``k_t = tau_d / tau``."""
    n = model.n_dofs
    ks = (_vec(g, n) - _vec(y0, n)) / (model.g_d - model.y0_d)
    return ks, model.tau_d / tau


def impedance_form_reference(model: ClassicalDMP, g, y0, tau, t):
    """Demo scaled by ``k_s`` in space and ``k_t`` in time, with its derivatives.

    Returns ``(y_ref, yd_ref, ydd_ref)`` of shape ``(M, n)`` (or ``(n,)`` for
    scalar ``t``). The demo time ``t_1 = k_t t`` is clamped to the demo span.
    """
    ks, kt = scaling_factors(model, g, y0, tau)
    scalar = np.ndim(t) == 0
    t1 = np.clip(kt * np.atleast_1d(np.asarray(t, float)), 0.0, model.tau_d)
    d = model.demo
    cols = lambda a: np.stack([np.interp(t1, d.t, a[:, j]) for j in range(model.n_dofs)], axis=1)  # noqa: E731
    y_ref = ks * (cols(d.y) - model.y0_d) + _vec(y0, model.n_dofs)
    yd_ref = ks * kt * cols(d.yd)
    ydd_ref = ks * kt ** 2 * cols(d.ydd)
    if scalar:
        return y_ref[0], yd_ref[0], ydd_ref[0]
    return y_ref, yd_ref, ydd_ref


def impedance_rollout(model: ClassicalDMP, g=None, y0=None, tau=None, duration=None,
                      dt=None) -> Trajectory:
    """Integrate the tracking form ``ydd = ydd_ref - (a/tau)(yd - yd_ref) - (a b/tau^2)(y - y_ref)``."""
    g = model.g_d if g is None else g
    y0 = model.y0_d if y0 is None else y0
    tau = model.tau_d if tau is None else tau
    dt = default_dt() if dt is None else dt
    duration = 1.5 * tau if duration is None else duration
    n = model.n_dofs
    K, D = model.effective_gains(tau)

    def rhs(t, s):
        r, rd, rdd = impedance_form_reference(model, g, y0, tau, t)
        y, yd = s[:n], s[n:]
        return np.concatenate((yd, rdd - D * (yd - rd) - K * (y - r)))

    r0, rd0, _ = impedance_form_reference(model, g, y0, tau, 0.0)
    sol = integrate(rhs, np.concatenate((r0, rd0)), duration, dt)
    Ydd = np.array([rhs(t, s)[n:] for t, s in zip(sol.t, sol.y)])
    return Trajectory(sol.t, sol.y[:, :n], sol.y[:, n:], Ydd,
                      meta={"model": "classical-impedance", "tau": tau, "dt": dt})


@dataclass
class ReverseResidual:
    """Backward classical run compared against the time-mirrored demonstration."""

    t: np.ndarray
    y: np.ndarray
    y_rev: np.ndarray
    yd_rev: np.ndarray
    predicted: np.ndarray
    measured: np.ndarray
    tracking_error: np.ndarray
    rollout: Trajectory = field(repr=False)

    @property
    def max_tracking_error(self) -> float:
        return float(np.max(np.abs(self.tracking_error)))


def reverse_residual(model: ClassicalDMP, tau: Optional[float] = None, dt: Optional[float] = None
                     ) -> ReverseResidual:
    """Run the classical DMP with the phase reversed and expose the disturbance.

    Along the mirrored demo ``y_rev(t) = y_d(tau_d - k_t t)`` the dynamics read
    ``(ydd - ydd_rev) + (a/tau)(yd - yd_rev) + (a b/tau^2)(y - y_rev) = -2 (a/tau) yd_rev``.
    ``predicted`` is the right-hand side, ``measured`` the left-hand side
    evaluated on the actual backward rollout; both span ``t in [0, tau]``.
    """
    tau = model.tau_d if tau is None else tau
    dt = default_dt() if dt is None else dt
    traj = model.rollout("backward", tau=tau, duration=tau, dt=dt)
    kt = model.tau_d / tau
    t1 = np.clip(model.tau_d - kt * traj.t, 0.0, model.tau_d)
    d = model.demo
    cols = lambda a: np.stack([np.interp(t1, d.t, a[:, j]) for j in range(model.n_dofs)], axis=1)  # noqa: E731
    y_rev, yd_rev, ydd_rev = cols(d.y), -kt * cols(d.yd), kt ** 2 * cols(d.ydd)
    K, D = model.effective_gains(tau)
    predicted = -2.0 * D * yd_rev
    measured = (traj.ydd - ydd_rev) + D * (traj.yd - yd_rev) + K * (traj.y - y_rev)
    return ReverseResidual(traj.t, traj.y, y_rev, yd_rev, predicted, measured, traj.y - y_rev, traj)


def classical_step(model: ClassicalDMP, state, g, tau, dt, *, y0=None, couplings=(),
                   direction=FORWARD, t: float = 0.0):
    """One RK4 step of the ``(y, z, x)`` system; ``state`` is ``(y, z, x)``."""
    if not dt > 0 or not tau > 0:
        raise InvalidArgument("dt and tau must be > 0")
    n = model.n_dofs
    cs = model.cs.with_tau(tau).with_direction(direction)
    g = _vec(g, n)
    y0 = model.y0_d if y0 is None else _vec(y0, n)
    az, bz = model.alpha_z, model.beta_z

    def rhs(tt, s):
        x, y, z = s[0], s[1:1 + n], s[1 + n:]
        cv, ca = _couplings(couplings, y, z, tau)
        dz = (az * (bz * (g - y) - z) + model.gated_forcing(x) * (g - y0) + ca) / tau
        return np.concatenate(([cs.rate(x)], (z + cv) / tau, dz))

    y, z, x = state
    s = np.concatenate(([x], _vec(y, n), _vec(z, n)))
    s = rk4_step(rhs, t, s, dt)
    check_finite(t + dt, s)
    return s[1:1 + n], s[1 + n:], float(cs.clamp(s[0]))
