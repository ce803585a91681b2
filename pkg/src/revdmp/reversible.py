"""Reversible DMP: a learned, phase-parameterized reference tracked by linear dynamics.

The output obeys ``ydd = ydd_x - D (yd - yd_x) - K (y - y_x)`` where the
reference ``y_x = k_s (f_p(x) - f_p(x0)) + y0`` is the learned path
``f_p(x) = phi(x)^T w`` rescaled to the current start/goal. Running the phase
backwards retraces the same path in reverse.

Rollouts integrate the dynamics in tracking-error coordinates
``e = y - y_x``, ``de = z - yd_x``. This is an exact change of variables of
the equations above; it keeps the reference out of the integrated state so a
discontinuous phase rate (phase stopping, force-driven teaching) cannot leak
quadrature error into the output.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import KernelSet, fit_weights, make_kernels
from .errors import DegenerateDemoError, DomainError, InvalidArgument
from .phase import BACKWARD, FORWARD, CanonicalSystem, NominalPhase, PhaseStopConfig, normalize_direction
from .sim import Trajectory, check_finite, default_dt, n_steps, rk4_step

KS_DENOM_EPS = 1e-8
KS_MAX = 1e4


@dataclass(frozen=True)
class Perturbation:
    """Scheduled change applied at the first grid time ``>= t``.

    ``goal``/``start`` move the anchors (the output stays continuous and
    the reference jumps); ``kick`` displaces the output position.
    """

    t: float
    goal: Optional[Sequence[float]] = None
    start: Optional[Sequence[float]] = None
    kick: Optional[Sequence[float]] = None


@dataclass
class ReversibleState:
    y: np.ndarray
    z: np.ndarray
    x: float
    x_dot: float


# --------------------------------------------------------------------------
# shared tracking loop (also used for orientation)


def _sum_couplings(couplings, y, yd=None):
    cv = np.zeros_like(y)
    for c in couplings:
        cv = cv + c.velocity(y)
    if yd is None:
        return cv, None
    ca = np.zeros_like(y)
    for c in couplings:
        ca = ca + c.acceleration(y, yd + cv)
    return cv, ca


def track_reference(reference: Callable, K, D, phase, duration: float, dt: float, *,
                    init=None, couplings=(), events=(), apply_event=None,
                    check: Optional[Callable] = None):
    """Integrate ``ydd = r_dd - D (yd - r_d) - K (y - r)`` along a phase driver.

    Parameters
    ----------
    reference : callable
        ``reference(x, xd, xdd) -> (r, r_d, r_dd)``; must broadcast over
        arrays of phase samples, returning arrays of shape ``(M, n)``.
    K, D : array, shape (n,)
        Stiffness and damping.
    phase : NominalPhase, TeachPhase or CompliantPhase
    init : (y, yd), optional
        Initial output; defaults to sitting on the reference.
    couplings : sequence
        Objects with ``velocity(y)`` and ``acceleration(y, yd)``.
    events : sequence of Perturbation
    apply_event : callable
        ``apply_event(event, reference, y, z) -> (reference, y, z)``.
    check : callable, optional
        Called with ``(t, y)`` after each step; may raise.

    Returns
    -------
    dict of arrays ``t, x, x_dot, x_ddot, y, yd, ydd, z, coupling_acc``.
    """
    K = np.asarray(K, dtype=float)
    D = np.asarray(D, dtype=float)
    n = len(K)
    steps = n_steps(duration, dt)
    ts = dt * np.arange(steps + 1)
    ps = np.array(phase.initial_state(), dtype=float)
    p = len(ps)
    x, xd, xdd = phase.kinematics(0.0, ps)
    r, rd, _ = (np.asarray(a, float).reshape(n) for a in reference(x, xd, xdd))
    if init is None:
        eps, zeta = np.zeros(n), np.zeros(n)
    else:
        eps = np.asarray(init[0], float) - r
        zeta = np.asarray(init[1], float) - rd
    couplings = tuple(couplings)
    pending = sorted(events, key=lambda e: e.t)

    # bind the active reference for the closure below
    active = {"ref": reference}

    def rhs(t, s):
        dps = phase.derivative(t, s[:p])
        e, de = s[p:p + n], s[p + n:]
        if couplings:
            xx, xxd, xxdd = phase.kinematics(t, s[:p])
            rr, rrd, _ = active["ref"](xx, xxd, xxdd)
            y = np.asarray(rr, float).reshape(n) + e
            z = np.asarray(rrd, float).reshape(n) + de
            cv, ca = _sum_couplings(couplings, y, z)
        else:
            cv = ca = 0.0
        return np.concatenate((dps, de + cv, -D * de - K * e + ca))

    segments = []  # (first_index, reference)
    seg_start = 0
    xs = np.empty((steps + 1, 3))
    E = np.empty((steps + 1, n))
    Z = np.empty((steps + 1, n))
    s = np.concatenate((ps, eps, zeta))
    for k in range(steps + 1):
        t = ts[k]
        while pending and pending[0].t <= t + 0.5 * dt * 1e-6:
            ev = pending.pop(0)
            xx, xxd, xxdd = phase.kinematics(t, s[:p])
            rr, rrd, _ = (np.asarray(a, float).reshape(n) for a in active["ref"](xx, xxd, xxdd))
            y, z = rr + s[p:p + n], rrd + s[p + n:]
            new_ref, y, z = apply_event(ev, active["ref"], y, z)
            if new_ref is not active["ref"]:
                if k > seg_start:
                    segments.append((seg_start, active["ref"]))
                seg_start = k
                active["ref"] = new_ref
            rr, rrd, _ = (np.asarray(a, float).reshape(n) for a in new_ref(xx, xxd, xxdd))
            s[p:p + n], s[p + n:] = y - rr, z - rrd
        xs[k] = phase.kinematics(t, s[:p])
        E[k], Z[k] = s[p:p + n], s[p + n:]
        if k == steps:
            break
        s = rk4_step(rhs, t, s, dt)
        check_finite(ts[k + 1], s)
        s[:p] = phase.project(s[:p])
        if check is not None:
            xx, xxd, xxdd = phase.kinematics(ts[k + 1], s[:p])
            check(ts[k + 1], np.asarray(active["ref"](xx, xxd, xxdd)[0], float).reshape(n) + s[p:p + n])
    segments.append((seg_start, active["ref"]))

    Y = np.empty((steps + 1, n))
    R_d = np.empty((steps + 1, n))
    R_dd = np.empty((steps + 1, n))
    bounds = [a for a, _ in segments] + [steps + 1]
    for (a, ref), b in zip(segments, bounds[1:]):
        rr, rrd, rrdd = ref(xs[a:b, 0], xs[a:b, 1], xs[a:b, 2])
        Y[a:b], R_d[a:b], R_dd[a:b] = (np.asarray(v, float).reshape(b - a, n) for v in (rr, rrd, rrdd))
    Y += E
    Zv = R_d + Z
    CV = np.zeros((steps + 1, n))
    CA = np.zeros((steps + 1, n))
    if couplings:
        for k in range(steps + 1):
            CV[k], CA[k] = _sum_couplings(couplings, Y[k], Zv[k])
    return {
        "t": ts, "x": xs[:, 0], "x_dot": xs[:, 1], "x_ddot": xs[:, 2],
        "y": Y, "z": Zv, "yd": Zv + CV, "ydd": R_dd - D * Z - K * E + CA,
        "coupling_acc": CA, "coupling_vel": CV,
    }


# --------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class ReversibleDMP:
    """Trained reversible DMP for one or more position DoFs.

    Parameters
    ----------
    kernels : KernelSet
    w : array, shape (N, n_dofs)
        Weights of ``f_p`` per DoF.
    K, D : array, shape (n_dofs,)
        Stiffness (1/s^2) and damping (1/s). Independent of ``tau``.
    y0, g : array, shape (n_dofs,)
        Default start and goal (the demonstration endpoints).
    cs : CanonicalSystem
        Canonical system of the demonstration (``tau`` = demo duration).
    """

    kernels: KernelSet
    w: np.ndarray
    K: np.ndarray
    D: np.ndarray
    y0: np.ndarray
    g: np.ndarray
    cs: CanonicalSystem
    fit_residual: float = float("nan")
    fp_x0: np.ndarray = field(init=False)
    fp_xf: np.ndarray = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        n = w.shape[1]
        if w.shape[0] != self.kernels.n:
            raise InvalidArgument("weight rows must match the kernel count")
        set_ = lambda name, v: object.__setattr__(self, name, v)  # noqa: E731
        set_("w", w)
        for name in ("K", "D", "y0", "g"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (n,)).copy()
            set_(name, v)
        if np.any(~(self.K > 0)) or np.any(~(self.D > 0)):
            raise InvalidArgument("K and D must be > 0")
        fwd = self.cs.with_direction(FORWARD)
        set_("fp_x0", self.kernels.eval(fwd.x0) @ w)
        set_("fp_xf", self.kernels.eval(fwd.xf) @ w)
        denom = self.fp_xf - self.fp_x0
        if np.any(np.abs(denom) < KS_DENOM_EPS):
            bad = np.nonzero(np.abs(denom) < KS_DENOM_EPS)[0].tolist()
            raise DegenerateDemoError(f"learned path has (almost) equal endpoints on DoF {bad}; "
                                      "spatial scaling undefined")

    @property
    def n_dofs(self) -> int:
        return self.w.shape[1]

    @property
    def tau_d(self) -> float:
        return self.cs.tau

    @classmethod
    def train(cls, t, y, n_kernels: int = 30, a_h: float = 1.0, K=100.0, D=20.0,
              canonical: str = "linear", lam: float = 1e-8, method: str = "ls") -> "ReversibleDMP":
        """Fit the reversible DMP to demonstrated positions.

        Only positions are needed. Time is mapped to phase with the
        canonical system whose ``tau`` equals the demonstration length.
        """
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if len(t) < 2 or y.shape[0] != len(t):
            raise InvalidArgument("demo needs >= 2 samples with matching time stamps")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("demo time stamps must be strictly increasing")
        closed = np.abs(y[-1] - y[0]) <= KS_DENOM_EPS * np.maximum(1.0, np.ptp(y, axis=0))
        if np.any(closed):
            raise DegenerateDemoError(f"demonstration ends where it starts on DoF {np.nonzero(closed)[0].tolist()}; "
                                      "spatial scaling undefined")
        T = float(t[-1] - t[0])
        cs = _make_cs(canonical, T)
        xs = cs.phase_at(t - t[0])
        ks = make_kernels(n_kernels, cs, a_h)
        w = fit_weights(ks, xs, y, lam=lam, method=method)
        resid = float(np.max(np.abs(ks.eval(xs) @ w - y)))
        return cls(ks, w, K, D, y[0].copy(), y[-1].copy(), cs, resid)

    def fp(self, x, order: int = 0):
        """``f_p`` and its phase-derivatives, each of shape ``(..., n_dofs)``."""
        return tuple(b @ self.w for b in self.kernels.eval_derivs(x, order))

    def spatial_scale(self, goal=None, start=None) -> np.ndarray:
        g = self.g if goal is None else _vec(goal, self.n_dofs)
        y0 = self.y0 if start is None else _vec(start, self.n_dofs)
        ks = (g - y0) / (self.fp_xf - self.fp_x0)
        if np.any(np.abs(ks) > KS_MAX):
            raise DomainError(f"spatial scale {ks.tolist()} exceeds {KS_MAX:g}")
        return ks

    def reference_fn(self, goal=None, start=None):
        """Closure ``(x, xd, xdd) -> (y_x, yd_x, ydd_x)`` for fixed anchors."""
        ks = self.spatial_scale(goal, start)
        y0 = self.y0 if start is None else _vec(start, self.n_dofs)
        fp0 = self.fp_x0

        def ref(x, xd, xdd):
            f, df, ddf = self.fp(x, 2)
            xd = np.asarray(xd, float)[..., None]
            xdd = np.asarray(xdd, float)[..., None]
            return (ks * (f - fp0) + y0, ks * df * xd, ks * (ddf * xd * xd + df * xdd))

        ref.goal = y0 + ks * (self.fp_xf - fp0)
        ref.start = y0
        return ref

    def phase_driver(self, direction=FORWARD, tau=None, stop: Optional[PhaseStopConfig] = None):
        cs = self.cs.with_tau(self.tau_d if tau is None else tau).with_direction(direction)
        return NominalPhase(cs, stop)

    def rollout(self, direction: str = FORWARD, tau: Optional[float] = None,
                duration: Optional[float] = None, dt: Optional[float] = None, *,
                goal=None, start=None, K=None, D=None, stop: Optional[PhaseStopConfig] = None,
                phase=None, events: Sequence[Perturbation] = (), couplings=(),
                y_init=None, yd_init=None) -> Trajectory:
        """Integrate the DMP forward or backward.

        Forward starts at ``start`` on the reference; backward starts at
        ``goal`` with the reference velocity at the final phase. ``duration``
        defaults to ``1.5 * tau``. A custom ``phase`` driver (teach or
        compliant mode) overrides ``direction``/``tau``/``stop``.
        """
        direction = normalize_direction(direction)
        tau = self.tau_d if tau is None else float(tau)
        dt = default_dt() if dt is None else dt
        duration = 1.5 * tau if duration is None else duration
        phase = phase or self.phase_driver(direction, tau, stop)
        ref = self.reference_fn(goal, start)
        init = None
        if y_init is not None or yd_init is not None:
            x, xd, xdd = phase.kinematics(0.0, phase.initial_state())
            r, rd, _ = (np.asarray(a).reshape(self.n_dofs) for a in ref(x, xd, xdd))
            init = (r if y_init is None else _vec(y_init, self.n_dofs),
                    rd if yd_init is None else _vec(yd_init, self.n_dofs))
        out = track_reference(ref, self.K if K is None else _vec(K, self.n_dofs),
                              self.D if D is None else _vec(D, self.n_dofs), phase, duration, dt,
                              init=init, couplings=couplings, events=events,
                              apply_event=self._apply_event)
        meta = {"model": "reversible", "direction": direction, "tau": tau, "dt": dt,
                "goal": ref.goal.tolist(), "start": ref.start.tolist()}
        traj = Trajectory(out["t"], out["y"], out["yd"], out["ydd"], out["x"], out["x_dot"], meta)
        traj.meta["coupling_acc"] = out["coupling_acc"]
        traj.meta["coupling_vel"] = out["coupling_vel"]
        return traj

    def _apply_event(self, ev: Perturbation, ref, y, z):
        if ev.kick is not None:
            y = y + _vec(ev.kick, self.n_dofs)
        if ev.goal is not None or ev.start is not None:
            goal = ref.goal if ev.goal is None else ev.goal
            start = ref.start if ev.start is None else ev.start
            ref = self.reference_fn(goal, start)
        return ref, y, z


def reference(model: ReversibleDMP, x, x_dot, x_ddot, goal=None, start=None):
    """Scaled reference ``(y_x, yd_x, ydd_x)`` at phase ``x`` with rates ``x_dot``, ``x_ddot``."""
    return model.reference_fn(goal, start)(x, x_dot, x_ddot)


def train_reversible(t, y, **kwargs) -> ReversibleDMP:
    return ReversibleDMP.train(t, y, **kwargs)


def reversible_step(model: ReversibleDMP, state: ReversibleState, dt: float, *, t: float = 0.0,
                    tau: Optional[float] = None, direction: str = FORWARD, goal=None, start=None,
                    couplings=(), stop: Optional[PhaseStopConfig] = None) -> ReversibleState:
    """Advance one RK4 step from an explicit ``(y, z, x)`` state.

    The rollout loop is preferable for whole trajectories; this exposes the
    same dynamics for callers that own their simulation loop.
    """
    if not dt > 0:
        raise InvalidArgument("dt must be > 0")
    phase = model.phase_driver(direction, tau, stop)
    ref = model.reference_fn(goal, start)
    n = model.n_dofs
    K, D = model.K, model.D

    def rhs(tt, s):
        x = s[0]
        xd = phase.derivative(tt, s[:1])[0]
        _, xd_, xdd = phase.kinematics(tt, s[:1])
        r, rd, rdd = (np.asarray(a, float).reshape(n) for a in ref(x, xd_, xdd))
        y, z = s[1:1 + n], s[1 + n:]
        cv, ca = _sum_couplings(couplings, y, z)
        return np.concatenate(([xd], z + cv, rdd - D * (z - rd) - K * (y - r) + ca))

    s = np.concatenate(([state.x], np.asarray(state.y, float), np.asarray(state.z, float)))
    s = rk4_step(rhs, t, s, dt)
    check_finite(t + dt, s)
    x = phase.cs.clamp(s[0])
    xd = phase.kinematics(t + dt, np.array([x]))[1]
    return ReversibleState(s[1:1 + n], s[1 + n:], float(x), float(xd))


def _make_cs(canonical, T) -> CanonicalSystem:
    if isinstance(canonical, CanonicalSystem):
        return canonical.with_tau(T).with_direction(FORWARD)
    if canonical == "linear":
        return CanonicalSystem(tau=T)
    if canonical == "exponential":
        return CanonicalSystem.exponential(tau=T)
    raise InvalidArgument(f"unknown canonical system {canonical!r}")


def _vec(v, n) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size == 1:
        return np.full(n, float(a[0]))
    if a.size != n:
        raise InvalidArgument(f"expected {n} values, got {a.size}")
    return a.copy()
