"""Reversible DMP for unit-quaternion orientation.

Orientation is encoded in the log chart ``eta = log(Q * conj(Q0))``. Each
component of ``eta`` tracks the scaled learned reference
``eta_x = K_s f_q(x)`` with ``K_s = diag(eta_g / f_q(x_f))`` through the same
linear error dynamics as the position DMP, so the three axes are decoupled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rotations as rot
from .basis import KernelSet, fit_weights, make_kernels
from .errors import DegenerateDemoError, DomainError, InvalidArgument
from .phase import FORWARD, NominalPhase, PhaseStopConfig, normalize_direction
from .reversible import _make_cs, _vec, track_reference
from .sim import QuaternionTrajectory, default_dt

AXIS_EPS = 1e-8
CHART_MARGIN = 1e-6


@dataclass(frozen=True)
class OrientationDMP:
    """Trained orientation DMP.

    Parameters
    ----------
    kernels : KernelSet
    W : array, shape (N, 3)
        One weight column per rotation-vector component.
    K, D : array, shape (3,)
        Diagonal stiffness and damping.
    Q0, Qg : array, shape (4,)
        Default start and goal orientations (demo endpoints).
    cs : CanonicalSystem
    """

    kernels: KernelSet
    W: np.ndarray
    K: np.ndarray
    D: np.ndarray
    Q0: np.ndarray
    Qg: np.ndarray
    cs: object
    fit_residual: float = float("nan")
    fq_x0: np.ndarray = field(init=False)
    fq_xf: np.ndarray = field(init=False)

    def __post_init__(self):
        set_ = lambda name, v: object.__setattr__(self, name, v)  # noqa: E731
        W = np.asarray(self.W, dtype=float)
        if W.shape != (self.kernels.n, 3):
            raise InvalidArgument(f"W must have shape ({self.kernels.n}, 3), got {W.shape}")
        set_("W", W)
        for name in ("K", "D"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (3,)).copy()
            if np.any(~(v > 0)):
                raise InvalidArgument(f"{name} must be diagonal with positive entries")
            set_(name, v)
        set_("Q0", rot.normalize(self.Q0))
        set_("Qg", rot.normalize(self.Qg))
        fwd = self.cs.with_direction(FORWARD)
        set_("fq_x0", self.kernels.eval(fwd.x0) @ W)
        set_("fq_xf", self.kernels.eval(fwd.xf) @ W)
        if np.all(np.abs(self.fq_xf) < AXIS_EPS):
            raise DegenerateDemoError("demonstration has no rotation about any axis")

    @property
    def tau_d(self) -> float:
        return self.cs.tau

    @property
    def eta_g(self) -> np.ndarray:
        return rot.qlog(rot.qprod(self.Qg, rot.qconj(self.Q0)))

    @property
    def degenerate_axes(self) -> np.ndarray:
        return np.abs(self.fq_xf) < AXIS_EPS

    @classmethod
    def train(cls, t, Q, n_kernels: int = 30, a_h: float = 1.0, K=100.0, D=20.0,
              canonical: str = "linear", lam: float = 1e-8, method: str = "ls") -> "OrientationDMP":
        """Fit ``f_q`` to the demonstrated ``eta_d = log(Q_d * conj(Q_d0))``."""
        t = np.asarray(t, dtype=float)
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[1] != 4 or len(t) != len(Q) or len(t) < 2:
            raise InvalidArgument("demo needs >= 2 quaternion samples [w, x, y, z] with time stamps")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("demo time stamps must be strictly increasing")
        Q = rot.sign_continuous(Q)
        eta = rot.qlog(rot.qprod(Q, rot.qconj(Q[0])))
        if np.max(np.linalg.norm(eta, axis=1)) >= np.pi - CHART_MARGIN:
            raise DomainError("demonstrated rotation leaves the log chart (|eta| >= pi)")
        cs = _make_cs(canonical, float(t[-1] - t[0]))
        xs = cs.phase_at(t - t[0])
        ks = make_kernels(n_kernels, cs, a_h)
        W = fit_weights(ks, xs, eta, lam=lam, method=method)
        resid = float(np.max(np.abs(ks.eval(xs) @ W - eta)))
        return cls(ks, W, K, D, Q[0].copy(), Q[-1].copy(), cs, resid)

    def fq(self, x, order: int = 0):
        return tuple(b @ self.W for b in self.kernels.eval_derivs(x, order))

    def scaling(self, goal=None, start=None):
        """Per-axis ``K_s`` and ``eta_g`` for the requested anchors.

        Axes the demo never rotates about keep ``K_s = 1`` when the requested
        goal does not rotate about them either; otherwise the goal cannot be
        reached and :class:`DegenerateDemoError` is raised.
        """
        Q0 = self.Q0 if start is None else rot.normalize(start)
        Qg = self.Qg if goal is None else rot.normalize(goal)
        eta_g = rot.qlog(rot.qprod(Qg, rot.qconj(Q0)))
        bad = self.degenerate_axes
        if np.any(bad & (np.abs(eta_g) >= AXIS_EPS)):
            axes = [("x", "y", "z")[i] for i in np.nonzero(bad & (np.abs(eta_g) >= AXIS_EPS))[0]]
            raise DegenerateDemoError(f"demo has no rotation about axis {axes}; cannot scale to this goal")
        Ks = np.where(bad, 1.0, eta_g / np.where(bad, 1.0, self.fq_xf))
        return Ks, eta_g, Q0, Qg

    def reference_fn(self, goal=None, start=None):
        Ks, eta_g, Q0, Qg = self.scaling(goal, start)

        def ref(x, xd, xdd):
            f, df, ddf = self.fq(x, 2)
            xd = np.asarray(xd, float)[..., None]
            xdd = np.asarray(xdd, float)[..., None]
            return Ks * f, Ks * df * xd, Ks * (ddf * xd * xd + df * xdd)

        ref.goal, ref.start = Qg, Q0
        ref.eta_g = np.where(self.degenerate_axes, self.fq_xf, eta_g)
        return ref

    def rollout(self, direction: str = FORWARD, tau: Optional[float] = None,
                duration: Optional[float] = None, dt: Optional[float] = None, *,
                goal=None, start=None, stop: Optional[PhaseStopConfig] = None,
                omega_dot_variant: str = "corrected") -> QuaternionTrajectory:
        """Integrate forward (from ``start``) or backward (from ``goal``).

        Raises
        ------
        DomainError
            If ``|eta|`` reaches ``pi - 1e-6`` (outside the log chart).
        """
        direction = normalize_direction(direction)
        tau = self.tau_d if tau is None else float(tau)
        dt = default_dt() if dt is None else dt
        duration = 1.5 * tau if duration is None else duration
        ref = self.reference_fn(goal, start)
        if np.linalg.norm(ref.eta_g) >= np.pi - CHART_MARGIN:
            raise DomainError("goal rotation leaves the log chart (|eta_g| >= pi)")
        phase = NominalPhase(self.cs.with_tau(tau).with_direction(direction), stop)
        x, xd, xdd = phase.kinematics(0.0, phase.initial_state())
        _, rd, _ = (np.asarray(a).reshape(3) for a in ref(x, xd, xdd))
        eta0 = np.zeros(3) if direction == FORWARD else ref.eta_g

        def check(t, eta):
            if np.linalg.norm(eta) >= np.pi - CHART_MARGIN:
                raise DomainError(f"|eta| reached pi at t={t:.6g}; orientation left the log chart")

        out = track_reference(ref, self.K, self.D, phase, duration, dt, init=(eta0, rd), check=check)
        eta, eta_d, eta_dd = out["y"], out["yd"], out["ydd"]
        Qrel = rot.qexp(eta)
        Q = rot.qprod(Qrel, ref.start)
        omega = np.empty_like(eta)
        omega_dot = np.empty_like(eta)
        for k in range(len(eta)):
            omega[k] = rot.omega_from_eta(Qrel[k], eta_d[k])
            omega_dot[k] = rot.omega_dot_from_eta(Qrel[k], eta_d[k], eta_dd[k], omega[k],
                                                  variant=omega_dot_variant)
        meta = {"model": "orientation", "direction": direction, "tau": tau, "dt": dt,
                "goal": ref.goal.tolist(), "start": ref.start.tolist()}
        return QuaternionTrajectory(out["t"], Q, omega, omega_dot, eta, eta_d, eta_dd, out["x"], meta)


def train_orientation(t, Q, **kwargs) -> OrientationDMP:
    return OrientationDMP.train(t, Q, **kwargs)


def orientation_reference(model: OrientationDMP, x, x_dot, x_ddot, goal=None, start=None):
    """``(eta_x, eta_x_dot, eta_x_ddot)`` at phase ``x``."""
    return model.reference_fn(goal, start)(x, x_dot, x_ddot)


def slerp_demo(Q0, Qg, T: float = 2.0, dt: Optional[float] = None):
    """Minimum-jerk rotation from ``Q0`` to ``Qg`` about a fixed axis."""
    from .sim import min_jerk, n_steps

    dt = default_dt() if dt is None else dt
    t = dt * np.arange(n_steps(T, dt) + 1)
    s = min_jerk(t / T)[0]
    eta_g = rot.qlog(rot.qprod(rot.normalize(Qg), rot.qconj(rot.normalize(Q0))))
    return t, rot.qprod(rot.qexp(s[:, None] * eta_g), rot.normalize(Q0))


def spline_demo(eta_coeffs, Q0=rot.IDENTITY, T: float = 2.0, dt: Optional[float] = None):
    """Rotation whose chart coordinates follow a min-jerk profile towards
    ``eta_coeffs`` plus a per-axis bump, so the axes move non-proportionally.

    Velocity and acceleration vanish at both ends.
    """
    from .sim import min_jerk, n_steps

    dt = default_dt() if dt is None else dt
    t = dt * np.arange(n_steps(T, dt) + 1)
    s = t / T
    p = min_jerk(s)[0]
    c = _vec(eta_coeffs, 3)
    bumps = np.array([0.3, -0.2, 0.25])
    shape = (s ** 3 * (1 - s) ** 3 * 64.0)[:, None] * bumps
    eta = p[:, None] * c + shape
    return t, rot.qprod(rot.qexp(eta), rot.normalize(Q0))
