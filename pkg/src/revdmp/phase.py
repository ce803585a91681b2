"""Canonical systems driving the phase variable.

Three families live here:

* :class:`CanonicalSystem` -- the nominal first-order phase ``tau * xd = h(x)``
  (linear or exponential), runnable forward or backward.
* :class:`PhaseStop` -- disturbance-based slowing of the phase, plus the
  equivalent temporal-scaling modulation used by the classical DMP.
* Force-driven second-order phase dynamics used for teaching velocity
  profiles (``teach`` mode) and for bidirectional compliant driving
  (``compliant`` mode).

The ``*Phase`` driver classes at the bottom adapt each family to the common
rollout loop: they own a small state vector and report ``(x, xd, xdd)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument
from .sim import rk4_step

FORWARD = "forward"
BACKWARD = "backward"
_DIRECTIONS = {FORWARD: FORWARD, BACKWARD: BACKWARD, "fwd": FORWARD, "bwd": BACKWARD}


def normalize_direction(direction: str) -> str:
    try:
        return _DIRECTIONS[direction]
    except KeyError:
        raise InvalidArgument(f"unknown direction {direction!r}") from None


@dataclass(frozen=True)
class CanonicalSystem:
    """Nominal canonical system ``tau * xd = +-h(x)``.

    Parameters
    ----------
    tau : float
        Temporal scaling (s). For both kinds the phase travels from ``x0`` to
        ``xf`` in exactly ``tau`` seconds.
    x0, xf : float
        Initial and final phase of the forward motion.
    kind : {"linear", "exponential"}
        ``h(x) = xf - x0`` or ``h(x) = -a_x * x``.
    a_x : float, optional
        Decay rate of the exponential kind. Must equal ``ln(x0 / xf)``; if
        omitted it is derived from ``x0``/``xf``. Use :meth:`exponential` to
        build one from ``a_x`` alone.
    direction : {"forward", "backward"}
        Backward flips the sign of the rate and starts at ``xf``.
    """

    tau: float = 1.0
    x0: float = 0.0
    xf: float = 1.0
    kind: str = "linear"
    a_x: Optional[float] = None
    direction: str = FORWARD

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgument(f"tau must be > 0, got {self.tau}")
        if self.x0 == self.xf:
            raise InvalidArgument("x0 and xf must differ")
        object.__setattr__(self, "direction", normalize_direction(self.direction))
        if self.kind == "exponential":
            if self.x0 * self.xf <= 0 or abs(self.xf) >= abs(self.x0):
                raise InvalidArgument("exponential phase needs |xf| < |x0| with equal signs")
            a_x = math.log(self.x0 / self.xf)
            if self.a_x is None:
                object.__setattr__(self, "a_x", a_x)
            elif not math.isclose(self.a_x, a_x, rel_tol=1e-12):
                raise InvalidArgument("a_x inconsistent with x0/xf; use CanonicalSystem.exponential")
        elif self.kind != "linear":
            raise InvalidArgument(f"unknown canonical kind {self.kind!r}")

    @classmethod
    def exponential(cls, tau=1.0, x0=1.0, a_x=math.log(100.0), direction=FORWARD):
        """Exponential phase with ``x(tau) = x0 * exp(-a_x)`` (0.01 x0 by default)."""
        return cls(tau=tau, x0=x0, xf=x0 * math.exp(-a_x), kind="exponential", direction=direction)

    @property
    def lo(self) -> float:
        return min(self.x0, self.xf)

    @property
    def hi(self) -> float:
        return max(self.x0, self.xf)

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == FORWARD else -1.0

    @property
    def start(self) -> float:
        return self.x0 if self.direction == FORWARD else self.xf

    @property
    def terminal(self) -> float:
        return self.xf if self.direction == FORWARD else self.x0

    def with_tau(self, tau: float) -> "CanonicalSystem":
        return replace(self, tau=tau)

    def with_direction(self, direction: str) -> "CanonicalSystem":
        return replace(self, direction=normalize_direction(direction))

    def reversed(self) -> "CanonicalSystem":
        return self.with_direction(BACKWARD if self.direction == FORWARD else FORWARD)

    def h(self, x: float) -> float:
        if x < self.lo or x > self.hi:
            return 0.0
        if self.kind == "linear":
            return self.xf - self.x0
        return -self.a_x * x

    def dh(self, x: float) -> float:
        return 0.0 if self.kind == "linear" else -self.a_x

    def finished(self, x: float) -> bool:
        """True once the phase sits at (or past) its terminal value."""
        towards = (self.terminal - self.start)
        return (self.terminal - x) * towards <= 0.0

    def rate(self, x: float) -> float:
        if self.finished(x):
            return 0.0
        return self.sign * self.h(x) / self.tau

    def accel(self, x: float, x_dot: float) -> float:
        """Phase acceleration along the nominal flow given the current rate."""
        if x_dot == 0.0:
            return 0.0
        return self.sign * self.dh(x) * x_dot / self.tau

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def phase_at(self, t):
        """Closed-form phase at time ``t`` (scalar or array), clamped after ``tau``."""
        s = np.clip(np.asarray(t, dtype=float) / self.tau, 0.0, 1.0)
        if self.direction == BACKWARD:
            s = 1.0 - s
        if self.kind == "linear":
            x = self.x0 + (self.xf - self.x0) * s
        else:
            x = self.x0 * np.exp(-self.a_x * s)
        return x if np.ndim(x) else float(x)


def phase_rate(cs: CanonicalSystem, x: float) -> float:
    """``h(x)/tau`` with the direction sign; zero outside the phase interval."""
    return cs.rate(x)


# --------------------------------------------------------------------------
# disturbance signals and phase stopping


class Signal:
    """Scalar time signal with a derivative (central differences by default)."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def derivative(self, t: float, h: float = 1e-6) -> float:
        return (self(t + h) - self(t - h)) / (2 * h)


class FunctionSignal(Signal):
    def __init__(self, fn: Callable[[float], float], dfn: Optional[Callable[[float], float]] = None):
        self.fn = fn
        self.dfn = dfn

    def __call__(self, t):
        return float(self.fn(t))

    def derivative(self, t, h=1e-6):
        if self.dfn is not None:
            return float(self.dfn(t))
        return super().derivative(t, h)


class SampledSignal(Signal):
    """Piecewise-linear signal through samples; held constant outside them."""

    def __init__(self, t, values):
        self.t = np.asarray(t, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.values.shape or len(self.t) < 2:
            raise InvalidArgument("sampled signal needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(self.t) <= 0):
            raise InvalidArgument("sample times must be strictly increasing")
        self._slopes = np.diff(self.values) / np.diff(self.t)

    def __call__(self, t):
        return float(np.interp(t, self.t, self.values))

    def derivative(self, t, h=None):
        if t < self.t[0] or t >= self.t[-1]:
            return 0.0
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        return float(self._slopes[i])


@dataclass(frozen=True)
class TrapezoidalPulse(Signal):
    """Trapezoid: zero, linear rise, plateau at ``amplitude``, linear fall, zero."""

    start: float
    rise: float = 0.1
    plateau: float = 0.5
    fall: float = 0.1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.rise <= 0 or self.fall <= 0 or self.plateau < 0:
            raise InvalidArgument("pulse rise/fall must be > 0 and plateau >= 0")

    @property
    def plateau_start(self) -> float:
        return self.start + self.rise

    @property
    def plateau_end(self) -> float:
        return self.start + self.rise + self.plateau

    @property
    def end(self) -> float:
        return self.plateau_end + self.fall

    def __call__(self, t):
        if t <= self.start or t >= self.end:
            return 0.0
        if t < self.plateau_start:
            return self.amplitude * (t - self.start) / self.rise
        if t <= self.plateau_end:
            return self.amplitude
        return self.amplitude * (self.end - t) / self.fall

    def derivative(self, t, h=None):
        if t <= self.start or t >= self.end:
            return 0.0
        if t < self.plateau_start:
            return self.amplitude / self.rise
        if t <= self.plateau_end:
            return 0.0
        return -self.amplitude / self.fall

    def mirrored(self, T: float) -> "TrapezoidalPulse":
        """The pulse seen backwards in time about ``T``: ``p'(t) = p(T - t)``."""
        return TrapezoidalPulse(T - self.end, self.fall, self.plateau, self.rise, self.amplitude)


def as_signal(d) -> Signal:
    if isinstance(d, Signal):
        return d
    if callable(d):
        return FunctionSignal(d)
    return FunctionSignal(lambda t, c=float(d): c, lambda t: 0.0)


@dataclass(frozen=True)
class PhaseStopConfig:
    """Phase stopping ``tau*xd = h(x) / (1 + a_d |d(t)|)``."""

    a_d: float
    d: Signal = field(default_factory=lambda: as_signal(0.0))

    def __post_init__(self):
        if not self.a_d > 0:
            raise InvalidArgument("a_d must be > 0")
        object.__setattr__(self, "d", as_signal(self.d))

    def factor(self, t: float) -> float:
        return 1.0 + self.a_d * abs(self.d(t))

    def factor_rate(self, t: float) -> float:
        v = self.d(t)
        if v == 0.0:
            # |d| has a kink at zero; take the one-sided slope into the pulse
            return self.a_d * abs(self.d.derivative(t))
        return self.a_d * math.copysign(1.0, v) * self.d.derivative(t)


def stopped_phase_rate(cs: CanonicalSystem, x: float, stop: PhaseStopConfig, t: float) -> float:
    return cs.rate(x) / stop.factor(t)


def pulse_time_loss(pulse: TrapezoidalPulse, a_d: float) -> float:
    """Delay a trapezoidal disturbance adds to a linear-phase motion.

    The linear canonical system advances at ``1 / (tau (1 + a_d |d|))``,
    so the motion finishes ``int (1 - 1/(1 + a_d |d|)) dt`` later than
    nominal (provided the pulse ends before the phase does).
    """
    c = a_d * abs(pulse.amplitude)
    if c == 0.0:
        return 0.0
    # the rise and fall ramps integrate to (ramp / c) ln(1 + c)
    ramps = (pulse.rise + pulse.fall) * (1.0 - math.log1p(c) / c)
    return ramps + pulse.plateau * c / (1.0 + c)


def classical_tau_stop(tau: float, stop: PhaseStopConfig, t: float) -> float:
    """Temporal scaling ``tau * (1 + a_d |d(t)|)`` halting a classical DMP."""
    if not tau > 0:
        raise InvalidArgument("tau must be > 0")
    return tau * stop.factor(t)


# --------------------------------------------------------------------------
# force-driven phase


def clip_forward(f_v: float) -> float:
    """Rejects pulling forces so the taught phase only moves forward."""
    return f_v if f_v >= 0.0 else 0.0


@dataclass(frozen=True)
class ForceDrivenCanonical:
    """Second-order phase state ``(x, x_dot)`` with damping ``d_x``.

    The teaching phase runs on ``[x_start, x_end]`` (``[0, 1]`` by default).
    """

    d_x: float
    x: float = 0.0
    x_dot: float = 0.0
    x_end: float = 1.0

    def __post_init__(self):
        if not self.d_x > 0:
            raise InvalidArgument("d_x must be > 0")


def teach_accel(d_x: float, x: float, x_dot: float, f_v: float, x_end: float = 1.0) -> float:
    if x >= x_end:
        return 0.0
    return -d_x * x_dot + clip_forward(f_v)


def compliant_accel(d_x: float, x_dot: float, f_v: float, x_dot_d: float) -> float:
    return -d_x * (x_dot - x_dot_d) + f_v


def compliant_target_rate(tau: float, a_d: float, force_norm: float, direction: str = FORWARD,
                          span: float = 1.0) -> float:
    """Nominal phase rate ``+-span / (tau (1 + a_d |F|))`` for compliant driving."""
    sign = 1.0 if normalize_direction(direction) == FORWARD else -1.0
    return sign * span / (tau * (1.0 + a_d * abs(force_norm)))


def _check_dt(dt):
    if not dt > 0:
        raise InvalidArgument(f"dt must be > 0, got {dt}")


def teach_phase_step(fd: ForceDrivenCanonical, f_v: float, dt: float) -> ForceDrivenCanonical:
    """One RK4 step of the teach-mode phase under a force held over ``dt``."""
    _check_dt(dt)
    if fd.x >= fd.x_end:
        return replace(fd, x_dot=0.0)

    def f(t, s):
        return np.array([s[1], teach_accel(fd.d_x, s[0], s[1], f_v, fd.x_end)])

    x, xd = rk4_step(f, 0.0, np.array([fd.x, fd.x_dot]), dt)
    x, xd = max(x, fd.x), max(xd, 0.0)
    if x >= fd.x_end:
        x, xd = fd.x_end, 0.0
    return replace(fd, x=float(x), x_dot=float(xd))


def compliant_phase_step(fd: ForceDrivenCanonical, f_v: float, x_dot_d: float, dt: float,
                         x_start: float = 0.0) -> ForceDrivenCanonical:
    """One RK4 step of ``xdd = -d_x (xd - xd_d) + f_v``, clamped to the phase interval."""
    _check_dt(dt)

    def f(t, s):
        return np.array([s[1], compliant_accel(fd.d_x, s[1], f_v, x_dot_d)])

    x, xd = rk4_step(f, 0.0, np.array([fd.x, fd.x_dot]), dt)
    x, xd = _clamp_interval(x, xd, x_start, fd.x_end)
    return replace(fd, x=float(x), x_dot=float(xd))


def _clamp_interval(x, xd, lo, hi):
    if x <= lo:
        return lo, max(xd, 0.0)
    if x >= hi:
        return hi, min(xd, 0.0)
    return x, xd


# --------------------------------------------------------------------------
# phase drivers for rollouts


class NominalPhase:
    """Drives a rollout with a canonical system, optionally phase-stopped."""

    def __init__(self, cs: CanonicalSystem, stop: Optional[PhaseStopConfig] = None):
        self.cs = cs
        self.stop = stop

    def initial_state(self):
        return np.array([self.cs.start])

    def derivative(self, t, s):
        xd = self.cs.rate(s[0])
        if self.stop is not None:
            xd /= self.stop.factor(t)
        return np.array([xd])

    def kinematics(self, t, s):
        x = s[0]
        rate = self.cs.rate(x)
        if self.stop is None:
            return x, rate, self.cs.accel(x, rate)
        F = self.stop.factor(t)
        xd = rate / F
        xdd = self.cs.accel(x, rate) / (F * F) - xd * self.stop.factor_rate(t) / F
        return x, xd, xdd

    def project(self, s):
        s[0] = self.cs.clamp(s[0])
        return s

    def finished(self, s) -> bool:
        return self.cs.finished(s[0])


class TeachPhase:
    """Teach-mode phase: pushed forward only by the projected force ``force(t, x)``."""

    def __init__(self, d_x: float, force: Callable[[float, float], float], x_start=0.0, x_end=1.0):
        if not d_x > 0:
            raise InvalidArgument("d_x must be > 0")
        self.d_x, self.force, self.x_start, self.x_end = d_x, force, x_start, x_end

    def initial_state(self):
        return np.array([self.x_start, 0.0])

    def _xdd(self, t, x, xd):
        return teach_accel(self.d_x, x, xd, self.force(t, x), self.x_end)

    def derivative(self, t, s):
        if s[0] >= self.x_end:
            return np.zeros(2)
        return np.array([s[1], self._xdd(t, s[0], s[1])])

    def kinematics(self, t, s):
        if s[0] >= self.x_end:
            return self.x_end, 0.0, 0.0
        return s[0], s[1], self._xdd(t, s[0], s[1])

    def project(self, s):
        s[1] = max(s[1], 0.0)
        if s[0] >= self.x_end:
            s[0], s[1] = self.x_end, 0.0
        return s

    def finished(self, s) -> bool:
        return s[0] >= self.x_end


class CompliantPhase:
    """Bidirectionally drivable phase relaxing to the nominal rate when unforced.

    ``force(t, x)`` returns the signed projected force; ``force_norm(t, x)``
    (defaults to ``|force|``) scales down the nominal rate as in phase stopping.
    """

    def __init__(self, d_x, force, tau, a_d, direction=FORWARD, x_start=0.0, x_end=1.0,
                 force_norm=None):
        if not d_x > 0 or not tau > 0 or not a_d > 0:
            raise InvalidArgument("d_x, tau and a_d must be > 0")
        self.d_x, self.force, self.tau, self.a_d = d_x, force, tau, a_d
        self.direction = normalize_direction(direction)
        self.x_start, self.x_end = x_start, x_end
        self.force_norm = force_norm or (lambda t, x: abs(self.force(t, x)))

    def target_rate(self, t, x):
        return compliant_target_rate(self.tau, self.a_d, self.force_norm(t, x), self.direction,
                                     self.x_end - self.x_start)

    def initial_state(self):
        x = self.x_start if self.direction == FORWARD else self.x_end
        return np.array([x, self.target_rate(0.0, x)])

    def derivative(self, t, s):
        return np.array([s[1], compliant_accel(self.d_x, s[1], self.force(t, s[0]),
                                               self.target_rate(t, s[0]))])

    def kinematics(self, t, s):
        return s[0], s[1], self.derivative(t, s)[1]

    def project(self, s):
        s[0], s[1] = _clamp_interval(s[0], s[1], self.x_start, self.x_end)
        return s

    def finished(self, s) -> bool:
        end = self.x_end if self.direction == FORWARD else self.x_start
        return s[0] == end
