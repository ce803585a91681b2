"""Registered simulation scenarios with pass/fail properties.

Each scenario builds its demonstration, trains the models it needs, runs
the rollouts and reports a list of :class:`PropertyResult`. A property
failing is a reported result, not an exception; integration and domain
errors propagate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import rotations as rot
from .classical import ClassicalDMP, reverse_residual
from .couplings import LimitCoupling, ObstacleCoupling
from .errors import InvalidArgument, NoMotionError, ValidationError
from .orientation import OrientationDMP, spline_demo
from .phase import PhaseStopConfig, TeachPhase, TrapezoidalPulse, pulse_time_loss
from .reversible import Perturbation, ReversibleDMP
from .sim import (Trajectory, coincide_error, default_dt, min_jerk_demo, mirror_error, settling_time,
                  sigmoid_arcs_demo)

KT_VALUES = (0.5, 0.7, 0.85, 1.3, 1.6)
KS_VALUES = (-2.0, -1.5, -0.5, 0.5, 1.5, 2.0)


@dataclass
class PropertyResult:
    """One checked property: ``value < bound`` (kind ``max``) or ``value > bound`` (``min``)."""

    name: str
    value: float
    bound: float
    kind: str = "max"
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in ("max", "min"):
            raise InvalidArgument(f"unknown property kind {self.kind!r}")
        self.value = float(self.value)
        self.bound = float(self.bound)
        self.passed = bool(self.value < self.bound if self.kind == "max" else self.value > self.bound)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "bound": self.bound, "kind": self.kind,
                "passed": self.passed}


@dataclass
class ScenarioResult:
    name: str
    params: dict
    properties: List[PropertyResult]
    trajectories: dict

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def report(self) -> dict:
        return {"scenario": self.name, "params": self.params, "passed": self.passed,
                "properties": [p.as_dict() for p in self.properties]}


@dataclass(frozen=True)
class Scenario:
    """A registered scenario name plus parameter overrides."""

    name: str
    params: dict = field(default_factory=dict)
    dt: Optional[float] = None

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict) or "name" not in d:
            raise ValidationError("scenario config needs a 'name'")
        unknown = set(d) - {"name", "params", "dt"}
        if unknown:
            raise ValidationError(f"unknown scenario config keys {sorted(unknown)}")
        if d["name"] not in REGISTRY:
            raise ValidationError(f"unknown scenario {d['name']!r}; known: {', '.join(REGISTRY)}")
        params = d.get("params", {}) or {}
        bad = set(params) - set(REGISTRY[d["name"]][1])
        if bad:
            raise ValidationError(f"unknown parameters {sorted(bad)} for scenario {d['name']!r}")
        dt = d.get("dt")
        if dt is not None and not (isinstance(dt, (int, float)) and dt > 0):
            raise ValidationError("dt must be a positive number")
        return cls(d["name"], dict(params), dt)


def load_scenario(path) -> Scenario:
    """Read a scenario from a JSON file ``{"name": ..., "params": {...}, "dt": ...}``."""
    try:
        with open(path) as fh:
            return Scenario.from_dict(json.load(fh))
    except json.JSONDecodeError as e:
        raise ValidationError(f"scenario file is not valid JSON: {e}") from None


def run_scenario(scenario, dt: Optional[float] = None, **overrides) -> ScenarioResult:
    """Run a registered scenario by name or :class:`Scenario` instance."""
    if isinstance(scenario, str):
        scenario = Scenario(scenario)
    if scenario.name not in REGISTRY:
        raise InvalidArgument(f"unknown scenario {scenario.name!r}; known: {', '.join(REGISTRY)}")
    fn, defaults = REGISTRY[scenario.name]
    params = dict(defaults)
    params.update(scenario.params)
    params.update(overrides)
    dt = dt if dt is not None else (scenario.dt if scenario.dt is not None else default_dt())
    props, trajs = fn(dt=dt, **params)
    return ScenarioResult(scenario.name, dict(params, dt=dt), props, trajs)


# --------------------------------------------------------------------------
# shared helpers


def _scaling_runs(pairs, dt, tag):
    """Forward/backward reversible and forward classical runs for ``(k_s, k_t)`` pairs."""
    demo = min_jerk_demo(0.0, 1.0, 2.0, dt)
    rev = ReversibleDMP.train(demo.t, demo.y)
    cla = ClassicalDMP.train(demo)
    span = abs(float(rev.g[0] - rev.y0[0]))
    trajs, mirror, coincide, term_f, term_b = {}, [], [], [], []
    for k_s, k_t in pairs:
        tau = rev.tau_d / k_t
        goal = rev.y0 + k_s * (rev.g - rev.y0)
        K, D = cla.effective_gains(tau)
        f = rev.rollout("forward", tau, dt=dt, goal=goal, K=K, D=D)
        b = rev.rollout("backward", tau, dt=dt, goal=goal, K=K, D=D)
        c = cla.rollout("forward", tau, dt=dt, goal=goal)
        key = f"{tag}_ks{k_s:g}_kt{k_t:g}"
        trajs[key + "_rev_fwd"], trajs[key + "_rev_bwd"], trajs[key + "_cls_fwd"] = f, b, c
        mirror.append(mirror_error(f, b, tau) / (abs(k_s) * span))
        coincide.append(coincide_error(f, c))
        term_f.append(float(np.max(np.abs(f.y[-1] - goal))))
        term_b.append(float(np.max(np.abs(b.y[-1] - rev.y0))))
    props = [
        PropertyResult("mirror_error_rel", max(mirror), 1e-3),
        PropertyResult("forward_coincidence", max(coincide), 1e-2),
        PropertyResult("forward_terminal_error", max(term_f), 1e-3),
        PropertyResult("backward_terminal_error", max(term_b), 1e-3),
    ]
    return props, trajs


def scaling_grid(dt=None):
    """Every ``(k_s, k_t)`` combination of the scaling lists."""
    dt = default_dt() if dt is None else dt
    return _scaling_runs([(ks, kt) for ks in KS_VALUES for kt in KT_VALUES], dt, "grid")


# --------------------------------------------------------------------------
# scenarios


def _temporal_scaling(dt, k_t=KT_VALUES):
    return _scaling_runs([(1.0, kt) for kt in k_t], dt, "temporal")


def _spatial_scaling(dt, k_s=KS_VALUES):
    return _scaling_runs([(ks, 1.0) for ks in k_s], dt, "spatial")


def _phase_stop(dt, a_d=10.0, full_stop_a_d=1e6, pulse_start=0.65, rise=0.1, plateau=0.5, fall=0.1,
                amplitude=1.0):
    demo = min_jerk_demo(0.0, 1.0, 2.0, dt)
    rev = ReversibleDMP.train(demo.t, demo.y)
    cla = ClassicalDMP.train(demo)
    tau = rev.tau_d
    pulse = TrapezoidalPulse(pulse_start, rise, plateau, fall, amplitude)
    stop = PhaseStopConfig(a_d, pulse)
    T_f = tau + pulse_time_loss(pulse, a_d)
    duration = 1.5 * tau + pulse.end
    K, D = cla.effective_gains(tau)
    f = rev.rollout("forward", tau, duration, dt, K=K, D=D, stop=stop)
    b = rev.rollout("backward", tau, duration, dt, K=K, D=D,
                    stop=PhaseStopConfig(a_d, pulse.mirrored(T_f)))
    c = cla.rollout("forward", tau, duration, dt, stop=stop)

    # phase advance over the plateau relative to the unstopped rate
    m = (f.t >= pulse.plateau_start - 1e-9) & (f.t <= pulse.plateau_end + 1e-9)
    ts = f.t[m]
    adv = (f.x[m][-1] - f.x[m][0]) / (ts[-1] - ts[0])
    ratio_err = abs(adv * tau * (1.0 + a_d * amplitude) - 1.0)

    full = rev.rollout("forward", tau, duration, dt, K=K, D=D, stop=PhaseStopConfig(full_stop_a_d, pulse))
    mf = (full.t >= pulse.plateau_start - 1e-9) & (full.t <= pulse.plateau_end + 1e-9)
    drift = float(np.max(np.abs(full.y[mf] - full.y[mf][0])))

    props = [
        PropertyResult("plateau_phase_ratio_rel_error", ratio_err, 1e-3),
        PropertyResult("full_stop_drift", drift, 1e-6),
        PropertyResult("stopped_mirror_error", mirror_error(f, b, T_f), 1e-3),
        PropertyResult("stopped_forward_coincidence", coincide_error(f, c), 1e-2),
        PropertyResult("forward_terminal_error", abs(f.y[-1, 0] - 1.0), 1e-3),
    ]
    return props, {"rev_fwd": f, "rev_bwd": b, "cls_fwd": c, "rev_full_stop": full}


def _kick_settling(model, tau, dt, t_kick, kick, duration, frac, **kw):
    base = model.rollout("forward", tau, duration, dt, **kw)
    hit = model.rollout("forward", tau, duration, dt, events=[Perturbation(t_kick, kick=[kick])], **kw)
    return settling_time(hit.t, hit.y - base.y, frac * abs(kick), t_start=t_kick)


def _goal_perturbation(dt, t_goal=1.2, new_goal=1.4, t_start=1.4, new_start=-0.5, taus=(1.0, 2.0, 4.0),
                       settle_frac=0.02):
    demo = min_jerk_demo(0.0, 1.0, 2.0, dt)
    rev = ReversibleDMP.train(demo.t, demo.y)
    cla = ClassicalDMP.train(demo)
    tau = rev.tau_d
    goal_ev = [Perturbation(t_goal, goal=[new_goal])]
    f = rev.rollout("forward", tau, dt=dt, events=goal_ev)
    c = cla.rollout("forward", tau, dt=dt, events=goal_ev)
    b_from_new = rev.rollout("backward", tau, dt=dt, goal=[new_goal])
    b_start = rev.rollout("backward", tau, dt=dt, events=[Perturbation(t_start, start=[new_start])])

    # gain decoupling: response to the same position kick for several tau
    kick = new_goal - 1.0
    duration = t_goal + 3.0
    s_rev = [_kick_settling(rev, ta, dt, t_goal, kick, max(duration, 1.5 * ta), settle_frac) for ta in taus]
    s_cls = [_kick_settling(cla, ta, dt, t_goal, kick, max(duration, 1.5 * ta), settle_frac) for ta in taus]
    props = [
        PropertyResult("forward_terminal_error", abs(f.y[-1, 0] - new_goal), 1e-3),
        PropertyResult("backward_terminal_error", abs(b_from_new.y[-1, 0] - 0.0), 1e-3),
        PropertyResult("perturbed_start_terminal_error", abs(b_start.y[-1, 0] - new_start), 1e-3),
        PropertyResult("reversible_settling_spread", max(s_rev) - min(s_rev), 1.5 * dt),
        PropertyResult("classical_settling_spread", max(s_cls) - min(s_cls), 10 * dt, "min"),
    ]
    return props, {"rev_fwd": f, "cls_fwd": c, "rev_bwd_from_new_goal": b_from_new,
                   "rev_bwd_perturbed_start": b_start}


def _planar_models(dt):
    demo = sigmoid_arcs_demo(2.0, dt)
    return demo, ReversibleDMP.train(demo.t, demo.y), ClassicalDMP.train(demo)


def _limit_avoidance(dt, y_limit=0.72, gamma=1e-6):
    demo, rev, cla = _planar_models(dt)
    lc = LimitCoupling((math.inf, y_limit), gamma)
    trajs = {}
    seen = []

    def guard(name, tr):
        trajs[name] = tr
        seen.append(float(np.max(tr.y[:, 1])))

    f = rev.rollout("forward", dt=dt, couplings=[lc])
    b = rev.rollout("backward", dt=dt, couplings=[lc])
    guard("rev_fwd", f)
    guard("rev_bwd", b)
    guard("cls_fwd", cla.rollout("forward", dt=dt, couplings=[lc]))
    trajs["rev_fwd_free"] = rev.rollout("forward", dt=dt)
    props = [
        PropertyResult("max_y2", max(seen), y_limit),
        PropertyResult("nominal_peak_y2", float(np.max(trajs["rev_fwd_free"].y[:, 1])), y_limit, "min"),
        PropertyResult("static_discrepancy_rel", mirror_error(f, b, rev.tau_d) / f.path_length(), 0.1),
    ]
    return props, trajs


def _obstacle_avoidance(dt, gamma=1000.0, beta=8.0, obstacle_time=0.6, min_clearance=1e-2):
    demo, rev, cla = _planar_models(dt)
    p_o = demo.y[int(round(obstacle_time / demo.dt))]
    oc = ObstacleCoupling(tuple(p_o), gamma, beta)
    f = rev.rollout("forward", dt=dt, couplings=[oc])
    b = rev.rollout("backward", dt=dt, couplings=[oc])
    c = cla.rollout("forward", dt=dt, couplings=[oc])
    ortho = 0.0
    for tr in (f, b, c):
        ortho = max(ortho, float(np.max(np.abs(np.sum(tr.meta["coupling_acc"] * tr.yd, axis=1)))))
    props = [
        PropertyResult("nominal_clearance", float(np.min(oc.clearance(demo.y))), 1e-9, "max"),
        PropertyResult("clearance_rev_fwd", float(np.min(oc.clearance(f.y))), min_clearance, "min"),
        PropertyResult("clearance_rev_bwd", float(np.min(oc.clearance(b.y))), min_clearance, "min"),
        PropertyResult("clearance_cls_fwd", float(np.min(oc.clearance(c.y))), min_clearance, "min"),
        PropertyResult("addend_velocity_dot", ortho, 1e-9),
        PropertyResult("static_discrepancy_rel", mirror_error(f, b, rev.tau_d) / f.path_length(), 0.1),
    ]
    return props, {"rev_fwd": f, "rev_bwd": b, "cls_fwd": c}


def _classical_reverse_failure(dt, witness_factor=10.0, residual_tol=0.05, active_frac=0.1):
    demo = min_jerk_demo(0.0, 1.0, 2.0, dt)
    cla = ClassicalDMP.train(demo)
    fwd = cla.rollout("forward", dt=dt)
    fwd_err = float(np.max(np.abs(fwd.until(cla.tau_d).y - demo.y)))
    r = reverse_residual(cla, dt=dt)
    mask = np.abs(r.yd_rev) > active_frac * np.max(np.abs(r.yd_rev))
    rel = np.abs(r.measured - r.predicted)[mask] / np.abs(r.predicted)[mask]
    props = [
        PropertyResult("forward_over_reverse_error", witness_factor * fwd_err / r.max_tracking_error, 1.0),
        PropertyResult("residual_rel_mismatch", float(np.max(rel)), residual_tol),
    ]
    rev_traj = Trajectory(r.t, r.y, np.gradient(r.y, r.t, axis=0), r.rollout.ydd, r.rollout.x,
                          r.rollout.x_dot, dict(r.rollout.meta))
    return props, {"cls_fwd": fwd, "cls_bwd": rev_traj}


def _orientation_roundtrip(dt, seed=0, n_samples=1000, eta_g=(0.8, -0.5, 1.2),
                           new_goal=(0.3, 1.5, -1.0)):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=(n_samples, 3))
    e *= (rng.uniform(0.0, np.pi - 0.01, n_samples) / np.linalg.norm(e, axis=1))[:, None]
    roundtrip = float(np.max(np.abs(rot.qlog(rot.qexp(e)) - e)))

    # omega from the chart rate against the quaternion finite-difference oracle
    h = 1e-5
    omega_err = 0.0
    for k in range(20):
        eta, eta_d = e[k] * 0.9, rng.normal(size=3)
        Q = rot.qexp(eta)
        Qd = (rot.qexp(eta + h * eta_d) - rot.qexp(eta - h * eta_d)) / (2 * h)
        w_fd = 2.0 * rot.qprod(Qd, rot.qconj(Q), renormalize=False)[1:]
        omega_err = max(omega_err, float(np.max(np.abs(rot.omega_from_eta(Q, eta_d) - w_fd))))

    t, Qdemo = spline_demo(eta_g, dt=dt)
    m = OrientationDMP.train(t, Qdemo)
    f = m.rollout("forward", dt=dt)
    b = m.rollout("backward", dt=dt)
    Qg2 = rot.qexp(np.asarray(new_goal, float))
    g2 = m.rollout("forward", dt=dt, goal=Qg2)
    props = [
        PropertyResult("exp_log_roundtrip", roundtrip, 1e-9),
        PropertyResult("omega_fd_error", omega_err, 1e-5),
        PropertyResult("forward_geodesic_error", rot.geodesic_distance(f.Q[-1], m.Qg), 1e-3),
        PropertyResult("backward_geodesic_error", rot.geodesic_distance(b.Q[-1], m.Q0), 1e-3),
        PropertyResult("new_goal_geodesic_error", rot.geodesic_distance(g2.Q[-1], Qg2), 1e-3),
        PropertyResult("eta_mirror_error", mirror_error(f.as_eta_trajectory(), b.as_eta_trajectory(),
                                                        m.tau_d), 1e-3),
    ]
    return props, {"ori_fwd": f, "ori_bwd": b, "ori_new_goal": g2}


# --------------------------------------------------------------------------
# two-phase teaching


def project_force(model: ReversibleDMP, x: float, force, prev_dir=None, eps: float = 1e-9):
    """Component of ``force`` along the path direction ``n = (dy/dx) / |dy/dx|``.

    Returns ``(f_v, n)``. Where ``|dy/dx| < eps`` the previous direction is
    kept (zero projection if there is none yet).
    """
    _, dfp = model.fp(x, 1)
    g = model.spatial_scale() * dfp
    norm = float(np.linalg.norm(g))
    if norm < eps:
        if prev_dir is None:
            return 0.0, None
        n = prev_dir
    else:
        n = g / norm
    return float(np.dot(n, np.asarray(force, dtype=float))), n


def pulsed_force(pulses=((0.2, 2.5), (1.6, 4.0)), width=0.8, ramp=0.1):
    """Sum of trapezoidal pulses given as ``(start, amplitude)`` pairs."""
    parts = [TrapezoidalPulse(s, ramp, width, ramp, a) for s, a in pulses]
    return lambda t: float(sum(p(t) for p in parts))


def two_phase_teaching_sim(model: ReversibleDMP, force_profile: Callable[[float], float], dt: float,
                           d_x: float = 5.0, max_duration: float = 20.0, lateral: float = 0.5,
                           n_kernels: int = 60):
    """Drive the phase with a synthetic hand force, record the motion and retrain.

    ``force_profile(t)`` is the force magnitude along the path; a constant
    ``lateral`` component perpendicular to it is added and must be removed by
    the projection onto the path direction.

    Returns
    -------
    retrained : ReversibleDMP
    recorded : Trajectory
        The phase-2 execution up to the instant the phase reached its end.
    """
    state = {"n": None}

    def force(t, x):
        _, dfp = model.fp(x, 1)
        g = model.spatial_scale() * dfp
        if np.linalg.norm(g) > 1e-9:
            state["n"] = g / np.linalg.norm(g)
        n = state["n"] if state["n"] is not None else np.zeros(model.n_dofs)
        perp = np.zeros(model.n_dofs)
        if model.n_dofs >= 2:
            perp[:2] = (-n[1], n[0])
        F = force_profile(t) * n + lateral * perp
        return project_force(model, x, F, state["n"])[0]

    phase = TeachPhase(d_x, force)
    rec = model.rollout(phase=phase, duration=max_duration, dt=dt)
    done = np.nonzero(rec.x >= phase.x_end - 1e-12)[0]
    if len(done) == 0 or rec.x[done[0]] - rec.x[0] <= 0:
        if np.max(rec.x) - rec.x[0] <= 1e-9:
            raise NoMotionError("phase never advanced; nothing to retrain on")
        raise NoMotionError(f"phase stalled at x={np.max(rec.x):.4g} before reaching the end")
    end = done[0]
    recorded = rec.until(rec.t[end])
    retrained = ReversibleDMP.train(recorded.t, recorded.y, n_kernels=n_kernels, K=model.K, D=model.D)
    return retrained, recorded


def arc_resample(y, n=400):
    """Resample a path at ``n`` points equally spaced in arc length; also returns the length."""
    s = np.concatenate(([0.0], np.cumsum(np.linalg.norm(np.diff(y, axis=0), axis=1))))
    u = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(u, s, y[:, j]) for j in range(y.shape[1])], axis=1), s[-1]


def _two_phase_teaching(dt, slow_T=6.0, d_x=5.0, pulses=((0.2, 2.5), (1.6, 4.0)), pulse_width=0.8):
    demo = sigmoid_arcs_demo(slow_T, dt)
    phase1 = ReversibleDMP.train(demo.t, demo.y)
    retrained, recorded = two_phase_teaching_sim(phase1, pulsed_force(pulses, pulse_width), dt, d_x)
    p1 = phase1.rollout("forward", dt=dt)
    p2 = retrained.rollout("forward", dt=dt)
    a1, length = arc_resample(p1.until(phase1.tau_d).y)
    a2, _ = arc_resample(p2.until(retrained.tau_d).y)
    # time-domain comparison over normalized time
    s = np.linspace(0.0, 1.0, 400)
    y1 = p1.at(s * phase1.tau_d)
    y2 = p2.at(s * retrained.tau_d)
    props = [
        PropertyResult("path_difference", float(np.max(np.abs(a1 - a2))), 1e-2),
        PropertyResult("timing_difference_rel", float(np.max(np.abs(y1 - y2))) / length, 0.05, "min"),
        PropertyResult("retrain_fit_residual", retrained.fit_residual, 1e-2),
    ]
    return props, {"phase1": p1, "recorded": recorded, "retrained": p2}


REGISTRY: Dict[str, tuple] = {
    "temporal_scaling": (_temporal_scaling, {"k_t": list(KT_VALUES)}),
    "spatial_scaling": (_spatial_scaling, {"k_s": list(KS_VALUES)}),
    "phase_stop": (_phase_stop, {"a_d": 10.0, "full_stop_a_d": 1e6, "pulse_start": 0.65, "rise": 0.1,
                                 "plateau": 0.5, "fall": 0.1, "amplitude": 1.0}),
    "goal_perturbation": (_goal_perturbation, {"t_goal": 1.2, "new_goal": 1.4, "t_start": 1.4,
                                               "new_start": -0.5, "taus": [1.0, 2.0, 4.0],
                                               "settle_frac": 0.02}),
    "limit_avoidance": (_limit_avoidance, {"y_limit": 0.72, "gamma": 1e-6}),
    "obstacle_avoidance": (_obstacle_avoidance, {"gamma": 1000.0, "beta": 8.0, "obstacle_time": 0.6,
                                                 "min_clearance": 1e-2}),
    "classical_reverse_failure": (_classical_reverse_failure, {"witness_factor": 10.0,
                                                               "residual_tol": 0.05, "active_frac": 0.1}),
    "orientation_roundtrip": (_orientation_roundtrip, {"seed": 0, "n_samples": 1000,
                                                       "eta_g": [0.8, -0.5, 1.2],
                                                       "new_goal": [0.3, 1.5, -1.0]}),
    "two_phase_teaching": (_two_phase_teaching, {"slow_T": 6.0, "d_x": 5.0,
                                                 "pulses": [[0.2, 2.5], [1.6, 4.0]], "pulse_width": 0.8}),
}

SCENARIOS = tuple(REGISTRY)
