"""Acceptance criteria, one test per criterion.

Each test prints (and records for the terminal summary) a single
``[PASS]``/``[FAIL]`` line with the measured values.
"""
import os
import time

import pytest

from revdmp import ReversibleDMP
from revdmp.cli import main
from revdmp.scenarios import KS_VALUES, KT_VALUES, SCENARIOS, run_scenario, scaling_grid
from revdmp.sim import min_jerk_demo, mirror_error

from conftest import ACCEPTANCE_LINES

DT = 0.002
_cache = {}


def scenario(name, dt=DT):
    if (name, dt) not in _cache:
        _cache[name, dt] = run_scenario(name, dt=dt)
    return _cache[name, dt]


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def props(res):
    return {p.name: p for p in res.properties}


def test_criterion_1_mirror_reversibility():
    t0 = time.perf_counter()
    demo = min_jerk_demo(0.0, 1.0, 2.0, DT)
    model = ReversibleDMP.train(demo.t, demo.y)
    worst = 0.0
    for k_s in KS_VALUES:
        for k_t in KT_VALUES:
            tau = model.tau_d / k_t
            f = model.rollout("forward", tau, dt=DT, goal=k_s)
            b = model.rollout("backward", tau, dt=DT, goal=k_s)
            worst = max(worst, mirror_error(f, b, tau) / abs(k_s))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 10.0
    report(1, "mirror reversibility", ok,
           f"max sup|y_b(t) - y_f(T'-t)| / |g - y0| = {worst:.2e} (< 1e-3) over 30 (k_s, k_t) pairs, "
           f"{elapsed:.1f} s (< 10 s)")


def test_criterion_2_forward_coincidence():
    p = {q.name: q for q in scaling_grid(DT)[0]}
    v = p["forward_coincidence"].value
    report(2, "forward coincidence", v < 1e-2,
           f"max sup-norm classical vs reversible (matched gains) = {v:.2e} (< 1e-2) over 30 pairs")


def test_criterion_3_classical_non_reversibility():
    p = props(scenario("classical_reverse_failure"))
    w, r = p["forward_over_reverse_error"], p["residual_rel_mismatch"]
    ok = w.passed and r.passed
    report(3, "classical non-reversibility witness", ok,
           f"10 x forward error / reverse error = {w.value:.2e} (< 1); "
           f"residual vs -2(a/tau) yd_rev max relative mismatch = {r.value:.2%} (< 5%)")


def test_criterion_4_phase_stopping():
    p = props(scenario("phase_stop"))
    keys = ("plateau_phase_ratio_rel_error", "full_stop_drift", "stopped_mirror_error")
    ok = all(p[k].passed for k in keys)
    report(4, "phase stopping", ok,
           f"plateau ratio rel. error {p[keys[0]].value:.1e} (< 1e-3), full-stop drift "
           f"{p[keys[1]].value:.1e} (< 1e-6), stopped mirror {p[keys[2]].value:.1e} (< 1e-3)")


def test_criterion_5_perturbation_convergence():
    p = props(scenario("goal_perturbation"))
    ok = all(q.passed for q in p.values())
    report(5, "perturbation convergence", ok,
           f"goal 1->1.4 terminal {p['forward_terminal_error'].value:.1e}, start 0->-0.5 terminal "
           f"{p['perturbed_start_terminal_error'].value:.1e} (< 1e-3); settling spread over tau in "
           f"{{1,2,4}}: reversible {p['reversible_settling_spread'].value:.1e} s (<= 1 step), classical "
           f"{p['classical_settling_spread'].value:.2f} s (not invariant)")


def test_criterion_6_coupling_scenarios():
    lim = props(scenario("limit_avoidance"))
    obs = props(scenario("obstacle_avoidance"))
    clear = min(obs[k].value for k in ("clearance_rev_fwd", "clearance_rev_bwd", "clearance_cls_fwd"))
    ortho = obs["addend_velocity_dot"].value
    ok = lim["max_y2"].value < 0.72 and clear > 0 and ortho < 1e-9 and obs["nominal_clearance"].passed
    report(6, "coupling scenarios", ok,
           f"max y2 = {lim['max_y2'].value:.4f} (< 0.72); min obstacle clearance = {clear:.3f} (> 0) "
           f"with the obstacle on the nominal path; max |f_o . yd| = {ortho:.1e} (< 1e-9)")


def test_criterion_7_quaternion_suite():
    p = props(scenario("orientation_roundtrip"))
    ok = all(p[k].passed for k in ("exp_log_roundtrip", "omega_fd_error", "forward_geodesic_error",
                                   "backward_geodesic_error"))
    report(7, "quaternion suite", ok,
           f"exp/log round-trip {p['exp_log_roundtrip'].value:.1e} (< 1e-9, 1000 samples); omega vs "
           f"finite differences {p['omega_fd_error'].value:.1e} (< 1e-5); terminal geodesic error fwd "
           f"{p['forward_geodesic_error'].value:.1e}, bwd {p['backward_geodesic_error'].value:.1e} rad (< 1e-3)")


def test_criterion_8_two_phase_teaching():
    p = props(scenario("two_phase_teaching"))
    ok = p["path_difference"].value < 1e-2 and p["timing_difference_rel"].value > 0.05
    report(8, "two-phase teaching", ok,
           f"path difference vs arc length {p['path_difference'].value:.1e} (< 1e-2); time-domain "
           f"difference / path length {p['timing_difference_rel'].value:.3f} (> 0.05)")


def test_criterion_9_numerical_hygiene(tmp_path, capsys):
    worst, where = 0.0, ""
    for name in SCENARIOS:
        a, b = scenario(name, DT), scenario(name, DT / 2)
        for pa, pb in zip(a.properties, b.properties):
            r = abs(pa.value - pb.value) / abs(pa.bound)
            if r > worst:
                worst, where = r, f"{name}.{pa.name}"
    times, codes = [], []
    for out in ("run1", "run2"):
        t0 = time.perf_counter()
        codes.append(main(["scenario", "--all", "--out", str(tmp_path / out)]))
        times.append(time.perf_counter() - t0)
    capsys.readouterr()
    identical = _identical_tree(tmp_path / "run1", tmp_path / "run2")
    ok = worst < 0.1 and identical and max(times) < 60.0 and codes == [0, 0]
    report(9, "numerical hygiene", ok,
           f"max |metric(dt) - metric(dt/2)| / tolerance = {worst:.1e} at {where} (< 0.1); "
           f"scenario --all x2 byte-identical={identical}, exit codes {codes}, "
           f"runtimes {times[0]:.1f} s / {times[1]:.1f} s (< 60 s)")


def _identical_tree(a, b):
    fa = sorted(os.path.relpath(os.path.join(r, f), a) for r, _, fs in os.walk(a) for f in fs)
    fb = sorted(os.path.relpath(os.path.join(r, f), b) for r, _, fs in os.walk(b) for f in fs)
    if fa != fb or not fa:
        return False
    return all(open(os.path.join(a, f), "rb").read() == open(os.path.join(b, f), "rb").read() for f in fa)
