"""Phase stopping and on-line changes of goal and start.

A trapezoidal disturbance slows the phase by ``1 + a_d |d|``; after it
ends the motion resumes where it left off. Goals and starts may also
move while the motion is running.
"""
import numpy as np

from revdmp import Perturbation, PhaseStopConfig, ReversibleDMP, TrapezoidalPulse
from revdmp.phase import pulse_time_loss
from revdmp.sim import min_jerk_demo, mirror_error

dt = 0.002
demo = min_jerk_demo(0.0, 1.0, 2.0, dt)
model = ReversibleDMP.train(demo.t, demo.y)

pulse = TrapezoidalPulse(start=0.65, rise=0.1, plateau=0.5, fall=0.1)
stop = PhaseStopConfig(a_d=10.0, d=pulse)
fwd = model.rollout("forward", dt=dt, duration=4.0, stop=stop)
plateau = (fwd.t > pulse.plateau_start) & (fwd.t < pulse.plateau_end)
print(f"phase rate on the plateau: {fwd.x_dot[plateau].mean():.5f} (nominal 0.5, expected 0.5/11)")

# The stopped motion finishes later by a known amount; mirror the pulse about that instant.
T_f = model.tau_d + pulse_time_loss(pulse, 10.0)
bwd = model.rollout("backward", dt=dt, duration=4.0, stop=PhaseStopConfig(10.0, pulse.mirrored(T_f)))
print(f"finish time {T_f:.4f} s, stopped backward vs mirrored forward {mirror_error(fwd, bwd, T_f):.1e}")

# Goal moved from 1 to 1.4 at t = 1.2 s, and a backward run whose start moves to -0.5 at 1.4 s.
f = model.rollout("forward", dt=dt, events=[Perturbation(1.2, goal=[1.4])])
b = model.rollout("backward", dt=dt, events=[Perturbation(1.4, start=[-0.5])])
print(f"forward ends at {f.y[-1, 0]:.5f}, backward ends at {b.y[-1, 0]:.5f}")

# Tracking gains do not depend on tau, so a kick settles in the same time at any speed.
for tau in (1.0, 2.0, 4.0):
    free = model.rollout("forward", tau, dt=dt, duration=6.0)
    kicked = model.rollout("forward", tau, dt=dt, duration=6.0, events=[Perturbation(1.2, kick=[0.4])])
    dev = np.abs(kicked.y[:, 0] - free.y[:, 0])
    settled = kicked.t[np.nonzero(dev > 0.008)[0][-1] + 1] - 1.2
    print(f"tau={tau}: kick settles within 2% after {settled:.3f} s")
