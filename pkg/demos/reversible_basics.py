"""Forward and backward execution of a reversible DMP.

Train on a minimum-jerk point-to-point motion, play it forward and
backward, then scale it in space and time. Run from the repository root:

    python3 demos/reversible_basics.py
"""
import numpy as np

from revdmp import ClassicalDMP, ReversibleDMP
from revdmp.sim import coincide_error, min_jerk_demo, mirror_error

dt = 0.002
demo = min_jerk_demo(y0=0.0, g=1.0, T=2.0, dt=dt)

# Only positions are needed by the reversible model.
rev = ReversibleDMP.train(demo.t, demo.y, n_kernels=30)
print(f"fit residual: {rev.fit_residual:.2e}")

fwd = rev.rollout("forward", dt=dt)
bwd = rev.rollout("backward", dt=dt)
print(f"forward ends at {fwd.y[-1, 0]:.6f}, backward ends at {bwd.y[-1, 0]:.6f}")
print(f"backward vs time-mirrored forward: {mirror_error(fwd, bwd, rev.tau_d):.2e}")

# The classical DMP needs velocities and accelerations too, and only works forward.
cla = ClassicalDMP.train(demo)
print(f"classical vs reversible forward: {coincide_error(cla.rollout('forward', dt=dt), fwd):.2e}")

# Scaling: a new goal changes the amplitude, a new tau the duration.
for goal, tau in [(2.0, 2.0), (-0.5, 2.0), (1.0, 4.0), (1.5, 1.25)]:
    f = rev.rollout("forward", tau, dt=dt, goal=goal)
    b = rev.rollout("backward", tau, dt=dt, goal=goal)
    peak = np.max(np.abs(f.yd))
    print(f"goal={goal:5.2f} tau={tau:4.2f}  peak speed {peak:.3f}  "
          f"mirror error {mirror_error(f, b, tau):.1e}")
