"""Teaching a path slowly, then re-teaching only its timing.

Phase 1 records a slow demonstration. In phase 2 a synthetic hand force
pushes the phase along the learned path; the component of the force
across the path is ignored, so only the speed profile changes. The
recorded motion is then used to retrain the model.
"""
import numpy as np

from revdmp import ReversibleDMP
from revdmp.scenarios import arc_resample, pulsed_force, two_phase_teaching_sim
from revdmp.sim import sigmoid_arcs_demo

dt = 0.002
slow = sigmoid_arcs_demo(T=6.0, dt=dt)
phase1 = ReversibleDMP.train(slow.t, slow.y)

force = pulsed_force(pulses=((0.2, 2.5), (1.6, 4.0)), width=0.8)
retrained, recorded = two_phase_teaching_sim(phase1, force, dt, d_x=5.0)
print(f"phase 1 duration {phase1.tau_d:.2f} s, taught duration {retrained.tau_d:.2f} s")

p1 = phase1.rollout(dt=dt).until(phase1.tau_d)
p2 = retrained.rollout(dt=dt).until(retrained.tau_d)
a1, length = arc_resample(p1.y)
a2, _ = arc_resample(p2.y)
print(f"path length {length:.3f}, path difference {np.max(np.abs(a1 - a2)):.1e}")
for lo, hi in [(0.2, 1.2), (1.2, 1.6), (1.6, 2.6)]:
    m = (recorded.t >= lo) & (recorded.t < hi)
    print(f"  t in [{lo}, {hi}): peak phase rate {recorded.x_dot[m].max():.3f}")
