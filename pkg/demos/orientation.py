"""Orientation DMP on unit quaternions.

The motion is encoded in the rotation vector ``eta = log(Q Q0*)``, one
decoupled reference per axis.
"""
import numpy as np

from revdmp import OrientationDMP
from revdmp import rotations as rot
from revdmp.orientation import spline_demo

dt = 0.002
Q0 = rot.qexp([0.2, -0.1, 0.4])
t, Q = spline_demo([0.8, -0.5, 1.2], Q0, T=2.0, dt=dt)
model = OrientationDMP.train(t, Q)
print(f"fit residual (rad): {model.fit_residual:.2e}")

fwd = model.rollout("forward", dt=dt)
bwd = model.rollout("backward", dt=dt)
print(f"forward geodesic error to goal:  {rot.geodesic_distance(fwd.Q[-1], model.Qg):.2e} rad")
print(f"backward geodesic error to start: {rot.geodesic_distance(bwd.Q[-1], model.Q0):.2e} rad")
print(f"peak angular speed {np.max(np.linalg.norm(fwd.omega, axis=1)):.3f} rad/s")

new_goal = rot.qexp([0.3, 1.5, -1.0])
g = model.rollout("forward", tau=3.0, dt=dt, goal=new_goal)
print(f"new goal reached within {rot.geodesic_distance(g.Q[-1], new_goal):.2e} rad")
