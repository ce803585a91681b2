"""Limit and obstacle couplings on a planar motion.

Both couplings are added to the tracking dynamics, so they act the same
way whether the motion runs forward or backward.
"""
import numpy as np

from revdmp import LimitCoupling, ObstacleCoupling, ReversibleDMP
from revdmp.sim import sigmoid_arcs_demo

dt = 0.002
demo = sigmoid_arcs_demo(T=2.0, dt=dt)
model = ReversibleDMP.train(demo.t, demo.y)
print(f"nominal peak of y2: {np.max(demo.y[:, 1]):.4f}")

limit = LimitCoupling(y_L=(np.inf, 0.72), gamma=1e-6)
for direction in ("forward", "backward"):
    tr = model.rollout(direction, dt=dt, couplings=[limit])
    print(f"{direction:8s} with limit 0.72: max y2 = {np.max(tr.y[:, 1]):.4f}")

# Point obstacle placed right on the demonstrated path.
obstacle = ObstacleCoupling(p_o=tuple(demo.at(0.6)[0]), gamma=1000.0, beta=8.0)
for direction in ("forward", "backward"):
    tr = model.rollout(direction, dt=dt, couplings=[obstacle])
    acc = tr.meta["coupling_acc"]
    print(f"{direction:8s} obstacle clearance {np.min(obstacle.clearance(tr.y)):.4f}, "
          f"max |f_o . yd| {np.max(np.abs(np.sum(acc * tr.yd, axis=1))):.1e}")
