"""Online coupling terms: repulsive joint/workspace limits and obstacle steering.

Couplings expose two hooks used by the rollouts:

- ``velocity(y)``: addend to the velocity equation,
- ``acceleration(y, yd)``: addend to the acceleration equation.

Both return arrays shaped like ``y``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class LimitCoupling:
    """Velocity repulsion ``-gamma / (y_L - y)^3`` keeping each DoF below ``y_L``.

    Parameters
    ----------
    y_L : array_like
        Per-DoF upper limit; ``inf`` disables a DoF.
    gamma : float
        Repulsion gain (>= 0; 0 turns the coupling off).
    delta : float
        Smallest gap used in the formula. Closer to (or beyond) the limit the
        repulsion saturates at ``gamma / delta^3``.
    """

    y_L: tuple
    gamma: float
    delta: float = 1e-4

    def __post_init__(self):
        y_L = tuple(float(v) for v in np.atleast_1d(np.asarray(self.y_L, dtype=float)))
        if any(np.isnan(v) for v in y_L):
            raise InvalidArgument("limit must not be NaN")
        if not (self.gamma >= 0 and np.isfinite(self.gamma)):
            raise InvalidArgument("gamma must be finite and >= 0")
        if not self.delta > 0:
            raise InvalidArgument("delta must be > 0")
        object.__setattr__(self, "y_L", y_L)

    def velocity(self, y):
        y = np.asarray(y, dtype=float)
        lim = np.asarray(self.y_L)
        if lim.shape != y.shape:
            raise InvalidArgument(f"limit has {lim.size} DoFs, state has {y.size}")
        active = np.isfinite(lim)
        gap = np.where(active, lim - y, 1.0)
        gap = np.maximum(gap, self.delta)
        return np.where(active, -self.gamma / gap ** 3, 0.0)

    def acceleration(self, y, yd):
        return np.zeros_like(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class ObstacleCoupling:
    """Steering acceleration ``gamma R yd phi exp(-beta phi)`` around a point obstacle.

    ``R`` rotates by ``pi/2`` about ``k = (p_o - y) x yd`` and ``phi`` is the
    angle between the velocity and the direction to the obstacle. Planar
    problems are embedded in 3-D with zero third coordinate.
    """

    p_o: tuple
    gamma: float
    beta: float

    def __post_init__(self):
        p = tuple(float(v) for v in np.atleast_1d(np.asarray(self.p_o, dtype=float)))
        if len(p) not in (2, 3) or not np.all(np.isfinite(p)):
            raise InvalidArgument("obstacle position must be a finite 2- or 3-vector")
        if not (self.gamma >= 0 and np.isfinite(self.gamma)):
            raise InvalidArgument("gamma must be finite and >= 0")
        if not self.beta > 0:
            raise InvalidArgument("beta must be > 0")
        object.__setattr__(self, "p_o", p)

    def velocity(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def acceleration(self, y, yd):
        y = np.asarray(y, dtype=float)
        yd = np.asarray(yd, dtype=float)
        m = len(self.p_o)
        if y.shape != (m,) or yd.shape != (m,):
            raise InvalidArgument(f"obstacle coupling expects {m}-D position and velocity")
        p, v = _embed(np.asarray(self.p_o) - y), _embed(yd)
        np_, nv = np.linalg.norm(p), np.linalg.norm(v)
        if np_ < DEGENERATE_EPS or nv < DEGENERATE_EPS:
            return np.zeros(m)
        phi = np.arccos(np.clip(p @ v / (np_ * nv), -1.0, 1.0))
        k = np.cross(p, v)
        nk = np.linalg.norm(k)
        if nk < DEGENERATE_EPS * np_ * nv:
            return np.zeros(m)
        # rotation by pi/2 about an axis orthogonal to v reduces to a cross product
        rv = np.cross(k / nk, v)
        return (self.gamma * phi * np.exp(-self.beta * phi) * rv)[:m]

    def clearance(self, y) -> np.ndarray:
        """Distance from each row of ``y`` to the obstacle."""
        return np.linalg.norm(np.atleast_2d(y) - np.asarray(self.p_o), axis=1)


def _embed(v):
    return np.append(v, 0.0) if len(v) == 2 else v


def limit_velocity_term(c: LimitCoupling, y):
    return c.velocity(y)


def obstacle_accel_term(c: ObstacleCoupling, y, y_dot):
    return c.acceleration(y, y_dot)
