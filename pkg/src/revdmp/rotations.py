"""Unit-quaternion algebra: product, log/exp charts and their Jacobians.

Quaternions are arrays ``[w, x, y, z]``. A rotation by angle ``2 theta``
about unit axis ``k`` is ``Q = [cos(theta), sin(theta) k]`` and its
logarithm is the rotation vector ``eta = 2 theta k``. Angular velocities
are expressed in the world frame, ``Omega = [0, omega] = 2 Qdot * conj(Q)``.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, InvalidArgument

SERIES_EPS = 1e-6
ANTIPODE_EPS = 1e-6
IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def _as_quat(Q):
    Q = np.asarray(Q, dtype=float)
    if Q.shape[-1] != 4:
        raise InvalidArgument(f"quaternion must have 4 components, got shape {Q.shape}")
    return Q


def normalize(Q):
    """Scale ``Q`` (or each row of a batch) to unit norm."""
    Q = _as_quat(Q)
    n = np.linalg.norm(Q, axis=-1, keepdims=True)
    if np.any(~(n > 0)) or not np.all(np.isfinite(Q)):
        raise InvalidArgument("cannot normalize a zero or non-finite quaternion")
    return Q / n


def qconj(Q):
    Q = _as_quat(Q)
    return Q * np.array([1.0, -1.0, -1.0, -1.0])


def qprod(Q1, Q2, renormalize: bool = True):
    """Hamilton product ``Q1 * Q2`` (broadcasts over leading axes).

    Set ``renormalize=False`` for products involving non-unit quaternions
    such as ``[0, omega]`` or quaternion derivatives.
    """
    Q1, Q2 = _as_quat(Q1), _as_quat(Q2)
    w1, v1 = Q1[..., :1], Q1[..., 1:]
    w2, v2 = Q2[..., :1], Q2[..., 1:]
    w = w1 * w2 - np.sum(v1 * v2, axis=-1, keepdims=True)
    v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    out = np.concatenate((w, v), axis=-1)
    return normalize(out) if renormalize else out


def pure(v):
    """Embed a 3-vector as the pure quaternion ``[0, v]``."""
    v = np.asarray(v, dtype=float)
    return np.concatenate((np.zeros(v.shape[:-1] + (1,)), v), axis=-1)


def _sinc_half(t):
    """``sin(t/2) / t`` with its Taylor series near 0."""
    t2 = t * t
    series = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0 - t2 ** 3 / 645120.0
    safe = np.where(t < SERIES_EPS, 1.0, t)
    return np.where(t < SERIES_EPS, series, np.sin(safe / 2.0) / safe)


def _theta_over_sin(th):
    t2 = th * th
    series = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2 ** 3 / 15120.0
    safe = np.where(th < SERIES_EPS, 1.0, th)
    return np.where(th < SERIES_EPS, series, safe / np.sin(safe))


def _sin_over_theta(th):
    t2 = th * th
    series = 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 ** 3 / 5040.0
    safe = np.where(th < SERIES_EPS, 1.0, th)
    return np.where(th < SERIES_EPS, series, np.sin(safe) / safe)


def _jq_coeff(th):
    """``(theta cos(theta) - sin(theta)) / sin(theta)^2``."""
    t2 = th * th
    series = -th / 3.0 - 7.0 * th * t2 / 90.0 - 31.0 * th * t2 * t2 / 2520.0
    safe = np.where(th < SERIES_EPS, 1.0, th)
    return np.where(th < SERIES_EPS, series, (safe * np.cos(safe) - np.sin(safe)) / np.sin(safe) ** 2)


def qexp(eta):
    """Map a rotation vector to the unit quaternion rotating by ``|eta|`` about it."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape[-1] != 3:
        raise InvalidArgument(f"rotation vector must have 3 components, got shape {eta.shape}")
    t = np.linalg.norm(eta, axis=-1, keepdims=True)
    Q = np.concatenate((np.cos(t / 2.0), _sinc_half(t) * eta), axis=-1)
    return Q / np.linalg.norm(Q, axis=-1, keepdims=True)


def _angle_axis(Q):
    """Half angle ``theta in [0, pi]`` and unit axis (zero axis for the identity)."""
    Q = normalize(Q)
    vn = np.linalg.norm(Q[..., 1:], axis=-1)
    th = np.arctan2(vn, Q[..., 0])
    if np.any(np.pi - th < ANTIPODE_EPS):
        raise DomainError("quaternion too close to [-1, 0, 0, 0], outside the log chart")
    k = Q[..., 1:] / np.where(vn > 0, vn, 1.0)[..., None]
    return Q, th, k


def qlog(Q):
    """Rotation vector ``2 theta k`` of a unit quaternion; zero for the identity.

    Raises
    ------
    DomainError
        If ``Q`` lies within the exclusion radius of ``[-1, 0, 0, 0]``.
    """
    Q, th, _ = _angle_axis(Q)
    return 2.0 * _theta_over_sin(th)[..., None] * Q[..., 1:]


def jacobian_Q(Q) -> np.ndarray:
    """3x4 Jacobian of ``log`` at ``Q``: ``eta_dot = J_Q Q_dot``."""
    _, th, k = _angle_axis(Q)
    if np.ndim(th):
        raise InvalidArgument("jacobian_Q expects a single quaternion")
    J = np.empty((3, 4))
    J[:, 0] = _jq_coeff(th) * k
    J[:, 1:] = _theta_over_sin(th) * np.eye(3)
    return 2.0 * J


def jacobian_eta(Q) -> np.ndarray:
    """4x3 Jacobian of ``exp`` at ``eta = log(Q)``: ``Q_dot = J_eta eta_dot``."""
    _, th, k = _angle_axis(Q)
    if np.ndim(th):
        raise InvalidArgument("jacobian_eta expects a single quaternion")
    kk = np.outer(k, k)
    J = np.empty((4, 3))
    J[0] = -np.sin(th) * k
    J[1:] = _sin_over_theta(th) * (np.eye(3) - kk) + np.cos(th) * kk
    return 0.5 * J


def eta_dot_from_omega(Q, omega) -> np.ndarray:
    """Rate of ``eta = log(Q)`` for world-frame angular velocity ``omega``.

    ``eta_dot = 1/2 J_Q (Omega * Q)``, since ``Q_dot = 1/2 Omega * Q``.
    """
    Q = normalize(Q)
    return 0.5 * jacobian_Q(Q) @ qprod(pure(omega), Q, renormalize=False)


def _omega_quat(Q, eta_dot):
    Q = normalize(Q)
    return 2.0 * qprod(jacobian_eta(Q) @ np.asarray(eta_dot, dtype=float), qconj(Q), renormalize=False)


def omega_from_eta(Q, eta_dot, check: bool = True) -> np.ndarray:
    """World-frame angular velocity from ``Omega = 2 (J_eta eta_dot) * conj(Q)``."""
    W = _omega_quat(Q, eta_dot)
    if check and abs(W[0]) > 1e-9 * max(1.0, np.linalg.norm(W)):
        raise DomainError(f"angular velocity quaternion has scalar part {W[0]:.3g}")
    return W[1:]


def _jdot_eta_times(Q, eta_dot) -> np.ndarray:
    """``d/dt(J_eta) eta_dot`` by a central difference along ``eta_dot``."""
    u = np.asarray(eta_dot, dtype=float)
    n = np.linalg.norm(u)
    if n == 0.0:
        return np.zeros(4)
    eta = qlog(Q)
    h = 1e-5 / n
    Jp = jacobian_eta(qexp(eta + h * u))
    Jm = jacobian_eta(qexp(eta - h * u))
    return (Jp - Jm) @ u / (2.0 * h)


def omega_dot_from_eta(Q, eta_dot, eta_ddot, omega=None, variant: str = "corrected",
                       check: bool = True) -> np.ndarray:
    """World-frame angular acceleration from the chart derivatives.

    ``variant="corrected"`` (default) evaluates
    ``2 (Jdot_eta eta_dot + J_eta eta_ddot) * conj(Q) + 1/2 [|omega|^2, 0]``,
    the exact derivative of ``Omega = 2 Q_dot * conj(Q)``.
    ``variant="printed"`` evaluates
    ``2 (J_eta eta_dot + J_eta eta_ddot) * conj(Q) - 1/2 [|omega|^2, 0]``
    for comparison; it is not a valid angular acceleration in general.
    """
    Q = normalize(Q)
    eta_dot = np.asarray(eta_dot, dtype=float)
    eta_ddot = np.asarray(eta_ddot, dtype=float)
    if omega is None:
        omega = omega_from_eta(Q, eta_dot, check=False)
    Je = jacobian_eta(Q)
    w2 = float(np.dot(omega, omega))
    if variant == "corrected":
        Qdd = _jdot_eta_times(Q, eta_dot) + Je @ eta_ddot
        W = 2.0 * qprod(Qdd, qconj(Q), renormalize=False) + 0.5 * np.array([w2, 0, 0, 0])
    elif variant == "printed":
        W = 2.0 * qprod(Je @ eta_dot + Je @ eta_ddot, qconj(Q), renormalize=False)
        W = W - 0.5 * np.array([w2, 0, 0, 0])
        return W[1:]
    else:
        raise InvalidArgument(f"unknown variant {variant!r}")
    if check and abs(W[0]) > 1e-9 * max(1.0, np.linalg.norm(W)):
        raise DomainError(f"angular acceleration quaternion has scalar part {W[0]:.3g}")
    return W[1:]


def sign_continuous(Qs) -> np.ndarray:
    """Flip signs so consecutive samples satisfy ``Q_k . Q_{k+1} >= 0``."""
    Qs = normalize(np.atleast_2d(Qs)).copy()
    for k in range(1, len(Qs)):
        if np.dot(Qs[k - 1], Qs[k]) < 0:
            Qs[k] = -Qs[k]
    return Qs


def geodesic_distance(Q1, Q2):
    """Rotation angle (rad) between two orientations, in ``[0, pi]``."""
    D = qprod(Q1, qconj(Q2))
    return 2.0 * np.arctan2(np.linalg.norm(D[..., 1:], axis=-1), np.abs(D[..., 0]))
