"""Normalized Gaussian basis over the phase variable and weight fitting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .phase import CanonicalSystem

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class KernelSet:
    """Gaussian kernels ``psi_i(x) = exp(-h_i (x - c_i)^2)``.

    Parameters
    ----------
    centers : array, shape (N,)
        Strictly increasing kernel centers (phase units).
    inv_widths : array, shape (N,)
        Positive inverse widths ``h_i``.
    a_h : float
        Overlap factor used to derive the widths (kept for serialization).
    """

    centers: np.ndarray
    inv_widths: np.ndarray
    a_h: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).copy()
        h = np.asarray(self.inv_widths, dtype=float).copy()
        if c.ndim != 1 or c.shape != h.shape:
            raise InvalidArgument("centers and inv_widths must be matching 1-D arrays")
        if len(c) < 2:
            raise InvalidArgument("need at least 2 kernels")
        if np.any(np.diff(c) <= 0):
            raise InvalidArgument("kernel centers must be strictly increasing")
        if np.any(~(h > 0)) or not np.all(np.isfinite(h)):
            raise InvalidArgument("inverse widths must be finite and > 0")
        if not self.a_h > 0:
            raise InvalidArgument("a_h must be > 0")
        c.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "inv_widths", h)

    @property
    def n(self) -> int:
        return len(self.centers)

    @classmethod
    def from_centers(cls, centers, a_h=1.0) -> "KernelSet":
        """Widths ``h_i = a_h / (c_{i+1} - c_i)^2`` with ``h_N = h_{N-1}``."""
        c = np.asarray(centers, dtype=float)
        if len(c) < 2:
            raise InvalidArgument("need at least 2 kernels")
        h = a_h / np.diff(c) ** 2
        return cls(c, np.append(h, h[-1]), a_h)

    def _psi(self, x):
        d = x[:, None] - self.centers[None, :]
        return d, np.exp(-self.inv_widths * d * d)

    def eval(self, x):
        """Normalized basis ``phi(x)``; shape ``(N,)`` for scalar ``x`` else ``(M, N)``."""
        return self.eval_derivs(x, order=0)[0]

    def eval_derivs(self, x, order=2):
        """``phi`` and its first ``order`` phase-derivatives (quotient rule).

        Falls back to a one-hot vector at the nearest center (with zero
        derivatives) where every kernel underflows.
        """
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d, psi = self._psi(x)
        S = psi.sum(axis=1, keepdims=True)
        dead = S[:, 0] < UNDERFLOW
        S = np.where(dead[:, None], 1.0, S)
        phi = psi / S
        out = [phi]
        if order >= 1:
            dpsi = -2.0 * self.inv_widths * d * psi
            S1 = dpsi.sum(axis=1, keepdims=True)
            dphi = (dpsi - phi * S1) / S
            out.append(dphi)
        if order >= 2:
            ddpsi = (4.0 * self.inv_widths ** 2 * d * d - 2.0 * self.inv_widths) * psi
            S2 = ddpsi.sum(axis=1, keepdims=True)
            ddphi = (ddpsi - 2.0 * dphi * S1 - phi * S2) / S
            out.append(ddphi)
        if np.any(dead):
            nearest = np.argmin(np.abs(d[dead]), axis=1)
            out[0][dead] = 0.0
            out[0][np.nonzero(dead)[0], nearest] = 1.0
            for a in out[1:]:
                a[dead] = 0.0
        if scalar:
            out = [a[0] for a in out]
        return tuple(out)


def make_kernels(n: int, cs: CanonicalSystem, a_h: float = 1.0) -> KernelSet:
    """Kernels centered at the phase of ``n`` instants equally spaced in ``[0, tau]``."""
    if n < 2:
        raise InvalidArgument(f"need at least 2 kernels, got {n}")
    if not a_h > 0:
        raise InvalidArgument("a_h must be > 0")
    fwd = cs.with_direction("forward")
    centers = np.sort(fwd.phase_at(np.linspace(0.0, fwd.tau, n)))
    return KernelSet.from_centers(centers, a_h)


def fit_weights(ks: KernelSet, xs, ys, lam: float = 1e-8, method: str = "ls", pin=None):
    """Fit weights so that ``phi(x)^T w`` approximates ``ys``.

    Parameters
    ----------
    ks : KernelSet
    xs : array, shape (M,)
        Phase samples.
    ys : array, shape (M,) or (M, D)
        Targets; a 2-D array fits one weight vector per column.
    lam : float
        Ridge regularizer for the least-squares solve.
    method : {"ls", "lwr"}
        Regularized least squares over all samples, or locally weighted
        regression (one weighted constant fit per kernel).
    pin : tuple (x_p, y_p), optional
        Equality constraints ``phi(x_p)^T w = y_p`` imposed on the
        least-squares solution (ignored by ``"lwr"``).

    Returns
    -------
    w : array, shape (N,) or (N, D)
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or len(xs) < 2:
        raise InvalidArgument("need at least 2 phase samples")
    if ys.shape[0] != len(xs):
        raise InvalidArgument("xs and ys lengths differ")
    if lam < 0:
        raise InvalidArgument("lambda must be >= 0")
    Phi = ks.eval(xs)
    if method == "ls":
        A = Phi.T @ Phi + lam * np.eye(ks.n)
        b = Phi.T @ ys
        if pin is None:
            return np.linalg.solve(A, b)
        # KKT system of the constrained problem
        C = ks.eval(np.atleast_1d(np.asarray(pin[0], dtype=float)))
        d = np.asarray(pin[1], dtype=float).reshape((C.shape[0],) + ys.shape[1:])
        m = C.shape[0]
        K = np.block([[A, C.T], [C, np.zeros((m, m))]])
        return np.linalg.solve(K, np.concatenate([b, d]))[: ks.n]
    if method == "lwr":
        _, psi = ks._psi(xs)
        den = psi.sum(axis=0) + lam
        return (psi.T @ ys) / (den if ys.ndim == 1 else den[:, None])
    raise InvalidArgument(f"unknown fit method {method!r}")


def objective(ks: KernelSet, xs, ys, w, lam: float = 1e-8) -> float:
    """Regularized least-squares cost minimized by :func:`fit_weights`."""
    Phi = ks.eval(np.asarray(xs, dtype=float))
    r = Phi @ w - ys
    return float(np.sum(r * r) + lam * np.sum(np.asarray(w) ** 2))
