"""Reversible dynamic movement primitives.

The main entry points are :class:`ReversibleDMP` (positions),
:class:`OrientationDMP` (unit quaternions) and :class:`ClassicalDMP`, the
goal-attractor baseline used for comparison.
"""
from .basis import KernelSet, fit_weights, make_kernels
from .classical import ClassicalDMP, reverse_residual
from .couplings import LimitCoupling, ObstacleCoupling
from .errors import (DegenerateDemoError, DomainError, IntegrationError, InvalidArgument, NoMotionError,
                     RevDMPError, ValidationError)
from .io import load_model, read_demo, read_trajectory, save_model, write_trajectory
from .orientation import OrientationDMP
from .phase import (BACKWARD, FORWARD, CanonicalSystem, NominalPhase, PhaseStopConfig, TrapezoidalPulse,
                    TeachPhase)
from .reversible import Perturbation, ReversibleDMP
from .scenarios import REGISTRY, SCENARIOS, run_scenario
from .sim import QuaternionTrajectory, Trajectory, coincide_error, mirror_error

__version__ = "0.1.0"

__all__ = [
    "BACKWARD", "FORWARD", "CanonicalSystem", "ClassicalDMP", "DegenerateDemoError", "DomainError",
    "IntegrationError", "InvalidArgument", "KernelSet", "LimitCoupling", "NoMotionError", "NominalPhase",
    "ObstacleCoupling", "OrientationDMP", "Perturbation", "PhaseStopConfig", "TrapezoidalPulse", "QuaternionTrajectory",
    "REGISTRY", "RevDMPError", "ReversibleDMP", "SCENARIOS", "TeachPhase", "Trajectory", "ValidationError",
    "coincide_error", "fit_weights", "load_model", "make_kernels", "mirror_error", "read_demo",
    "read_trajectory", "reverse_residual", "run_scenario", "save_model", "write_trajectory",
]
