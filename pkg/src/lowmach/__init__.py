"""Asymptotic-preserving IMEX-RK finite-volume solver for low-Mach isentropic Euler flow."""

from .core import ConservedState, GridSpec, ModelParams, pressure
from .stepper import StepConfig, compute_dt, imex_step, run
from .tableaux import get_tableau

__all__ = [
    "ConservedState", "GridSpec", "ModelParams", "pressure",
    "StepConfig", "compute_dt", "imex_step", "run", "get_tableau",
]
