"""Initial data and exact solutions for the benchmark problems."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ConservedState, GridSpec, ModelParams

PROBLEMS = ("traveling_vortex", "stationary_vortex", "well_prepared")


def k_profile(r):
    """Radial profile entering the traveling-vortex density."""
    r = np.asarray(r, dtype=np.float64)
    out = (2.0 * np.cos(r) + 2.0 * r * np.sin(r) + np.cos(2.0 * r) / 8.0
           + r * np.sin(2.0 * r) / 4.0 + 0.75 * r**2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TravelingVortexParams:
    Gamma: float = 1.5
    omega_freq: float = 4.0 * math.pi
    eta: float = 1.0
    advection: float = 0.6
    center: tuple = (0.5, 0.5)

    def __post_init__(self):
        if not (self.Gamma > 0 and self.omega_freq > 0 and self.eta > 0):
            raise ValueError("Gamma, omega_freq and eta must be positive")

    @classmethod
    def for_epsilon(cls, epsilon, relation="balanced", gamma=2.0, **kw):
        """Vortex amplitude ``eta`` for a target Mach number.

        ``balanced`` takes ``eta = eps / sqrt(gamma)``, for which the density
        profile balances the swirl exactly (steady in the moving frame) when
        ``gamma = 2``. ``paper`` takes ``eps = 0.6 eta / sqrt(110)``.
        """
        if relation == "balanced":
            eta = epsilon / math.sqrt(gamma)
        elif relation == "paper":
            eta = epsilon * math.sqrt(110.0) / 0.6
        else:
            raise ValueError(f"unknown eta relation {relation!r}; use 'balanced' or 'paper'")
        return cls(eta=eta, **kw)


def traveling_vortex_fields(x1, x2, params: TravelingVortexParams):
    """Pointwise ``(rho - 1, u1, u2)`` of the vortex centred at ``params.center``."""
    dx1 = x1 - params.center[0]
    dx2 = x2 - params.center[1]
    wr = params.omega_freq * np.sqrt(dx1**2 + dx2**2)
    inside = wr <= math.pi
    amp = (params.Gamma * params.eta / params.omega_freq) ** 2
    drho = np.where(inside, amp * (k_profile(wr) - k_profile(math.pi)), 0.0)
    swirl = np.where(inside, params.Gamma * (1.0 + np.cos(wr)), 0.0)
    u1 = params.advection - swirl * dx2
    u2 = swirl * dx1
    return drho, u1, u2


def _state(grid, drho, u, time=0.0):
    q = (1.0 + drho)[..., None] * np.stack(u, axis=-1)
    return ConservedState.from_perturbation(drho, q, time, grid)


def exact_traveling_vortex(t, grid: GridSpec, params: TravelingVortexParams, model: ModelParams | None = None):
    x1, x2 = grid.centers()
    ox, lx = grid.origin[0], grid.extent[0]
    shifted = ox + np.mod(x1 - params.advection * t - ox, lx)
    drho, u1, u2 = traveling_vortex_fields(shifted, x2, params)
    return _state(grid, drho, (u1, u2), t)


def init_traveling_vortex(grid: GridSpec, params: TravelingVortexParams, model: ModelParams | None = None):
    return exact_traveling_vortex(0.0, grid, params, model)


@dataclass(frozen=True)
class StationaryVortexParams:
    r1: float = 0.2
    r2: float = 0.4
    abar: float = 0.1
    center: tuple = (0.5, 0.5)

    def __post_init__(self):
        if not 0 < self.r1 < self.r2:
            raise ValueError("need 0 < r1 < r2")

    @property
    def a1(self):
        return self.abar / self.r1

    @property
    def a2(self):
        return -self.abar * self.r2 / (self.r1 - self.r2)

    @property
    def a3(self):
        return self.abar / (self.r1 - self.r2)


def swirl_speed(r, p: StationaryVortexParams = StationaryVortexParams()):
    r = np.asarray(r, dtype=np.float64)
    return np.where(r <= p.r1, p.a1 * r, np.where(r <= p.r2, p.a2 + p.a3 * r, 0.0))


def swirl_integral(r, p: StationaryVortexParams = StationaryVortexParams()):
    """Closed form of ``int_0^r u_theta(s)^2 / s ds``."""
    r = np.asarray(r, dtype=np.float64)
    inner = 0.5 * p.a1**2 * np.minimum(r, p.r1) ** 2
    s = np.clip(r, p.r1, p.r2)
    ring = (p.a2**2 * np.log(s / p.r1) + 2.0 * p.a2 * p.a3 * (s - p.r1)
            + 0.5 * p.a3**2 * (s**2 - p.r1**2))
    return inner + ring


def init_stationary_vortex(grid: GridSpec, model: ModelParams, params: StationaryVortexParams = StationaryVortexParams()):
    if model.gamma != 2.0:
        warnings.warn("the stationary vortex is only in exact balance for gamma = 2", stacklevel=2)
    x, y = grid.centers()
    dx, dy = x - params.center[0], y - params.center[1]
    r = np.sqrt(dx**2 + dy**2)
    drho = 0.5 * model.epsilon**2 * swirl_integral(r, params)
    # u_theta / r is a1 on the inner core, which removes the 0/0 at r = 0.
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r <= params.r1, params.a1, swirl_speed(r, params) / r)
    return _state(grid, drho, (ratio * dy, -ratio * dx))


def well_prepared_fields(x, y, epsilon):
    """``rho - 1 = eps^2 rho2`` and ``u = u0 + eps u1`` with ``div u0 = 0``."""
    s2x, s2y = np.sin(2 * np.pi * x), np.sin(2 * np.pi * y)
    u0 = (np.sin(np.pi * x) ** 2 * s2y, -s2x * np.sin(np.pi * y) ** 2)
    u1 = (np.cos(2 * np.pi * y), np.cos(2 * np.pi * x))
    rho2 = np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
    drho = epsilon**2 * rho2
    u = (u0[0] + epsilon * u1[0], u0[1] + epsilon * u1[1])
    return drho, u


def init_well_prepared(grid: GridSpec, model: ModelParams, mode: str = "taylor_green"):
    if grid.dim != 2:
        raise ValueError("well-prepared data are defined on 2-d grids")
    if mode != "taylor_green":
        raise ValueError(f"unknown well-prepared mode {mode!r}")
    x, y = grid.centers()
    drho, u = well_prepared_fields(x, y, model.epsilon)
    return _state(grid, drho, u)


def make_initial_state(problem, grid, model, eta_relation="balanced"):
    if problem == "traveling_vortex":
        params = TravelingVortexParams.for_epsilon(model.epsilon, eta_relation, model.gamma)
        return init_traveling_vortex(grid, params, model)
    if problem == "stationary_vortex":
        return init_stationary_vortex(grid, model)
    if problem == "well_prepared":
        return init_well_prepared(grid, model)
    raise ValueError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}")
