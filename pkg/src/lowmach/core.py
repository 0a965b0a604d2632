"""Grid geometry, conserved state and the power-law equation of state.

Fields live on a periodic structured grid. ``rho`` has shape ``grid.n`` and
``q`` has shape ``grid.n + (dim,)`` so spatial axis ``m`` is array axis ``m``
for both. Periodic neighbours are reached with ``np.roll``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when a thermodynamic quantity is evaluated outside its domain."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in 1 or 2 (or 3) dimensions."""

    n: tuple[int, ...]
    origin: tuple[float, ...] | None = None
    extent: tuple[float, ...] | None = None

    def __post_init__(self):
        n = tuple(int(k) for k in self.n)
        if not 1 <= len(n) <= 3:
            raise ValueError(f"grid dimension must be 1..3, got {len(n)}")
        if any(k < 4 for k in n):
            raise ValueError(f"every axis needs at least 4 cells, got n={n}")
        origin = (0.0,) * len(n) if self.origin is None else tuple(map(float, self.origin))
        extent = (1.0,) * len(n) if self.extent is None else tuple(map(float, self.extent))
        if len(origin) != len(n) or len(extent) != len(n):
            raise ValueError("origin/extent must have one entry per axis")
        if any(e <= 0 for e in extent):
            raise ValueError(f"extent must be positive, got {extent}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extent", extent)

    @classmethod
    def square(cls, n: int, dim: int = 2) -> "GridSpec":
        """``n**dim`` cells on the unit cube."""
        return cls((n,) * dim)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(e / k for e, k in zip(self.extent, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    def centers(self) -> tuple[np.ndarray, ...]:
        """Cell-centre coordinate arrays, one per axis, each of shape ``n``."""
        axes = [o + (np.arange(k) + 0.5) * h for o, k, h in zip(self.origin, self.n, self.dx)]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    gamma: float = 2.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")


@dataclass
class ConservedState:
    """Density and momentum on the grid.

    Low-Mach densities sit within ``O(eps**2)`` of one, below what ``rho``
    itself resolves for small ``eps``. The perturbation ``drho = rho - 1`` is
    therefore kept alongside ``rho`` and is what the stepper evolves; build
    states with :meth:`from_perturbation` to keep it exact.
    """

    rho: np.ndarray | None
    q: np.ndarray
    time: float = 0.0
    grid: GridSpec | None = field(default=None, repr=False)
    drho: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.drho is not None:
            self.drho = np.asarray(self.drho, dtype=np.float64)
            self.rho = 1.0 + self.drho
        elif self.rho is None:
            raise ValueError("need either rho or drho")
        else:
            self.rho = np.asarray(self.rho, dtype=np.float64)
            self.drho = self.rho - 1.0
        self.q = np.asarray(self.q, dtype=np.float64)
        if self.q.shape != self.rho.shape + (self.rho.ndim,):
            raise ValueError(f"q shape {self.q.shape} does not match rho shape {self.rho.shape}")
        if self.grid is not None and self.rho.shape != self.grid.n:
            raise ValueError(f"rho shape {self.rho.shape} does not match grid {self.grid.n}")
        if not np.all(self.drho > -1.0):
            raise DomainError("density must be positive in every cell")

    @classmethod
    def from_perturbation(cls, drho, q, time=0.0, grid=None) -> "ConservedState":
        return cls(None, q, time, grid, drho)

    def copy(self) -> "ConservedState":
        return ConservedState(None, self.q.copy(), self.time, self.grid, self.drho.copy())


def pressure(rho, gamma):
    """Power-law pressure ``rho**gamma``."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0):
        raise DomainError("pressure is only defined for positive density")
    out = rho**gamma
    return float(out) if out.ndim == 0 else out


def split_pressure(rho, gamma, drho=None):
    """``p(rho) - rho`` without cancellation near ``rho = 1``.

    Evaluated as ``rho * expm1((gamma - 1) * log(rho))``. If the perturbation
    ``drho = rho - 1`` is given it is used instead of ``rho``, which keeps
    full relative precision for ``|drho|`` far below machine epsilon.
    """
    if drho is not None:
        drho = np.asarray(drho, dtype=np.float64)
        if np.any(drho <= -1.0):
            raise DomainError("pressure is only defined for positive density")
        out = (1.0 + drho) * np.expm1((gamma - 1.0) * np.log1p(drho))
    else:
        rho = np.asarray(rho, dtype=np.float64)
        if np.any(rho <= 0):
            raise DomainError("pressure is only defined for positive density")
        out = rho * np.expm1((gamma - 1.0) * np.log(rho))
    return float(out) if out.ndim == 0 else out


def wrap_index(i, grid: GridSpec) -> tuple[int, ...]:
    i = (i,) if np.isscalar(i) else tuple(i)
    if len(i) != grid.dim:
        raise ValueError(f"index {i} has wrong length for a {grid.dim}-d grid")
    return tuple(int(k) % n for k, n in zip(i, grid.n))


def primitive_velocity(state: ConservedState) -> np.ndarray:
    return state.q / state.rho[..., None]
