"""Error norms, convergence orders and flow diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConservedState, GridSpec, ModelParams, pressure


def l2_error(a, b, grid: GridSpec) -> float:
    """Cell-volume weighted discrete L2 norm of ``a - b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return math.sqrt(float(np.sum((a - b) ** 2)) * grid.cell_volume)


def eoc(err_coarse, err_fine):
    """``log2(err_coarse / err_fine)``; ``None`` if either error is not positive."""
    if not (err_coarse > 0 and err_fine > 0):
        return None
    return math.log2(err_coarse / err_fine)


def kinetic_energy(state: ConservedState, grid: GridSpec) -> float:
    ke = 0.5 * np.sum(state.q**2, axis=-1) / state.rho
    return float(np.sum(ke)) * grid.cell_volume


def mach_field(state: ConservedState, model: ModelParams, grid: GridSpec | None = None) -> np.ndarray:
    """``sqrt(|u|^2 / (gamma p / rho))``, no epsilon factor."""
    u2 = np.sum(state.q**2, axis=-1) / state.rho**2
    c2 = model.gamma * pressure(state.rho, model.gamma) / state.rho
    return np.sqrt(u2 / c2)


def div_u_max(state: ConservedState, grid: GridSpec) -> float:
    """Max over cells of the wide central divergence of ``u = q / rho``."""
    u = state.q / state.rho[..., None]
    div = np.zeros(grid.n)
    for m, h in enumerate(grid.dx):
        div += (np.roll(u[..., m], -1, m) - np.roll(u[..., m], 1, m)) / (2.0 * h)
    return float(np.max(np.abs(div)))


def density_oscillation(state: ConservedState) -> float:
    """``max(rho) - min(rho)``, taken on the perturbation for precision."""
    return float(np.max(state.drho) - np.min(state.drho))


@dataclass
class DiagnosticsRecord:
    ke0: float
    times: list = field(default_factory=list)
    dt_history: list = field(default_factory=list)
    kinetic_energy: list = field(default_factory=list)
    rel_ke_change: list = field(default_factory=list)
    max_abs_div_u: list = field(default_factory=list)
    density_oscillation: list = field(default_factory=list)

    @classmethod
    def start(cls, state, grid):
        return cls(kinetic_energy(state, grid))

    def append(self, state, grid, dt):
        ke = kinetic_energy(state, grid)
        self.times.append(float(state.time))
        self.dt_history.append(float(dt))
        self.kinetic_energy.append(ke)
        self.rel_ke_change.append((ke - self.ke0) / self.ke0 if self.ke0 > 0 else 0.0)
        self.max_abs_div_u.append(div_u_max(state, grid))
        self.density_oscillation.append(density_oscillation(state))

    def __len__(self):
        return len(self.times)

    def rows(self):
        return zip(self.times, self.dt_history, self.kinetic_energy, self.rel_ke_change,
                   self.max_abs_div_u, self.density_oscillation)


@dataclass
class ConvergenceRow:
    n: int
    err_u1: float
    eoc_u1: float | None
    err_u2: float
    eoc_u2: float | None
    failed: bool = False


def convergence_table(ns, err_u1, err_u2) -> list[ConvergenceRow]:
    """Rows with EOC against the previous (coarser) row. ``nan`` errors mark
    failed cases and give absent EOCs on both sides."""
    rows = []
    for i, (n, e1, e2) in enumerate(zip(ns, err_u1, err_u2)):
        failed = not (np.isfinite(e1) and np.isfinite(e2))
        o1 = o2 = None
        if i > 0 and not failed and not rows[-1].failed:
            o1 = eoc(err_u1[i - 1], e1)
            o2 = eoc(err_u2[i - 1], e2)
        rows.append(ConvergenceRow(int(n), float(e1), o1, float(e2), o2, failed))
    return rows


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
