"""Additive IMEX-RK time stepping with the elliptic density reformulation.

Per stage ``k`` the explicit parts

    rho_hat = rho^n - dt * sum_{l<k} a[k,l] div(q^l)
    q_hat   = q^n   - dt * sum_{l<k} at[k,l] (div F_hat(U^l))
                    - dt * sum_{l<k} a[k,l] grad(rho^l) / eps^2

are assembled first, then ``rho^k`` solves

    rho^k - (dt a[k,k] / eps)^2 div grad rho^k = rho_hat - dt a[k,k] div(q_hat)

and ``q^k = q_hat - dt a[k,k] grad(rho^k) / eps^2``. Schemes are stiffly
accurate, so the step result is the last stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .core import ConservedState, GridSpec, ModelParams
from .elliptic import LinearOperatorSpec, Stencil, solve
from .spatial import LIMITERS, divergence, gradient, momentum_flux_divergence
from .tableaux import DoubleTableau, get_tableau

log = logging.getLogger(__name__)


class PositivityError(RuntimeError):
    def __init__(self, stage, time):
        super().__init__(f"density lost positivity in stage {stage} of the step from t={time:.6g}")
        self.stage = stage
        self.time = time


@dataclass
class StepConfig:
    cfl: float = 0.45
    tableau: DoubleTableau = field(default_factory=lambda: get_tableau("DP2-A(2,4,2)"))
    limiter: str = "minmod"
    stencil: Stencil = Stencil.COMPOSED
    elliptic_tol: float = 1e-12
    solver: str = "fft"

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if isinstance(self.tableau, str):
            self.tableau = get_tableau(self.tableau)
        if self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}; choose from {LIMITERS}")
        self.stencil = Stencil(self.stencil)
        if not self.elliptic_tol > 0:
            raise ValueError("elliptic_tol must be positive")
        if self.solver not in ("fft", "cg"):
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass
class StageWorkspace:
    """Per-step stage storage. Densities are perturbations ``rho - 1``."""

    rho_n: np.ndarray
    q_n: np.ndarray
    stage_rho: list = field(default_factory=list)
    stage_q: list = field(default_factory=list)
    stage_div_q: list = field(default_factory=list)
    stage_grad_rho: list = field(default_factory=list)
    stage_F: dict = field(default_factory=dict)
    rho_hat: np.ndarray | None = None
    q_hat: np.ndarray | None = None


def compute_dt(state: ConservedState, params: ModelParams, grid: GridSpec, cfl: float) -> float:
    """CFL step from the explicit eigenvalues ``u_m`` and ``2 u_m``.

    ``params`` is accepted for interface symmetry only; the step never
    depends on ``epsilon``.
    """
    u = state.q / state.rho[..., None]
    rate = max(float(np.max(2.0 * np.abs(u[..., m]))) / h for m, h in enumerate(grid.dx))
    if rate == 0.0:
        return cfl * min(grid.dx)
    return cfl / rate


def _flux_divergence(ws, l, config, params, grid):
    if l not in ws.stage_F:
        ws.stage_F[l] = momentum_flux_divergence(
            None, ws.stage_q[l], grid, params.gamma, params.epsilon, config.limiter, drho=ws.stage_rho[l]
        )
    return ws.stage_F[l]


def assemble_stage_explicit(k, ws: StageWorkspace, tableau: DoubleTableau, params, grid, dt, config=None):
    """Explicitly computable stage density and momentum (``k`` is 0-based).

    The returned density is the perturbation ``rho_hat - 1``.
    """
    config = config or StepConfig(tableau=tableau)
    inv_eps2 = 1.0 / params.epsilon**2
    rho_hat = ws.rho_n.copy()
    q_hat = ws.q_n.copy()
    for l in range(k):
        a = tableau.a_imp[k, l]
        at = tableau.a_exp[k, l]
        if a != 0.0:
            rho_hat -= dt * a * ws.stage_div_q[l]
            q_hat -= (dt * a * inv_eps2) * ws.stage_grad_rho[l]
        if at != 0.0:
            q_hat -= dt * at * _flux_divergence(ws, l, config, params, grid)
    ws.rho_hat, ws.q_hat = rho_hat, q_hat
    return rho_hat, q_hat


def imex_stage(k, ws: StageWorkspace, config: StepConfig, params: ModelParams, grid: GridSpec, dt, time=0.0):
    """Elliptic solve for the stage density then the momentum correction.

    Returns ``(drho_k, q_k)`` with ``drho_k = rho_k - 1``. The operator
    annihilates constants, so solving for the perturbation is exact.
    """
    tableau = config.tableau
    rho_hat, q_hat = assemble_stage_explicit(k, ws, tableau, params, grid, dt, config)
    akk = tableau.a_imp[k, k]
    if akk == 0.0:
        rho_k, q_k = rho_hat, q_hat
    else:
        spec = LinearOperatorSpec((dt * akk / params.epsilon) ** 2, grid, config.stencil)
        rhs = rho_hat - dt * akk * divergence(q_hat, grid)
        rho_k, _ = solve(spec, rhs, config.elliptic_tol, method=config.solver)
        q_k = q_hat - (dt * akk / params.epsilon**2) * gradient(rho_k, grid)
    if not np.all(rho_k > -1.0):
        raise PositivityError(k + 1, time)
    ws.stage_rho.append(rho_k)
    ws.stage_q.append(q_k)
    ws.stage_div_q.append(divergence(q_k, grid))
    ws.stage_grad_rho.append(gradient(rho_k, grid))
    return rho_k, q_k


def imex_step(state: ConservedState, config: StepConfig, params: ModelParams, grid: GridSpec, dt=None):
    if dt is None:
        dt = compute_dt(state, params, grid, config.cfl)
    ws = StageWorkspace(state.drho, state.q)
    for k in range(config.tableau.s):
        drho_k, q_k = imex_stage(k, ws, config, params, grid, dt, state.time)
    return ConservedState.from_perturbation(drho_k, q_k, state.time + dt, grid)


def run(state, config, params, grid, t_end, fixed_dt=None, max_steps=None, callback=None):
    """Advance to ``t_end``; the last step is clipped to land on it exactly.

    ``callback(step_index, state, dt)`` is called after every step. Returns the
    final state and a :class:`DiagnosticsRecord`.
    """
    if t_end < state.time:
        raise ValueError(f"t_end={t_end} is before the state time {state.time}")
    record = diagnostics.DiagnosticsRecord.start(state, grid)
    step = 0
    while state.time < t_end and (max_steps is None or step < max_steps):
        dt = fixed_dt if fixed_dt is not None else compute_dt(state, params, grid, config.cfl)
        last = state.time + dt >= t_end - 1e-12 * max(1.0, abs(t_end))
        if last:
            dt = t_end - state.time
        state = imex_step(state, config, params, grid, dt)
        if last:
            state.time = t_end
        step += 1
        record.append(state, grid, dt)
        log.debug("step %d t=%.6g dt=%.3e", step, state.time, dt)
        if callback is not None:
            callback(step, state, dt)
    return state, record
