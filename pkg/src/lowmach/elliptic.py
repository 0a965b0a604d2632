"""Helmholtz-type density solve ``(I - coef * L_h) rho = rhs`` on periodic grids.

Two Laplacians are available. ``composed`` is the divergence of the gradient
used by the stepper (both ``delta(mu(.))/dx``), so the reformulated stage is
algebraically the coupled mass/momentum stage. ``compact`` is the usual
three-point ``delta(delta(.))/dx**2`` stencil.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import GridSpec
from .spatial import divergence, gradient


class Stencil(enum.Enum):
    COMPOSED = "composed"
    COMPACT = "compact"


class EllipticConvergenceError(RuntimeError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class LinearOperatorSpec:
    coef: float
    grid: GridSpec
    stencil: Stencil = Stencil.COMPOSED

    def __post_init__(self):
        if not self.coef >= 0:
            raise ValueError(f"coef must be nonnegative, got {self.coef}")
        object.__setattr__(self, "stencil", Stencil(self.stencil))


@dataclass(frozen=True)
class EllipticSolveReport:
    iterations: int
    relative_residual: float
    converged: bool


def laplacian(rho: np.ndarray, grid: GridSpec, stencil=Stencil.COMPOSED) -> np.ndarray:
    stencil = Stencil(stencil)
    if stencil is Stencil.COMPOSED:
        return divergence(gradient(rho, grid), grid)
    out = np.zeros(grid.n)
    for m, h in enumerate(grid.dx):
        out += (np.roll(rho, -1, m) - 2.0 * rho + np.roll(rho, 1, m)) / h**2
    return out


def apply_operator(spec: LinearOperatorSpec, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != spec.grid.n:
        raise ValueError(f"shape {rho.shape} does not match grid {spec.grid.n}")
    if spec.coef == 0.0:
        return rho.copy()
    return rho - spec.coef * laplacian(rho, spec.grid, spec.stencil)


def assemble_matrix(spec: LinearOperatorSpec) -> np.ndarray:
    """Dense matrix of the operator in row-major cell ordering. Small grids only."""
    n = spec.grid.size
    cols = [apply_operator(spec, e.reshape(spec.grid.n)).ravel() for e in np.eye(n)]
    return np.array(cols).T


def symbol(spec: LinearOperatorSpec) -> np.ndarray:
    """Eigenvalues of the operator on the discrete Fourier modes (``fftn`` layout)."""
    neg_lap = 0.0
    for m, (k, h) in enumerate(zip(spec.grid.n, spec.grid.dx)):
        theta = 2.0 * np.pi * np.fft.fftfreq(k)
        if spec.stencil is Stencil.COMPOSED:
            s = np.sin(theta) ** 2 / h**2
        else:
            s = 4.0 * np.sin(0.5 * theta) ** 2 / h**2
        shape = [1] * spec.grid.dim
        shape[m] = k
        neg_lap = neg_lap + s.reshape(shape)
    return 1.0 + spec.coef * neg_lap


def operator_norm(spec: LinearOperatorSpec) -> float:
    """Spectral norm of the (symmetric positive definite) operator."""
    return float(np.max(symbol(spec)))


def _backward_target(spec, b, x, tol, anorm):
    return tol * (np.linalg.norm(b) + anorm * np.linalg.norm(x))


def _cg(spec, b, tol, max_iter):
    # b has zero mean; x0 = 0. The recursive residual drifts from the true
    # one, so on apparent convergence the true residual is recomputed and
    # the iteration restarted from it if still above target.
    x = np.zeros_like(b)
    anorm = operator_norm(spec)
    k = 0
    while k < max_iter:
        r = b - apply_operator(spec, x) if k else b.copy()
        rr = np.vdot(r, r)
        if rr <= _backward_target(spec, b, x, tol, anorm) ** 2:
            break
        p = r.copy()
        while rr > _backward_target(spec, b, x, tol, anorm) ** 2 and k < max_iter:
            ap = apply_operator(spec, p)
            alpha = rr / np.vdot(p, ap)
            x += alpha * p
            r -= alpha * ap
            rr_new = np.vdot(r, r)
            p = r + (rr_new / rr) * p
            rr = rr_new
            k += 1
    return x, k


def _fft(spec, b):
    return np.fft.ifftn(np.fft.fftn(b) / symbol(spec)).real


def solve(spec: LinearOperatorSpec, rhs, tol: float = 1e-12, method: str = "cg", max_iter=None):
    """Solve the operator equation; returns ``(rho, report)``.

    The constant mode has eigenvalue one, so the mean of ``rhs`` is split off
    and carried through exactly; the iteration only sees the fluctuation. The
    ``fft`` method is a direct diagonal solve in Fourier space.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != spec.grid.n:
        raise ValueError(f"shape {rhs.shape} does not match grid {spec.grid.n}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs must be finite")
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs), EllipticSolveReport(0, 0.0, True)
    if spec.coef == 0.0:
        return rhs.copy(), EllipticSolveReport(0, 0.0, True)

    mean = rhs.mean()
    fluct = rhs - mean
    if method == "cg":
        max_iter = 10 * spec.grid.size if max_iter is None else max_iter
        y, iterations = _cg(spec, fluct, tol, max_iter)
    elif method == "fft":
        y, iterations = _fft(spec, fluct), 1
    else:
        raise ValueError(f"unknown method {method!r}; use 'cg' or 'fft'")
    rho = y + mean

    res = np.linalg.norm(apply_operator(spec, y) - fluct)
    rel = res / rhs_norm
    # Normwise backward error on the fluctuation, so O(eps^2) variations
    # around a unit mean are resolved, while the rounding floor of applying
    # a badly conditioned operator (coef * |L| >> 1) does not count as failure.
    converged = res <= _backward_target(spec, fluct, y, tol, operator_norm(spec))
    report = EllipticSolveReport(iterations, float(rel), bool(converged))
    if not converged:
        raise EllipticConvergenceError(
            f"{method} did not converge in {iterations} iterations (rel. residual {rel:.3e})", report
        )
    return rho, report
