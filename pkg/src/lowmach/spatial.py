"""Finite-volume operators on periodic grids.

Face arrays use the same shape as cell arrays: entry ``i`` along axis ``m``
holds the value at face ``i + 1/2`` in that direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridSpec, split_pressure

LIMITERS = ("minmod", "none")


def delta(face_values: np.ndarray, axis: int) -> np.ndarray:
    """Cell difference of the two faces bounding each cell along ``axis``."""
    _check_axis(face_values, axis)
    return face_values - np.roll(face_values, 1, axis=axis)


def mu(cell_values: np.ndarray, axis: int) -> np.ndarray:
    """Face average of the two cells adjacent to each face along ``axis``."""
    _check_axis(cell_values, axis)
    return 0.5 * (cell_values + np.roll(cell_values, -1, axis=axis))


def _check_axis(values, axis):
    if not 0 <= axis < np.ndim(values):
        raise ValueError(f"axis {axis} out of range for array of ndim {np.ndim(values)}")


def minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def slopes(w: np.ndarray, axis: int, limiter: str = "minmod") -> np.ndarray:
    fwd = np.roll(w, -1, axis=axis) - w
    bwd = w - np.roll(w, 1, axis=axis)
    if limiter == "minmod":
        return minmod(fwd, bwd)
    if limiter == "none":
        return 0.5 * (fwd + bwd)
    raise ValueError(f"unknown limiter {limiter!r}; choose from {LIMITERS}")


def minmod_reconstruct(w: np.ndarray, axis: int, limiter: str = "minmod"):
    """Piecewise-linear interface values ``(minus, plus)`` at faces ``i+1/2``.

    ``minus`` comes from cell ``i`` and ``plus`` from cell ``i+1``.
    """
    _check_axis(w, axis)
    half = 0.5 * slopes(w, axis, limiter)
    minus = w + half
    plus = np.roll(w - half, -1, axis=axis)
    return minus, plus


@dataclass
class InterfacePair:
    rho_minus: np.ndarray
    q_minus: np.ndarray
    rho_plus: np.ndarray
    q_plus: np.ndarray
    drho_minus: np.ndarray | None = None
    drho_plus: np.ndarray | None = None


def reconstruct_state(rho, q, axis, limiter="minmod", drho=None) -> InterfacePair:
    """Reconstruct ``rho`` and ``q``; with ``drho`` given the density is
    reconstructed as a perturbation of one."""
    qm, qp = minmod_reconstruct(q, axis, limiter)
    if drho is None:
        rm, rp = minmod_reconstruct(rho, axis, limiter)
        return InterfacePair(rm, qm, rp, qp)
    dm, dp = minmod_reconstruct(drho, axis, limiter)
    return InterfacePair(1.0 + dm, qm, 1.0 + dp, qp, dm, dp)


def explicit_momentum_flux(rho, q, gamma, axis, split_scale=1.0, drho=None):
    """Momentum flux column ``(q_m / rho) q + split_scale * (p - rho) e_m``.

    The caller passes ``split_scale = 1/eps**2`` to get the scaled flux.
    Works pointwise (``q`` of shape ``(..., d)``) or on a single state.
    """
    rho = np.asarray(rho, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    flux = (q[..., axis] / rho)[..., None] * q
    flux[..., axis] += split_scale * split_pressure(rho, gamma, drho)
    return flux


def wave_speed(pair: InterfacePair, axis: int):
    um = np.abs(pair.q_minus[..., axis] / pair.rho_minus)
    up = np.abs(pair.q_plus[..., axis] / pair.rho_plus)
    return 2.0 * np.maximum(um, up)


def rusanov_momentum_flux(pair: InterfacePair, gamma, axis, split_scale=1.0):
    """Rusanov flux: central average minus ``alpha/2`` times the jump in the
    full momentum vector."""
    fm = explicit_momentum_flux(pair.rho_minus, pair.q_minus, gamma, axis, split_scale, pair.drho_minus)
    fp = explicit_momentum_flux(pair.rho_plus, pair.q_plus, gamma, axis, split_scale, pair.drho_plus)
    alpha = wave_speed(pair, axis)
    return 0.5 * (fp + fm) - 0.5 * np.asarray(alpha)[..., None] * (pair.q_plus - pair.q_minus)


def central_mass_flux(q: np.ndarray, axis: int) -> np.ndarray:
    return mu(q[..., axis], axis)


# Discrete div/grad used by both the mass update and the implicit pressure:
# each is delta(mu(.)) / dx, i.e. the wide central difference.

def divergence(q: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(grid.n)
    for m, h in enumerate(grid.dx):
        out += delta(central_mass_flux(q, m), m) / h
    return out


def gradient(rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.stack([delta(mu(rho, m), m) / h for m, h in enumerate(grid.dx)], axis=-1)


def momentum_flux_divergence(rho, q, grid: GridSpec, gamma, epsilon, limiter="minmod", drho=None):
    """Sum over axes of ``delta(F_hat_m) / dx_m`` with the split pressure
    scaled by ``1/epsilon**2``. Pass ``rho=None, drho=...`` to work from the
    density perturbation."""
    if rho is None:
        rho = 1.0 + drho
    out = np.zeros_like(q)
    scale = 1.0 / epsilon**2
    for m, h in enumerate(grid.dx):
        pair = reconstruct_state(rho, q, m, limiter, drho)
        flux = rusanov_momentum_flux(pair, gamma, m, scale)
        out += delta(flux, m) / h
    return out
