"""Nonlinear Gauss-Seidel solver for the finite competition-rate system.

At each interior node the discrete equation is linear in the local unknown,
so the sweep applies its exact solution u_i <- S_i / (2d + h^2 Q_i / eps)
with S_i the neighbor sum of u_i and Q_i the local sum of the competitors.
Nonnegativity is automatic: numerator and denominator are nonnegative.

Convergence is declared on the max-norm equation residual, which directly
certifies that the discrete system is solved.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .boundary import harmonic_extensions
from .state import DensityTuple, SolveReport

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6
_CHECK_EVERY = 64


class SolverError(ValueError):
    """Raised for invalid solver inputs."""


def overlap_metric(u):
    """Segregation defect: max over nodes and species pairs of min(u_i, u_j).

    Zero exactly when the supports are nodally disjoint.
    """
    arr = u.u if isinstance(u, DensityTuple) else np.asarray(u, dtype=float)
    m = arr.shape[0]
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            worst = max(worst, float(np.minimum(arr[i], arr[j]).max()))
    return worst


def _redblack_masks(grid):
    if grid.dim == 1:
        parity = np.arange(grid.nx) % 2
    else:
        iy, ix = np.indices(grid.shape)
        parity = (iy + ix) % 2
    interior = grid.interior
    return interior & (parity == 0), interior & (parity == 1)


def _neighbor_sum(grid, f):
    s = np.zeros_like(f)
    if grid.dim == 1:
        s[1:-1] = f[:-2] + f[2:]
    else:
        s[1:-1, 1:-1] = f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:]
    return s


def _sweep_eps_redblack(grid, u, h2_over_eps, nsweeps):
    """Vectorised red-black variant of the finite-eps sweep (parallel mode)."""
    masks = _redblack_masks(grid)
    m = u.shape[0]
    diag = 2.0 * grid.dim
    for _ in range(nsweeps):
        for mask in masks:
            for i in range(m):
                s = _neighbor_sum(grid, u[i])
                q = u.sum(axis=0) - u[i]
                u[i][mask] = (s / (diag + h2_over_eps * q))[mask]


def solve_eps(grid, bc, eps, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, init=None,
              mode="sequential"):
    """Solve the competition system at fixed eps.

    Returns (DensityTuple, SolveReport); non-convergence within max_iter
    sweeps is reported through the converged flag, not an exception.
    """
    if eps <= 0:
        raise SolverError("eps must be positive")
    if tol <= 0:
        raise SolverError("tol must be positive")

    u = _initial_state(grid, bc, init)
    tags = grid.tags
    h2_over_eps = grid.h * grid.h / eps

    if mode == "sequential":
        sweep = _kernels.sweep_eps_1d if grid.dim == 1 else _kernels.sweep_eps_2d
        step = lambda n: sweep(u, tags, h2_over_eps, n)
    elif mode == "redblack":
        step = lambda n: _sweep_eps_redblack(grid, u, h2_over_eps, n)
    else:
        raise SolverError(f"unknown sweep mode {mode!r}")
    residual = _kernels.residual_eps_1d if grid.dim == 1 else _kernels.residual_eps_2d

    t0 = time.perf_counter()
    sweeps = 0
    res = residual(u, tags, grid.h, eps)
    converged = res <= tol
    while not converged and sweeps < max_iter:
        n = min(_CHECK_EVERY, max_iter - sweeps)
        step(n)
        sweeps += n
        res = residual(u, tags, grid.h, eps)
        converged = res <= tol
    report = SolveReport(eps, sweeps, float(res), time.perf_counter() - t0, converged)
    return DensityTuple(grid, u), report


def _initial_state(grid, bc, init):
    if init is None:
        u = harmonic_extensions(grid, bc)
    else:
        arr = init.u if isinstance(init, DensityTuple) else np.asarray(init, dtype=float)
        if arr.shape != (bc.m,) + grid.shape:
            raise SolverError("init shape does not match grid/species count")
        if arr.min() < 0:
            raise SolverError("init must be nonnegative")
        bmask = grid.boundary
        if np.abs(arr[:, bmask] - bc.traces[:, bmask]).max() > 0:
            raise SolverError("init boundary values do not match the boundary data")
        u = arr.copy()
    u[:, grid.exterior] = 0.0
    u[:, grid.boundary] = bc.traces[:, grid.boundary]
    return np.ascontiguousarray(u)


def continuation(grid, bc, eps_ladder, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 mode="sequential"):
    """Solve along a strictly decreasing eps ladder with warm starts.

    Returns the list of (DensityTuple, SolveReport) in ladder order.
    """
    ladder = [float(e) for e in eps_ladder]
    if not ladder:
        raise SolverError("eps ladder must not be empty")
    if any(e <= 0 for e in ladder):
        raise SolverError("eps ladder entries must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise SolverError("eps ladder must be strictly decreasing")

    results = []
    prev = None
    for eps in ladder:
        sol, report = solve_eps(grid, bc, eps, tol=tol, max_iter=max_iter,
                                init=prev, mode=mode)
        results.append((sol, report))
        prev = sol
    return results
