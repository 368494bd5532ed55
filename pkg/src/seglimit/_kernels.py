"""Numba relaxation kernels.

Sweep order is the reproducibility reference: species-major then
lexicographic nodes for the finite-competition solver, node-major (all
species at a node, which commute because the update only reads neighbor
values) for the segregated projection solver.  Boundary and exterior nodes
are never written.
"""

import numba
import numpy as np

INTERIOR = 0


@numba.njit(cache=True)
def sweep_eps_1d(u, tags, h2_over_eps, nsweeps):
    m, nx = u.shape
    for _ in range(nsweeps):
        for i in range(m):
            for ix in range(nx):
                if tags[ix] == INTERIOR:
                    s = u[i, ix - 1] + u[i, ix + 1]
                    q = 0.0
                    for j in range(m):
                        if j != i:
                            q += u[j, ix]
                    u[i, ix] = s / (2.0 + h2_over_eps * q)


@numba.njit(cache=True)
def sweep_eps_2d(u, tags, h2_over_eps, nsweeps):
    m, ny, nx = u.shape
    for _ in range(nsweeps):
        for i in range(m):
            for iy in range(ny):
                for ix in range(nx):
                    if tags[iy, ix] == INTERIOR:
                        s = (
                            u[i, iy, ix - 1]
                            + u[i, iy, ix + 1]
                            + u[i, iy - 1, ix]
                            + u[i, iy + 1, ix]
                        )
                        q = 0.0
                        for j in range(m):
                            if j != i:
                                q += u[j, iy, ix]
                        u[i, iy, ix] = s / (4.0 + h2_over_eps * q)


@numba.njit(cache=True)
def residual_eps_1d(u, tags, h, eps):
    m, nx = u.shape
    h2 = h * h
    worst = 0.0
    for i in range(m):
        for ix in range(nx):
            if tags[ix] == INTERIOR:
                lap = (u[i, ix - 1] + u[i, ix + 1] - 2.0 * u[i, ix]) / h2
                q = 0.0
                for j in range(m):
                    if j != i:
                        q += u[j, ix]
                r = abs(lap - u[i, ix] * q / eps)
                if r > worst:
                    worst = r
    return worst


@numba.njit(cache=True)
def residual_eps_2d(u, tags, h, eps):
    m, ny, nx = u.shape
    h2 = h * h
    worst = 0.0
    for i in range(m):
        for iy in range(ny):
            for ix in range(nx):
                if tags[iy, ix] == INTERIOR:
                    lap = (
                        u[i, iy, ix - 1]
                        + u[i, iy, ix + 1]
                        + u[i, iy - 1, ix]
                        + u[i, iy + 1, ix]
                        - 4.0 * u[i, iy, ix]
                    ) / h2
                    q = 0.0
                    for j in range(m):
                        if j != i:
                            q += u[j, iy, ix]
                    r = abs(lap - u[i, iy, ix] * q / eps)
                    if r > worst:
                        worst = r
    return worst


@numba.njit(cache=True)
def sweep_limit_1d(u, tags, nsweeps):
    """Projection sweeps; returns the max nodal displacement of the last sweep."""
    m, nx = u.shape
    s = np.empty(m)
    disp = 0.0
    for _ in range(nsweeps):
        disp = 0.0
        for ix in range(nx):
            if tags[ix] == INTERIOR:
                total = 0.0
                for k in range(m):
                    s[k] = u[k, ix - 1] + u[k, ix + 1]
                    total += s[k]
                for i in range(m):
                    new = (2.0 * s[i] - total) / 2.0
                    if new < 0.0:
                        new = 0.0
                    d = abs(new - u[i, ix])
                    if d > disp:
                        disp = d
                    u[i, ix] = new
    return disp


@numba.njit(cache=True)
def sweep_limit_2d(u, tags, nsweeps):
    m, ny, nx = u.shape
    s = np.empty(m)
    disp = 0.0
    for _ in range(nsweeps):
        disp = 0.0
        for iy in range(ny):
            for ix in range(nx):
                if tags[iy, ix] == INTERIOR:
                    total = 0.0
                    for k in range(m):
                        s[k] = (
                            u[k, iy, ix - 1]
                            + u[k, iy, ix + 1]
                            + u[k, iy - 1, ix]
                            + u[k, iy + 1, ix]
                        )
                        total += s[k]
                    for i in range(m):
                        new = (2.0 * s[i] - total) / 4.0
                        if new < 0.0:
                            new = 0.0
                        d = abs(new - u[i, iy, ix])
                        if d > disp:
                            disp = d
                        u[i, iy, ix] = new
    return disp
