"""Dirichlet boundary data with pairwise-disjoint supports, and harmonic extensions.

Each species gets a trace built from raised-cosine bumps placed on arcs of
the boundary cycle.  Arcs are given as (t_start, t_end, amplitude) triples
with t in [0,1) the normalized boundary-cycle parameter; arcs of distinct
species must not overlap, which enforces the nodal disjointness
phi_i * phi_j = 0 by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu

from .grid import BOUNDARY, INTERIOR


class BoundaryError(ValueError):
    """Raised for invalid boundary specifications."""


@dataclass(eq=False)
class BoundarySpec:
    """Per-species Dirichlet traces on the boundary nodes of one grid.

    traces has shape (m, *grid.shape); it is zero away from boundary nodes.
    """

    grid: object
    m: int
    traces: np.ndarray
    arcs: list | None = None

    @property
    def amplitude(self):
        """Largest boundary value over all species (the problem's scale)."""
        return float(self.traces.max()) if self.traces.size else 0.0

    def trace(self, i):
        return self.traces[i]


def boundary_cycle(grid):
    """Ordered boundary nodes with their cycle parameter t in [0,1).

    Rectangles walk the perimeter counterclockwise from the lower-left
    corner with t proportional to arclength.  Disks and masks order
    boundary nodes by angle around the interior centroid (adequate for
    star-shaped domains).  1D grids map the left end to t=0 and the right
    end to t=0.5.
    """
    if grid.dim == 1:
        return [((0,), 0.0), ((grid.nx - 1,), 0.5)]

    tags = grid.tags
    ny, nx = tags.shape
    full_rect = (
        (tags[0, :] == BOUNDARY).all()
        and (tags[-1, :] == BOUNDARY).all()
        and (tags[:, 0] == BOUNDARY).all()
        and (tags[:, -1] == BOUNDARY).all()
        and (tags[1:-1, 1:-1] == INTERIOR).all()
    )
    if full_rect:
        path = []
        path += [(0, ix) for ix in range(nx - 1)]              # bottom, left to right
        path += [(iy, nx - 1) for iy in range(ny - 1)]         # right, bottom to top
        path += [(ny - 1, ix) for ix in range(nx - 1, 0, -1)]  # top, right to left
        path += [(iy, 0) for iy in range(ny - 1, 0, -1)]       # left, top to bottom
        perimeter = len(path)
        return [(node, k / perimeter) for k, node in enumerate(path)]

    iy, ix = np.nonzero(tags == BOUNDARY)
    cy, cx = np.nonzero(tags == INTERIOR)
    cyc, cxc = cy.mean(), cx.mean()
    theta = np.arctan2(iy - cyc, ix - cxc)
    t = (theta / (2 * np.pi)) % 1.0
    order = np.argsort(t, kind="stable")
    return [((int(iy[k]), int(ix[k])), float(t[k])) for k in order]


def _bump(t, t0, t1, amp):
    """Raised-cosine profile on [t0, t1], vanishing with zero slope at the ends."""
    if not (t0 < t < t1):
        return 0.0
    s = (t - t0) / (t1 - t0)
    return 0.5 * amp * (1.0 - np.cos(2.0 * np.pi * s))


def _arcs_overlap(a, b):
    (a0, a1, _), (b0, b1, _) = a, b
    return a0 < b1 and b0 < a1


def build_boundary(grid, arc_specs):
    """Build a BoundarySpec from per-species lists of (t0, t1, amplitude) arcs.

    On 1D grids an endpoint whose parameter falls inside an arc receives the
    arc amplitude directly (a bump profile is meaningless on a single node).
    """
    m = len(arc_specs)
    if m < 1:
        raise BoundaryError("need at least one species")
    for i, arcs in enumerate(arc_specs):
        for t0, t1, amp in arcs:
            if amp < 0:
                raise BoundaryError(f"species {i + 1}: negative amplitude {amp}")
            if not (0.0 <= t0 < t1 <= 1.0):
                raise BoundaryError(f"species {i + 1}: bad arc interval ({t0}, {t1})")
    for i in range(m):
        for j in range(i + 1, m):
            for a in arc_specs[i]:
                for b in arc_specs[j]:
                    if _arcs_overlap(a, b):
                        raise BoundaryError(
                            f"overlapping arcs for species {i + 1} and {j + 1}: "
                            f"({a[0]}, {a[1]}) vs ({b[0]}, {b[1]})"
                        )

    traces = np.zeros((m,) + grid.shape, dtype=float)
    for node, t in boundary_cycle(grid):
        for i, arcs in enumerate(arc_specs):
            for t0, t1, amp in arcs:
                if grid.dim == 1:
                    if t0 <= t < t1:
                        traces[(i,) + node] = amp
                else:
                    traces[(i,) + node] += _bump(t, t0, t1, amp)

    spec = BoundarySpec(grid, m, traces, [list(a) for a in arc_specs])
    prod = traces[:, None] * traces[None, :]
    for i in range(m):
        prod[i, i] = 0.0
    if prod.max() > 0:
        raise BoundaryError("traces of distinct species overlap at a boundary node")
    return spec


_solver_cache = {}


def _interior_system(grid):
    """Sparse 5-point system over interior unknowns, with an LU factorization.

    Cached by node classification; id-based keys would alias recycled objects.
    """
    key = (grid.dim, grid.shape, grid.tags.tobytes())
    if key in _solver_cache:
        return _solver_cache[key]

    interior = grid.interior
    idx = -np.ones(grid.shape, dtype=np.int64)
    nodes = np.argwhere(interior)
    for k, node in enumerate(nodes):
        idx[tuple(node)] = k
    n = len(nodes)
    rows, cols, vals = [], [], []
    shifts = [(-1,), (1,)] if grid.dim == 1 else [(0, -1), (0, 1), (-1, 0), (1, 0)]
    diag = 2.0 * grid.dim
    for k, node in enumerate(nodes):
        rows.append(k)
        cols.append(k)
        vals.append(diag)
        for s in shifts:
            nb = tuple(node + np.array(s))
            if grid.tags[nb] == INTERIOR:
                rows.append(k)
                cols.append(idx[nb])
                vals.append(-1.0)
    A = csr_matrix((vals, (rows, cols)), shape=(n, n))
    lu = splu(A.tocsc())
    entry = (lu, nodes, idx, shifts)
    _solver_cache[key] = entry
    return entry


def harmonic_extension(grid, trace):
    """Discrete harmonic field matching the given boundary trace.

    Solves the 5-point Laplace system directly and applies one step of
    iterative refinement so the interior residual sits at rounding level.
    """
    lu, nodes, idx, shifts = _interior_system(grid)
    n = len(nodes)

    def boundary_rhs(field):
        rhs = np.zeros(n)
        for k, node in enumerate(nodes):
            acc = 0.0
            for s in shifts:
                nb = tuple(node + np.array(s))
                if grid.tags[nb] == BOUNDARY:
                    acc += field[nb]
            rhs[k] = acc
        return rhs

    rhs = boundary_rhs(trace)
    x = lu.solve(rhs)

    out = np.zeros(grid.shape, dtype=float)
    out[grid.boundary] = trace[grid.boundary]
    out[grid.interior] = x

    # one refinement pass: solve A dx = rhs - A x to push the interior
    # residual down to rounding level
    defect = rhs - _apply_interior(grid, nodes, shifts, out)
    x += lu.solve(defect)
    out[grid.interior] = x
    return out


def _apply_interior(grid, nodes, shifts, field):
    """A x for the interior system, where boundary contributions are excluded."""
    n = len(nodes)
    out = np.zeros(n)
    for k, node in enumerate(nodes):
        acc = 2.0 * grid.dim * field[tuple(node)]
        for s in shifts:
            nb = tuple(node + np.array(s))
            if grid.tags[nb] == INTERIOR:
                acc -= field[nb]
        out[k] = acc
    return out


def harmonic_extensions(grid, bc):
    """Stack of harmonic extensions of every species trace."""
    return np.stack([harmonic_extension(grid, bc.trace(i)) for i in range(bc.m)])
