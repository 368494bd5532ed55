"""Generators for segregated two-species tuples used in the certificate and
uniqueness-identity tests.

Shifting a harmonic split level produces genuinely displaced interfaces
while keeping the exact discrete structure: the positive/negative parts of
a discrete-harmonic field are discrete-subharmonic, their difference is the
field itself (so the hat fields stay harmonic), and supports never overlap.
"""

import numpy as np

from seglimit.boundary import BoundarySpec, build_boundary, harmonic_extension
from seglimit.state import DensityTuple


def tuple_from_split(grid, w):
    """Two-species tuple (w+, w-) with its own boundary spec."""
    u = np.stack([np.maximum(w, 0.0), np.maximum(-w, 0.0)])
    u[:, grid.exterior] = 0.0
    traces = np.zeros_like(u)
    traces[:, grid.boundary] = u[:, grid.boundary]
    return DensityTuple(grid, u), BoundarySpec(grid, 2, traces)


def shifted_pairs(grid, arc_specs, shifts):
    """For each shift c, the pair split from W and from W - c.

    Returns a list of (u, bc_u, v, bc_v, c); c = 0 gives identical tuples.
    """
    bc = build_boundary(grid, arc_specs)
    w = harmonic_extension(grid, bc.trace(0) - bc.trace(1))
    base = tuple_from_split(grid, w)
    out = []
    for c in shifts:
        shifted = tuple_from_split(grid, w - c)
        out.append((base[0], base[1], shifted[0], shifted[1], c))
    return out
