"""Structured grids over the computational domain and their discrete operators.

A grid is a uniform lattice (spacing ``h`` in every axis) covering a 1D
interval, a rectangle, a disk, or an arbitrary masked region.  Every node
carries a tag: INTERIOR nodes are unknowns, BOUNDARY nodes carry Dirichlet
data, EXTERIOR nodes are outside the domain and ignored.

Fields are plain numpy arrays with one value per node (shape equal to
``grid.shape``); exterior entries are kept at 0 by convention so that
vectorised stencils never touch garbage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

INTERIOR = 0
BOUNDARY = 1
EXTERIOR = 2


class GridError(ValueError):
    """Raised when a domain descriptor violates a grid invariant."""


@dataclass(eq=False)
class Grid:
    """Uniform lattice with per-node classification.

    dim     : 1 or 2
    h       : mesh spacing, identical in both axes
    origin  : physical coordinates of node index 0 (or (0,0))
    tags    : int8 array, shape (nx,) in 1D or (ny, nx) in 2D
    """

    dim: int
    h: float
    origin: tuple
    tags: np.ndarray
    _masks: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self):
        return self.tags.shape

    @property
    def nx(self):
        return self.tags.shape[-1]

    @property
    def ny(self):
        return self.tags.shape[0] if self.dim == 2 else 1

    def _mask(self, tag):
        if tag not in self._masks:
            self._masks[tag] = self.tags == tag
        return self._masks[tag]

    @property
    def interior(self):
        return self._mask(INTERIOR)

    @property
    def boundary(self):
        return self._mask(BOUNDARY)

    @property
    def exterior(self):
        return self._mask(EXTERIOR)

    @property
    def inside(self):
        """Interior or boundary nodes (the discrete closure of the domain)."""
        if "inside" not in self._masks:
            self._masks["inside"] = self.tags != EXTERIOR
        return self._masks["inside"]

    def coords(self):
        """Physical coordinates of every node, as arrays shaped like tags."""
        if self.dim == 1:
            return (self.origin[0] + self.h * np.arange(self.nx),)
        ys = self.origin[1] + self.h * np.arange(self.ny)
        xs = self.origin[0] + self.h * np.arange(self.nx)
        return np.meshgrid(xs, ys)

    def node_xy(self, node):
        """Physical coordinates of one node index."""
        if self.dim == 1:
            return (self.origin[0] + self.h * node[0],)
        iy, ix = node
        return (self.origin[0] + self.h * ix, self.origin[1] + self.h * iy)


def _neighbor_shifts(dim):
    if dim == 1:
        return [(-1,), (1,)]
    return [(0, -1), (0, 1), (-1, 0), (1, 0)]


def _validate(grid):
    tags = grid.tags
    if grid.h <= 0:
        raise GridError("mesh spacing must be positive")
    if min(tags.shape) < 3 and grid.dim == 2:
        raise GridError("resolution too small: need at least 3 nodes per axis")
    if grid.dim == 1 and tags.shape[0] < 3:
        raise GridError("resolution too small: need at least 3 nodes")
    interior = tags == INTERIOR
    if not interior.any():
        raise GridError("grid has no interior nodes")

    # every interior node has 4 (2 in 1D) non-exterior lattice neighbors
    for shift in _neighbor_shifts(grid.dim):
        rolled = np.roll(tags, tuple(-s for s in shift), axis=tuple(range(grid.dim)))
        # rolling wraps around; forbid interior nodes on the lattice edge first
        edge = np.zeros_like(interior)
        for ax, s in enumerate(shift):
            if s == -1:
                edge |= np.arange(tags.shape[ax]).reshape(
                    [-1 if a == ax else 1 for a in range(grid.dim)]
                ) == 0
            elif s == 1:
                edge |= np.arange(tags.shape[ax]).reshape(
                    [-1 if a == ax else 1 for a in range(grid.dim)]
                ) == tags.shape[ax] - 1
        if (interior & edge).any():
            raise GridError("interior node on the lattice edge has a missing neighbor")
        if (interior & (rolled == EXTERIOR)).any():
            raise GridError("interior node has an exterior neighbor")

    # interior connectedness (edge connectivity)
    if grid.dim == 1:
        labels, n = ndimage.label(interior)
    else:
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
        labels, n = ndimage.label(interior, structure=structure)
    if n != 1:
        raise GridError("disconnected interior")

    # every boundary node touches an interior node (8-neighborhood, so
    # rectangle corners count as adjacent to the interior)
    if grid.dim == 1:
        near_interior = np.zeros_like(interior)
        near_interior[:-1] |= interior[1:]
        near_interior[1:] |= interior[:-1]
    else:
        padded = np.pad(interior, 1, constant_values=False)
        near_interior = np.zeros_like(interior)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                near_interior |= padded[1 + dy : padded.shape[0] - 1 + dy,
                                        1 + dx : padded.shape[1] - 1 + dx]
    if ((tags == BOUNDARY) & ~near_interior).any():
        raise GridError("boundary node with no interior neighbor")


def build_grid(shape_spec, n):
    """Build a classified grid from a domain descriptor.

    shape_spec is a mapping with a "shape" key:
      interval  : {"shape": "interval", "extent": (a, b)}
      rectangle : {"shape": "rectangle", "extent": (ax, bx, ay, by)}
      disk      : {"shape": "disk", "center": (cx, cy), "radius": r}
      mask      : {"shape": "mask", "interior": bool array, "h": spacing,
                   "origin": (x0, y0)}
    n is the node count along the x axis (ignored for masks).
    """
    kind = shape_spec["shape"]
    if kind != "mask" and n < 3:
        raise GridError("resolution too small: need n >= 3")

    if kind == "interval":
        a, b = shape_spec["extent"]
        if b <= a:
            raise GridError("interval extent must satisfy a < b")
        h = (b - a) / (n - 1)
        tags = np.full(n, INTERIOR, dtype=np.int8)
        tags[0] = tags[-1] = BOUNDARY
        grid = Grid(1, h, (a,), tags)

    elif kind == "rectangle":
        ext = shape_spec["extent"]
        ax, bx, ay, by = ext
        if bx <= ax or by <= ay:
            raise GridError("rectangle extent must have positive side lengths")
        h = (bx - ax) / (n - 1)
        ny = round((by - ay) / h) + 1
        if abs((ny - 1) * h - (by - ay)) > 1e-9 * h:
            raise GridError("rectangle aspect ratio incompatible with a uniform square mesh")
        if ny < 3:
            raise GridError("resolution too small along the y axis")
        tags = np.full((ny, n), INTERIOR, dtype=np.int8)
        tags[0, :] = tags[-1, :] = BOUNDARY
        tags[:, 0] = tags[:, -1] = BOUNDARY
        grid = Grid(2, h, (ax, ay), tags)

    elif kind == "disk":
        cx, cy = shape_spec["center"]
        r = shape_spec["radius"]
        if r <= 0:
            raise GridError("disk radius must be positive")
        h = 2 * r / (n - 1)
        x0, y0 = cx - r, cy - r
        xs = x0 + h * np.arange(n)
        ys = y0 + h * np.arange(n)
        X, Y = np.meshgrid(xs, ys)
        inside = (X - cx) ** 2 + (Y - cy) ** 2 < r * r * (1 - 1e-12)
        tags = _classify_from_mask(inside)
        grid = Grid(2, h, (x0, y0), tags)

    elif kind == "mask":
        inside = np.asarray(shape_spec["interior"], dtype=bool)
        tags = _classify_from_mask(inside)
        grid = Grid(2, float(shape_spec["h"]), tuple(shape_spec.get("origin", (0.0, 0.0))), tags)

    else:
        raise GridError(f"unknown domain shape {kind!r}")

    _validate(grid)
    return grid


def _classify_from_mask(inside):
    """Interior = True cells; boundary = lattice neighbors of interior cells."""
    tags = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    tags[inside] = INTERIOR
    padded = np.pad(inside, 1, constant_values=False)
    near = (
        padded[:-2, 1:-1] | padded[2:, 1:-1] | padded[1:-1, :-2] | padded[1:-1, 2:]
    )
    tags[near & ~inside] = BOUNDARY
    return tags


def laplacian(grid, f, node=None):
    """Standard 5-point (3-point in 1D) laplacian, valid at interior nodes.

    With node=None, returns a field that holds the laplacian at interior
    nodes and 0 elsewhere.  With an explicit node index, returns the scalar
    and rejects non-interior nodes.
    """
    if node is not None:
        if grid.tags[tuple(np.atleast_1d(node))] != INTERIOR:
            raise GridError("laplacian requested at a non-interior node")
        lap = laplacian(grid, f)
        return float(lap[tuple(np.atleast_1d(node))])

    out = np.zeros_like(f, dtype=float)
    h2 = grid.h * grid.h
    if grid.dim == 1:
        out[1:-1] = (f[:-2] + f[2:] - 2.0 * f[1:-1]) / h2
    else:
        out[1:-1, 1:-1] = (
            f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:] - 4.0 * f[1:-1, 1:-1]
        ) / h2
    out[~grid.interior] = 0.0
    return out


def hat_transform(u, i):
    """Hat field of component i: u_i minus the sum of all other components.

    u is an (m, ...) stack of fields on a common grid.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim < 1 or i < 0 or i >= u.shape[0]:
        raise IndexError("component index out of range")
    return 2.0 * u[i] - u.sum(axis=0)


def _edge_diffs(grid, f):
    """Per-axis arrays of finite differences over edges with both endpoints
    inside the domain, plus the matching edge masks."""
    inside = grid.inside
    diffs = []
    if grid.dim == 1:
        mask = inside[:-1] & inside[1:]
        diffs.append((f[1:] - f[:-1])[mask])
    else:
        mask = inside[:, :-1] & inside[:, 1:]
        diffs.append((f[:, 1:] - f[:, :-1])[mask])
        mask = inside[:-1, :] & inside[1:, :]
        diffs.append((f[1:, :] - f[:-1, :])[mask])
    return diffs


def discrete_h1_norm(grid, f):
    """Discrete H1 norm: node-lumped L2 part plus edge-difference gradient part."""
    hd = grid.h**grid.dim
    val = hd * float(np.sum(f[grid.inside] ** 2))
    for d in _edge_diffs(grid, f):
        val += hd * float(np.sum((d / grid.h) ** 2))
    return float(np.sqrt(val))


def write_field(path, grid, f):
    """Write one field as CSV (x,y,value or x,value) over non-exterior nodes,
    row-major, with full float precision."""
    with open(path, "w") as fh:
        if grid.dim == 1:
            fh.write("x,value\n")
            (xs,) = grid.coords()
            for ix in range(grid.nx):
                if grid.tags[ix] != EXTERIOR:
                    fh.write(f"{xs[ix]:.17g},{f[ix]:.17g}\n")
        else:
            fh.write("x,y,value\n")
            X, Y = grid.coords()
            for iy in range(grid.ny):
                for ix in range(grid.nx):
                    if grid.tags[iy, ix] != EXTERIOR:
                        fh.write(f"{X[iy, ix]:.17g},{Y[iy, ix]:.17g},{f[iy, ix]:.17g}\n")


def read_field(path, grid):
    """Read a field CSV written by write_field back onto the same grid."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    f = np.zeros(grid.shape, dtype=float)
    if grid.dim == 1:
        ix = np.rint((np.atleast_1d(data["x"]) - grid.origin[0]) / grid.h).astype(int)
        f[ix] = np.atleast_1d(data["value"])
    else:
        ix = np.rint((np.atleast_1d(data["x"]) - grid.origin[0]) / grid.h).astype(int)
        iy = np.rint((np.atleast_1d(data["y"]) - grid.origin[1]) / grid.h).astype(int)
        f[iy, ix] = np.atleast_1d(data["value"])
    return f
