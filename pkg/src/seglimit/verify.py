"""Certification of candidate density tuples.

Checks every structural property a segregated limit must satisfy:
nonnegativity, subharmonicity of each component, superharmonicity of each
hat field, boundary match, nodal disjointness, harmonicity on supports,
gradient reflection across interfaces, and the Dirichlet energy.  Also
computes the two max-of-hat-difference quantities P and Q between two
tuples, whose simultaneous non-positivity pins the tuples together, and
the restricted-maximum identity they rest on.

All maxima are exhaustive nodal scans; grids at desk scale make that cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import laplacian
from .relax import overlap_metric
from .state import DensityTuple


@dataclass
class Tolerances:
    """Verification tolerances, relative to the problem scale.

    scale is the largest boundary amplitude (1.0 for an all-zero problem so
    the relative defect bounds stay meaningful).
    """

    scale: float = 1.0
    nonneg: float = 0.0
    subharmonic_rel: float = 1e-8
    hat_superharmonic_rel: float = 1e-7
    boundary_rel: float = 0.0
    overlap_rel: float = 1e-8
    support_threshold_rel: float = 1e-6
    slack_rel: float = 1e-9

    @classmethod
    def for_bc(cls, bc, **kw):
        scale = bc.amplitude or 1.0
        return cls(scale=scale, **kw)

    @property
    def support_threshold(self):
        return self.support_threshold_rel * self.scale

    @property
    def slack(self):
        return self.slack_rel * self.scale


@dataclass
class Certificate:
    """Measured defects (all >= 0) and pass flags for one density tuple."""

    m: int
    nonneg: list
    subharmonic: list
    hat_superharmonic: list
    boundary_mismatch: list
    overlap: float
    harmonic_on_support: list
    reflection: float
    energy: float
    class_f: bool
    class_s: bool

    def to_flat_dict(self):
        out = {}
        for name in ("nonneg", "subharmonic", "hat_superharmonic",
                     "boundary_mismatch", "harmonic_on_support"):
            for i, v in enumerate(getattr(self, name)):
                out[f"defect.{name}.u{i + 1}"] = v
        out["defect.overlap"] = self.overlap
        out["defect.reflection"] = self.reflection
        out["energy"] = self.energy
        out["pass.class_f"] = self.class_f
        out["pass.class_s"] = self.class_s
        return out

    def summary(self):
        lines = [f"class F: {'PASS' if self.class_f else 'FAIL'}",
                 f"class S: {'PASS' if self.class_s else 'FAIL'}"]
        for i in range(self.m):
            lines.append(
                f"  u{i + 1}: nonneg {self.nonneg[i]:.3e}  "
                f"subharm {self.subharmonic[i]:.3e}  "
                f"hat-superharm {self.hat_superharmonic[i]:.3e}  "
                f"boundary {self.boundary_mismatch[i]:.3e}  "
                f"harm-on-supp {self.harmonic_on_support[i]:.3e}"
            )
        lines.append(f"  overlap {self.overlap:.3e}  reflection {self.reflection:.3e}  "
                     f"energy {self.energy:.6e}")
        return "\n".join(lines)


@dataclass
class PQReport:
    P: float
    Q: float
    P_species: int
    Q_species: int
    P_node: tuple
    Q_node: tuple
    per_species_P: list = field(default_factory=list)
    per_species_Q: list = field(default_factory=list)

    def to_flat_dict(self):
        out = {
            "pq.P": self.P,
            "pq.Q": self.Q,
            "pq.P_species": self.P_species + 1,
            "pq.Q_species": self.Q_species + 1,
            "pq.P_node": list(self.P_node),
            "pq.Q_node": list(self.Q_node),
        }
        for i, v in enumerate(self.per_species_P):
            out[f"pq.P.u{i + 1}"] = v
        for i, v in enumerate(self.per_species_Q):
            out[f"pq.Q.u{i + 1}"] = v
        return out


def hats(u):
    """Stack of hat fields: u_i minus the sum of the other components."""
    arr = u.u if isinstance(u, DensityTuple) else np.asarray(u, dtype=float)
    return 2.0 * arr - arr.sum(axis=0)


def energy(grid, u):
    """Discrete Dirichlet energy: half the squared gradient, summed over
    species and domain edges."""
    arr = u.u if isinstance(u, DensityTuple) else np.asarray(u, dtype=float)
    hd = grid.h**grid.dim
    inside = grid.inside
    total = 0.0
    for i in range(arr.shape[0]):
        f = arr[i]
        if grid.dim == 1:
            mask = inside[:-1] & inside[1:]
            total += 0.5 * hd * float(np.sum(((f[1:] - f[:-1])[mask] / grid.h) ** 2))
        else:
            mask = inside[:, :-1] & inside[:, 1:]
            total += 0.5 * hd * float(np.sum(((f[:, 1:] - f[:, :-1])[mask] / grid.h) ** 2))
            mask = inside[:-1, :] & inside[1:, :]
            total += 0.5 * hd * float(np.sum(((f[1:, :] - f[:-1, :])[mask] / grid.h) ** 2))
    return total


def _support_labels(grid, arr, threshold):
    """Per-node dominant species index, or -1 where no species exceeds the
    support threshold.  Supports are disjoint for segregated tuples."""
    labels = np.full(grid.shape, -1, dtype=np.int64)
    best = np.full(grid.shape, threshold, dtype=float)
    for i in range(arr.shape[0]):
        better = (arr[i] > best) & grid.inside
        labels[better] = i
        best[better] = arr[i][better]
    return labels


def reflection_defect(grid, u, support_threshold=1e-6):
    """Gradient-reflection defect across interfaces between supports.

    For every lattice line segment where the support of species i meets the
    support of species j (directly adjacent or separated by a gap of at most
    two nodes outside every support), take one-sided two-point difference
    quotients from each side along the line and measure |slope_i + slope_j|.
    Returns (max defect, table of interface records).
    """
    arr = u.u if isinstance(u, DensityTuple) else np.asarray(u, dtype=float)
    labels = _support_labels(grid, arr, support_threshold)
    table = []
    worst = 0.0

    def scan_line(nodes):
        nonlocal worst
        lab = [labels[n] for n in nodes]
        k = 0
        n = len(nodes)
        while k < n:
            if lab[k] < 0:
                k += 1
                continue
            i = lab[k]
            # end of this support run
            end = k
            while end + 1 < n and lab[end + 1] == i:
                end += 1
            # look ahead over a gap of 0..2 unsupported nodes
            g = end + 1
            gap = 0
            while g < n and lab[g] < 0 and gap < 3:
                g += 1
                gap += 1
            if g < n and lab[g] >= 0 and lab[g] != i and gap <= 2:
                j = lab[g]
                a, b = nodes[end], nodes[g]
                if end - 1 >= 0 and lab[end - 1] == i and g + 1 < n and lab[g + 1] == j:
                    si = (arr[i][a] - arr[i][nodes[end - 1]]) / grid.h
                    sj = (arr[j][nodes[g + 1]] - arr[j][b]) / grid.h
                    defect = abs(si + sj)
                    worst = max(worst, defect)
                    table.append({
                        "node_i": a, "node_j": b, "species_i": i + 1,
                        "species_j": j + 1, "gap": gap,
                        "slope_i": float(si), "slope_j": float(sj),
                        "defect": float(defect),
                    })
            k = end + 1

    if grid.dim == 1:
        scan_line([(ix,) for ix in range(grid.nx)])
    else:
        for iy in range(grid.ny):
            scan_line([(iy, ix) for ix in range(grid.nx)])
        for ix in range(grid.nx):
            scan_line([(iy, ix) for iy in range(grid.ny)])
    return worst, table


def certify(grid, bc, u, tol=None):
    """Exhaustively measure every class membership defect of a tuple."""
    if tol is None:
        tol = Tolerances.for_bc(bc)
    arr = u.u if isinstance(u, DensityTuple) else np.asarray(u, dtype=float)
    m = arr.shape[0]
    interior = grid.interior
    bmask = grid.boundary
    scale = tol.scale

    nonneg, subh, hatsup, bmis, harm = [], [], [], [], []
    hat = hats(arr)
    delta = tol.support_threshold

    # competitor presence anywhere in the 5-point stencil, per species
    for i in range(m):
        lap = laplacian(grid, arr[i])
        nonneg.append(float(np.maximum(-arr[i][grid.inside], 0.0).max(initial=0.0)))
        subh.append(float(np.maximum(-lap[interior], 0.0).max(initial=0.0)))
        hatlap = laplacian(grid, hat[i])
        hatsup.append(float(np.maximum(hatlap[interior], 0.0).max(initial=0.0)))
        bmis.append(float(np.abs(arr[i][bmask] - bc.traces[i][bmask]).max(initial=0.0)))

        competitors = (np.delete(arr, i, axis=0) > delta).any(axis=0)
        comp_near = competitors.copy()
        if grid.dim == 1:
            comp_near[1:-1] |= competitors[:-2] | competitors[2:]
        else:
            comp_near[1:-1, 1:-1] |= (
                competitors[:-2, 1:-1] | competitors[2:, 1:-1]
                | competitors[1:-1, :-2] | competitors[1:-1, 2:]
            )
        clean = interior & (arr[i] > delta) & ~comp_near
        harm.append(float(np.abs(lap[clean]).max(initial=0.0)))

    ov = overlap_metric(arr)
    refl, _ = reflection_defect(grid, u, support_threshold=delta)
    en = energy(grid, u)

    class_f = (
        max(nonneg) <= tol.nonneg * scale + 0.0
        and max(subh) <= tol.subharmonic_rel * scale
        and max(hatsup) <= tol.hat_superharmonic_rel * scale
        and max(bmis) <= tol.boundary_rel * scale + 0.0
    )
    class_s = class_f and ov <= tol.overlap_rel * scale
    return Certificate(m, nonneg, subh, hatsup, bmis, ov, harm, refl, en,
                       class_f, class_s)


def compute_PQ(u, v):
    """P and Q between two tuples on the same grid: signed maxima of the hat
    differences, by exhaustive scan over non-exterior nodes."""
    gu = u.grid if isinstance(u, DensityTuple) else None
    gv = v.grid if isinstance(v, DensityTuple) else None
    if gu is None or gv is None:
        raise ValueError("compute_PQ expects DensityTuple arguments")
    if gu.shape != gv.shape or u.m != v.m:
        raise ValueError("mismatched grids or species counts")
    grid = gu
    du = hats(u) - hats(v)
    mask = grid.inside
    m = u.m

    def scan(diff):
        best, best_i, best_node = -np.inf, -1, None
        per = []
        for i in range(m):
            vals = diff[i]
            masked = np.where(mask, vals, -np.inf)
            flat = int(np.argmax(masked))
            node = np.unravel_index(flat, grid.shape)
            val = float(masked[node])
            per.append(val)
            if val > best:
                best, best_i, best_node = val, i, node
        return best, best_i, tuple(int(c) for c in best_node), per

    P, pi, pnode, perP = scan(du)
    Q, qi, qnode, perQ = scan(-du)
    return PQReport(P, Q, pi, qi, pnode, qnode, perP, perQ)


def check_lemma31(u, v, slack=1e-9, u_class_s=True, v_class_s=True):
    """Restricted-maximum identity between two segregated tuples.

    For each species i, the global max of (hat_u_i - hat_v_i) must equal its
    max over the set {u_i <= v_i + slack}; likewise with roles swapped.
    When either tuple fails class-S certification the check is skipped and
    marked, not failed.
    """
    grid = u.grid
    rows = []
    if not (u_class_s and v_class_s):
        for i in range(u.m):
            rows.append({"species": i + 1, "status": "precondition_failed"})
        return rows

    du = hats(u) - hats(v)
    mask = grid.inside
    for i in range(u.m):
        row = {"species": i + 1, "status": "checked"}
        for tag, diff, lo, hi in (
            ("forward", du[i], u.u[i], v.u[i]),
            ("swapped", -du[i], v.u[i], u.u[i]),
        ):
            gmax = float(diff[mask].max())
            restricted = mask & (lo <= hi + slack)
            rmax = float(diff[restricted].max()) if restricted.any() else -np.inf
            row[f"{tag}_global_max"] = gmax
            row[f"{tag}_restricted_max"] = rmax
            row[f"{tag}_equal"] = bool(abs(gmax - rmax) <= slack)
        rows.append(row)
    return rows
