"""Convergence-rate measurement and cross-algorithm limit comparison."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import discrete_h1_norm
from .verify import compute_PQ


class AnalysisError(ValueError):
    """Raised for invalid analysis inputs."""


@dataclass
class RateFit:
    """Log-log least-squares fit of distance against eps.

    samples are (eps, distance) pairs sorted by decreasing eps; dropped
    records samples excluded from the fit (zero distances, or one
    pre-asymptotic largest-eps sample trimmed when the fit is poor).
    """

    samples: list
    slope: float
    intercept: float
    r_squared: float
    dropped: list = field(default_factory=list)

    def to_dict(self):
        return {
            "samples": [[e, d] for e, d in self.samples],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "dropped": [[e, d, why] for e, d, why in self.dropped],
        }


def _fit(samples):
    x = np.log(np.array([e for e, _ in samples]))
    y = np.log(np.array([d for _, d in samples]))
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _fit_with_trim(pairs):
    dropped = [(e, d, "zero distance") for e, d in pairs if d <= 0.0]
    samples = sorted([(e, d) for e, d in pairs if d > 0.0], key=lambda p: -p[0])
    if len(samples) < 3:
        raise AnalysisError("need at least 3 nonzero samples for a rate fit")
    slope, intercept, r2 = _fit(samples)
    if r2 < 0.98 and len(samples) >= 4:
        # trim one pre-asymptotic transient sample (the largest eps), once
        trimmed = samples[1:]
        s2, i2, r2b = _fit(trimmed)
        dropped = dropped + [(samples[0][0], samples[0][1], "pre-asymptotic trim")]
        samples, slope, intercept, r2 = trimmed, s2, i2, r2b
    return RateFit(samples, slope, intercept, r2, dropped)


def rate_study(ladder_results, reference):
    """Per-species (and worst-case) rate fits of H1 distance to a reference.

    ladder_results is a list of (DensityTuple, SolveReport) as produced by
    the continuation driver; non-converged entries are excluded.
    """
    entries = [(sol, rep) for sol, rep in ladder_results if rep.converged]
    if len(entries) < 3:
        raise AnalysisError("need at least 3 converged ladder entries")
    grid = reference.grid
    m = reference.m
    fits = {}
    worst_pairs = []
    dists = []
    for sol, rep in entries:
        per = [discrete_h1_norm(grid, sol.u[i] - reference.u[i]) for i in range(m)]
        dists.append((rep.eps, per))
    for i in range(m):
        fits[i] = _fit_with_trim([(e, per[i]) for e, per in dists])
    worst_pairs = [(e, max(per)) for e, per in dists]
    fits["worst"] = _fit_with_trim(worst_pairs)
    return fits


def distance_table(ladder_results, reference):
    """Rows (species, eps, h1_distance) for every converged ladder entry."""
    grid = reference.grid
    rows = []
    for sol, rep in ladder_results:
        if not rep.converged:
            continue
        for i in range(reference.m):
            rows.append((i + 1, rep.eps, discrete_h1_norm(grid, sol.u[i] - reference.u[i])))
    return rows


def compare_limits(a, b):
    """Agreement record between two independently computed limits."""
    if a.grid.shape != b.grid.shape or a.m != b.m:
        raise AnalysisError("mismatched grids or species counts")
    grid = a.grid
    mask = grid.inside
    max_norms = [float(np.abs(a.u[i] - b.u[i])[mask].max()) for i in range(a.m)]
    h1 = [discrete_h1_norm(grid, a.u[i] - b.u[i]) for i in range(a.m)]
    pq = compute_PQ(a, b)
    return {
        "max_norm": {f"u{i + 1}": v for i, v in enumerate(max_norms)},
        "h1_distance": {f"u{i + 1}": v for i, v in enumerate(h1)},
        "headline_max_norm": max(max_norms),
        "pq": pq.to_flat_dict(),
    }
