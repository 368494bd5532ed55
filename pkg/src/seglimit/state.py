"""Shared solver state types: density tuples and solve reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import EXTERIOR


@dataclass(eq=False)
class DensityTuple:
    """m nonnegative density fields on one grid, stacked as u[i, ...]."""

    grid: object
    u: np.ndarray

    @property
    def m(self):
        return self.u.shape[0]

    def component(self, i):
        return self.u[i]

    def copy(self):
        return DensityTuple(self.grid, self.u.copy())

    @classmethod
    def from_fields(cls, grid, fields):
        u = np.stack([np.asarray(f, dtype=float) for f in fields])
        u[:, grid.tags == EXTERIOR] = 0.0
        return cls(grid, u)


@dataclass
class SolveReport:
    eps: float
    iterations: int
    residual: float
    wall_time: float
    converged: bool

    def to_dict(self):
        return {
            "epsilon": self.eps,
            "iterations": self.iterations,
            "residual": self.residual,
            "wall_time": self.wall_time,
            "converged": self.converged,
        }
