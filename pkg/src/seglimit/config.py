"""Run configuration: INI-style files with domain/boundary/solver/verify/output
sections, plus environment-variable overrides for the tolerance knobs.

Example::

    [domain]
    shape = rectangle
    extent = 0, 1, 0, 1
    resolution = 129

    [boundary]
    species = 2
    arcs1 = 0.76:0.99:1.0
    arcs2 = 0.26:0.49:1.0

    [solver]
    tol = 1e-10
    max_iter = 1000000
    ladder = 1e-1, 1e-2, 1e-3, 1e-4, 1e-5
    limit_tol = 1e-8

    [verify]
    subharmonic_rel = 1e-8

    [output]
    dir = out

Environment overrides (applied after the file is read):
SEGLIMIT_SOLVER_TOL, SEGLIMIT_LIMIT_TOL, SEGLIMIT_MAX_ITER, SEGLIMIT_OUT.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .boundary import build_boundary
from .grid import build_grid
from .verify import Tolerances


class ConfigError(ValueError):
    """Raised with section/key diagnostics for malformed run configs."""


@dataclass
class RunConfig:
    shape_spec: dict
    resolution: int
    arc_specs: list
    tol: float = 1e-10
    max_iter: int = 10**6
    ladder: list = field(default_factory=list)
    limit_tol: float = 1e-8
    verify_kw: dict = field(default_factory=dict)
    out_dir: str = "out"

    def build(self):
        """Instantiate the grid and boundary spec this config describes."""
        grid = build_grid(self.shape_spec, self.resolution)
        bc = build_boundary(grid, self.arc_specs)
        return grid, bc

    def tolerances(self, bc):
        return Tolerances(scale=bc.amplitude or 1.0, **self.verify_kw)


def _get(cp, section, key, conv, default=None, required=False):
    try:
        raw = cp.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        if required:
            raise ConfigError(f"[{section}] {key}: missing required key")
        return default
    try:
        return conv(raw)
    except Exception as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _floats(raw):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _arcs(raw):
    arcs = []
    for tok in raw.replace(",", " ").split():
        parts = tok.split(":")
        if len(parts) != 3:
            raise ValueError(f"arc {tok!r} is not t0:t1:amplitude")
        arcs.append((float(parts[0]), float(parts[1]), float(parts[2])))
    return arcs


def load_config(path):
    """Parse and validate a run configuration file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    shape = _get(cp, "domain", "shape", str, required=True).strip().lower()
    if shape == "interval":
        ext = _get(cp, "domain", "extent", _floats, default=[0.0, 1.0])
        if len(ext) != 2:
            raise ConfigError("[domain] extent: interval needs 2 numbers")
        shape_spec = {"shape": "interval", "extent": tuple(ext)}
    elif shape == "rectangle":
        ext = _get(cp, "domain", "extent", _floats, default=[0.0, 1.0, 0.0, 1.0])
        if len(ext) != 4:
            raise ConfigError("[domain] extent: rectangle needs 4 numbers")
        shape_spec = {"shape": "rectangle", "extent": tuple(ext)}
    elif shape == "disk":
        center = _get(cp, "domain", "center", _floats, default=[0.0, 0.0])
        radius = _get(cp, "domain", "radius", float, required=True)
        if len(center) != 2:
            raise ConfigError("[domain] center: needs 2 numbers")
        shape_spec = {"shape": "disk", "center": tuple(center), "radius": radius}
    else:
        raise ConfigError(f"[domain] shape = {shape!r}: unknown shape")

    resolution = _get(cp, "domain", "resolution", int, required=True)

    m = _get(cp, "boundary", "species", int, required=True)
    if m < 1:
        raise ConfigError("[boundary] species: must be >= 1")
    arc_specs = []
    for i in range(1, m + 1):
        arc_specs.append(_get(cp, "boundary", f"arcs{i}", _arcs, default=[]))

    tol = _get(cp, "solver", "tol", float, default=1e-10)
    max_iter = _get(cp, "solver", "max_iter", int, default=10**6)
    ladder = _get(cp, "solver", "ladder", _floats, default=[])
    limit_tol = _get(cp, "solver", "limit_tol", float, default=1e-8)

    verify_kw = {}
    for key in ("subharmonic_rel", "hat_superharmonic_rel", "overlap_rel",
                "support_threshold_rel", "slack_rel"):
        val = _get(cp, "verify", key, float, default=None)
        if val is not None:
            verify_kw[key] = val

    out_dir = _get(cp, "output", "dir", str, default="out")

    cfg = RunConfig(shape_spec, resolution, arc_specs, tol, max_iter, ladder,
                    limit_tol, verify_kw, out_dir)
    _apply_env_overrides(cfg)
    _validate(cfg)
    return cfg


def _apply_env_overrides(cfg):
    env = os.environ
    if "SEGLIMIT_SOLVER_TOL" in env:
        cfg.tol = float(env["SEGLIMIT_SOLVER_TOL"])
    if "SEGLIMIT_LIMIT_TOL" in env:
        cfg.limit_tol = float(env["SEGLIMIT_LIMIT_TOL"])
    if "SEGLIMIT_MAX_ITER" in env:
        cfg.max_iter = int(env["SEGLIMIT_MAX_ITER"])
    if "SEGLIMIT_OUT" in env:
        cfg.out_dir = env["SEGLIMIT_OUT"]


def _validate(cfg):
    if cfg.tol <= 0 or cfg.limit_tol <= 0:
        raise ConfigError("[solver] tolerances must be positive")
    if cfg.max_iter < 1:
        raise ConfigError("[solver] max_iter must be >= 1")
    if cfg.ladder:
        if any(e <= 0 for e in cfg.ladder):
            raise ConfigError("[solver] ladder: entries must be positive")
        if any(b >= a for a, b in zip(cfg.ladder, cfg.ladder[1:])):
            raise ConfigError("[solver] ladder: must be strictly decreasing")
