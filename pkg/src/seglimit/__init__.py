"""Finite-difference solver and verifier for strongly competing species
systems with Dirichlet data and their segregated limiting configurations."""

from importlib import resources

from .analysis import RateFit, compare_limits, rate_study
from .boundary import BoundarySpec, build_boundary, harmonic_extension
from .config import RunConfig, load_config
from .grid import Grid, build_grid, discrete_h1_norm, hat_transform, laplacian
from .limit import limit_direct, limit_two_species
from .relax import continuation, overlap_metric, solve_eps
from .state import DensityTuple, SolveReport
from .verify import (
    Certificate,
    PQReport,
    Tolerances,
    certify,
    check_lemma31,
    compute_PQ,
    energy,
    reflection_defect,
)

__version__ = "0.1.0"


def scenario_path(name):
    """Filesystem path of a shipped scenario config (e.g. '1d_two')."""
    if not name.endswith(".cfg"):
        name = name + ".cfg"
    return str(resources.files(__name__).joinpath("scenarios", name))
