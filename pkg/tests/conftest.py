import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from seglimit import build_boundary, build_grid


@pytest.fixture(scope="session")
def grid_1d():
    return build_grid({"shape": "interval", "extent": (0.0, 1.0)}, 257)


@pytest.fixture(scope="session")
def bc_1d(grid_1d):
    return build_boundary(grid_1d, [[(0.0, 0.25, 1.0)], [(0.5, 0.75, 1.0)]])


@pytest.fixture(scope="session")
def grid_sq():
    return build_grid({"shape": "rectangle", "extent": (0.0, 1.0, 0.0, 1.0)}, 33)


@pytest.fixture(scope="session")
def bc_sq(grid_sq):
    return build_boundary(grid_sq, [[(0.76, 0.99, 1.0)], [(0.26, 0.49, 1.0)]])
