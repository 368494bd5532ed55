import numpy as np
import pytest

from seglimit.boundary import build_boundary, harmonic_extension
from seglimit.grid import build_grid, laplacian
from seglimit.relax import SolverError, continuation, overlap_metric, solve_eps
from seglimit.state import DensityTuple

from oracles import brute_force_solve_1d

UNIT_SQUARE = {"shape": "rectangle", "extent": (0.0, 1.0, 0.0, 1.0)}


class TestSolveEps:
    def test_zero_data_is_exact(self, grid_sq):
        bc = build_boundary(grid_sq, [[], []])
        sol, rep = solve_eps(grid_sq, bc, 1.0)
        assert rep.converged
        assert rep.iterations == 0  # zero is already a fixed point
        assert np.all(sol.u == 0.0)

    def test_single_species_is_harmonic_extension(self, grid_sq):
        bc = build_boundary(grid_sq, [[(0.1, 0.4, 1.0)]])
        sol, rep = solve_eps(grid_sq, bc, 1e-3)
        assert rep.converged
        ref = harmonic_extension(grid_sq, bc.trace(0))
        assert np.abs(sol.u[0] - ref)[grid_sq.inside].max() < 1e-8

    def test_huge_eps_decouples(self, grid_1d, bc_1d):
        sol, rep = solve_eps(grid_1d, bc_1d, 1e6)
        assert rep.converged
        (xs,) = grid_1d.coords()
        assert np.abs(sol.u[0] - (1 - xs)).max() < 1e-5
        assert np.abs(sol.u[1] - xs).max() < 1e-5

    def test_matches_bisection_oracle(self):
        g = build_grid({"shape": "interval", "extent": (0.0, 1.0)}, 65)
        bc = build_boundary(g, [[(0.0, 0.25, 1.0)], [(0.5, 0.75, 1.0)]])
        sol, rep = solve_eps(g, bc, 1e-2)
        assert rep.converged
        ref, ok = brute_force_solve_1d(g, bc, 1e-2, tol=1e-8)
        assert ok
        assert np.abs(sol.u - ref).max() < 1e-8

    def test_invalid_eps_rejected(self, grid_1d, bc_1d):
        with pytest.raises(SolverError):
            solve_eps(grid_1d, bc_1d, 0.0)
        with pytest.raises(SolverError):
            solve_eps(grid_1d, bc_1d, -1.0)

    def test_nonconvergence_reported_not_raised(self, grid_1d, bc_1d):
        sol, rep = solve_eps(grid_1d, bc_1d, 1e-3, max_iter=10)
        assert not rep.converged
        assert rep.residual > 1e-10

    def test_bad_init_rejected(self, grid_1d, bc_1d):
        bad = DensityTuple(grid_1d, -np.ones((2,) + grid_1d.shape))
        with pytest.raises(SolverError):
            solve_eps(grid_1d, bc_1d, 1.0, init=bad)


@pytest.fixture(scope="module")
def solution(grid_sq, bc_sq):
    sol, rep = solve_eps(grid_sq, bc_sq, 1e-3)
    assert rep.converged
    return sol, rep


class TestSolutionStructure:
    def test_nonnegative(self, solution, grid_sq):
        sol, _ = solution
        assert sol.u[:, grid_sq.inside].min() >= 0.0

    def test_subharmonic(self, solution, grid_sq):
        sol, rep = solution
        for i in range(sol.m):
            lap = laplacian(grid_sq, sol.u[i])
            assert lap[grid_sq.interior].min() >= -10 * rep.residual

    def test_hat_superharmonic(self, solution, grid_sq):
        sol, rep = solution
        total = sol.u.sum(axis=0)
        for i in range(sol.m):
            lap = laplacian(grid_sq, 2 * sol.u[i] - total)
            assert lap[grid_sq.interior].max() <= sol.m**2 * 10 * rep.residual

    def test_maximum_principle(self, solution, grid_sq, bc_sq):
        sol, _ = solution
        for i in range(sol.m):
            assert sol.u[i].max() <= bc_sq.traces[i].max() + 1e-8

    def test_determinism(self, grid_sq, bc_sq):
        a, _ = solve_eps(grid_sq, bc_sq, 1e-2)
        b, _ = solve_eps(grid_sq, bc_sq, 1e-2)
        assert np.array_equal(a.u, b.u)

    def test_redblack_mode_agrees(self, grid_sq, bc_sq):
        a, ra = solve_eps(grid_sq, bc_sq, 1e-2)
        b, rb = solve_eps(grid_sq, bc_sq, 1e-2, mode="redblack")
        assert ra.converged and rb.converged
        assert np.abs(a.u - b.u).max() < 1e-7


class TestContinuation:
    def test_single_rung_matches_solve_eps(self, grid_1d, bc_1d):
        ladder = continuation(grid_1d, bc_1d, [1e6])
        direct, _ = solve_eps(grid_1d, bc_1d, 1e6)
        assert np.array_equal(ladder[0][0].u, direct.u)

    def test_overlap_decreases(self, grid_1d, bc_1d):
        results = continuation(grid_1d, bc_1d, [1e-1, 1e-2, 1e-3])
        overlaps = [overlap_metric(sol) for sol, _ in results]
        assert all(rep.converged for _, rep in results)
        assert all(b <= a + 1e-8 for a, b in zip(overlaps, overlaps[1:]))

    def test_pointwise_damping_in_eps(self, grid_1d, bc_1d):
        results = continuation(grid_1d, bc_1d, [1e-1, 1e-2, 1e-3])
        for (a, _), (b, _) in zip(results, results[1:]):
            assert (b.u <= a.u + 1e-8).all()

    def test_h1_norms_bounded(self, grid_1d, bc_1d):
        from seglimit.grid import discrete_h1_norm

        results = continuation(grid_1d, bc_1d, [1e-1, 1e-3, 1e-5])
        norms = [discrete_h1_norm(grid_1d, sol.u[0]) for sol, _ in results]
        assert max(norms) < 10 * norms[0]

    def test_empty_ladder_rejected(self, grid_1d, bc_1d):
        with pytest.raises(SolverError):
            continuation(grid_1d, bc_1d, [])

    def test_nondecreasing_ladder_rejected(self, grid_1d, bc_1d):
        with pytest.raises(SolverError):
            continuation(grid_1d, bc_1d, [1e-2, 1e-1])


class TestOverlapMetric:
    def test_segregated_tuple(self):
        u = np.array([[1.0, 0.5, 0.0, 0.0], [0.0, 0.0, 0.3, 1.0]])
        assert overlap_metric(u) == 0.0

    def test_constant_overlap(self):
        u = np.full((2, 5), 0.3)
        assert overlap_metric(u) == pytest.approx(0.3)

    def test_three_node_example(self):
        u = np.array([[1.0, 0.2, 0.0], [0.0, 0.1, 1.0]])
        assert overlap_metric(u) == pytest.approx(0.1)
