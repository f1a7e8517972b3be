import numpy as np
import pytest
from conftest import enumerate_vertices

from walras_equilibrium.numerics import (
    InfeasibleProblem,
    LPStatus,
    NonFiniteInput,
    min_vertex,
    project_simplex,
    solve_lp,
    solve_separable_qp,
)


class TestProjectSimplex:
    def test_point_in_simplex_is_unchanged(self):
        v = np.array([1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_array_equal(project_simplex(v), v)

    def test_single_active_coordinate(self):
        np.testing.assert_array_equal(project_simplex([2.0, 0.0]), [1.0, 0.0])

    def test_uniform_excess_gives_centroid(self):
        np.testing.assert_allclose(project_simplex([0.5, 0.5, 0.5]), [1 / 3] * 3, atol=1e-15)

    def test_negative_entries_are_clipped(self):
        z = project_simplex([-1.0, 0.2, 0.4])
        assert z[0] == 0.0
        np.testing.assert_allclose(z, [0.0, 0.4, 0.6], atol=1e-15)

    def test_is_closest_point(self, rng):
        for _ in range(50):
            v = rng.normal(size=5) * 2.0
            z = project_simplex(v)
            assert np.all(z >= 0.0)
            assert z.sum() == pytest.approx(1.0, abs=1e-12)
            distance = np.linalg.norm(z - v)
            for candidate in rng.dirichlet(np.ones(5), size=40):
                assert distance <= np.linalg.norm(candidate - v) + 1e-12

    def test_idempotent(self, rng):
        for _ in range(50):
            z = project_simplex(rng.normal(size=4))
            np.testing.assert_allclose(project_simplex(z), z, rtol=0.0, atol=1e-15)

    @pytest.mark.parametrize("bad", [[np.nan, 0.5], [np.inf, 0.0], [0.1, -np.inf]])
    def test_non_finite_input(self, bad):
        with pytest.raises(NonFiniteInput, match="non-finite projection input"):
            project_simplex(bad)


class TestMinVertex:
    def test_most_negative_coordinate(self):
        assert min_vertex([1.0, -1.0, 0.0]) == (1, -1.0)

    def test_ties_go_to_smallest_index(self):
        assert min_vertex([0.0, 0.0, 0.0]) == (0, 0.0)
        assert min_vertex([2.0, -3.0, -3.0]) == (1, -3.0)

    def test_lower_bound_over_simplex(self, rng):
        c = rng.normal(size=4)
        _, value = min_vertex(c)
        for q in rng.dirichlet(np.ones(4), size=1000):
            assert value <= q @ c + 1e-12

    def test_matches_grid_minimum(self, rng):
        c = rng.normal(size=3)
        steps = np.linspace(0.0, 1.0, 41)
        grid = min(
            q0 * c[0] + q1 * c[1] + (1.0 - q0 - q1) * c[2]
            for q0 in steps for q1 in steps if q0 + q1 <= 1.0 + 1e-12
        )
        assert min_vertex(c)[1] == pytest.approx(grid, abs=1e-12)


class TestSolveLP:
    def test_one_dimensional(self):
        solution = solve_lp([1.0], [[1.0]], [2.0])
        assert solution.status is LPStatus.OPTIMAL
        np.testing.assert_allclose(solution.x, [2.0])
        assert solution.value == pytest.approx(2.0)

    def test_nonpositive_objective_keeps_origin(self):
        solution = solve_lp([-1.0, 0.0, -2.0], np.ones((2, 3)), [1.0, 4.0])
        assert solution.is_optimal
        np.testing.assert_array_equal(solution.x, np.zeros(3))
        assert solution.value == 0.0

    def test_unbounded(self):
        solution = solve_lp([1.0], [[-1.0]], [1.0])
        assert solution.status is LPStatus.UNBOUNDED
        assert solution.x is None

    def test_infeasible(self):
        solution = solve_lp([1.0], [[1.0]], [-1.0])
        assert solution.status is LPStatus.INFEASIBLE

    def test_negative_right_hand_side(self):
        # y1 + y2 >= 1, y1 <= 3; cheapest is y1 = 1
        solution = solve_lp([-1.0, -2.0], [[-1.0, -1.0], [1.0, 0.0]], [-1.0, 3.0])
        assert solution.is_optimal
        np.testing.assert_allclose(solution.x, [1.0, 0.0], atol=1e-12)
        assert solution.value == pytest.approx(-1.0)

    def test_matches_vertex_enumeration(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            A = rng.uniform(0.1, 1.0, size=(m, n))
            b = rng.uniform(0.5, 2.0, size=m)
            c = rng.normal(size=n)
            solution = solve_lp(c, A, b)
            assert solution.is_optimal
            assert np.all(A @ solution.x <= b + 1e-9)
            assert solution.value == pytest.approx(enumerate_vertices(c, A, b), abs=1e-9)

    def test_strong_duality(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 6))
            A = rng.uniform(0.1, 1.0, size=(m, n))
            b = rng.uniform(0.5, 2.0, size=m)
            c = rng.normal(size=n)
            solution = solve_lp(c, A, b)
            assert solution.is_optimal
            assert np.all(solution.duals >= -1e-9)
            assert np.all(A.T @ solution.duals >= c - 1e-9)
            assert float(b @ solution.duals) == pytest.approx(solution.value, abs=1e-9)
            # complementary slackness
            assert float(solution.duals @ (b - A @ solution.x)) == pytest.approx(0.0, abs=1e-9)

    def test_degenerate_instance_terminates(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
        solution = solve_lp([1.0, 1.0], A, [1.0, 1.0, 0.0])
        assert solution.is_optimal
        assert solution.value == pytest.approx(1.0)


class TestSeparableQP:
    def test_diagonal_clamp(self):
        y = solve_separable_qp([0.5, 3.0], 1.0, np.eye(2), [1.0, 1.0])
        np.testing.assert_allclose(y, [0.5, 1.0])

    def test_zero_objective(self):
        y = solve_separable_qp([0.0, 0.0], 2.0, [[1.0, 2.0]], [1.0])
        np.testing.assert_array_equal(y, [0.0, 0.0])

    def test_zero_diagonal_entry_is_unbounded_above(self):
        y = solve_separable_qp([4.0, 1.0], 2.0, np.diag([0.0, 1.0]), [1.0, 0.25])
        np.testing.assert_allclose(y, [2.0, 0.25])

    def test_coupling_constraint(self):
        y = solve_separable_qp([2.0, 2.0], 1.0, [[1.0, 1.0]], [1.0])
        np.testing.assert_allclose(y, [0.5, 0.5], atol=1e-9)

    def test_matches_grid_search(self, rng):
        for _ in range(10):
            d = rng.uniform(0.5, 2.0, size=2)
            b = rng.uniform(0.2, 1.5, size=2)
            c = rng.normal(size=2)
            rho = float(rng.uniform(0.5, 2.0))
            y = solve_separable_qp(c, rho, np.diag(d), b)

            def objective(point):
                return float(c @ point - 0.5 * rho * point @ point)

            assert np.all(d * y <= b + 1e-12) and np.all(y >= 0.0)
            grid = max(
                objective(np.array([u, v]))
                for u in np.linspace(0.0, b[0] / d[0], 201)
                for v in np.linspace(0.0, b[1] / d[1], 201)
            )
            assert objective(y) >= grid - 1e-12

    def test_infeasible(self):
        with pytest.raises(InfeasibleProblem):
            solve_separable_qp([1.0], 1.0, [[1.0]], [-1.0])

    def test_rho_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_separable_qp([1.0], 0.0, [[1.0]], [1.0])
