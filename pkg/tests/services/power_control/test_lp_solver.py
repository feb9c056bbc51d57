import numpy as np
import numpy.testing as npt
import pytest

from src.services.power_control.lp_solver import LpProblem, LpStatus, Sense, SimplexSolver, solve_lp
from src.utils.errors import InvalidInputError

GRID_STEP = 1e-3
GRID = np.arange(0.0, 0.8 + GRID_STEP / 2, GRID_STEP)


def test_corner_solution():
    problem = (
        LpProblem(objective=[1.0, 1.0])
        .add([1.0, 0.0], Sense.GE, 1.0)
        .add([0.0, 1.0], Sense.GE, 2.0)
        .add([1.0, 1.0], Sense.LE, 5.0)
    )
    solution = solve_lp(problem)
    assert solution.is_optimal
    npt.assert_allclose(solution.x, [1.0, 2.0])
    npt.assert_allclose(solution.value, 3.0)


def test_tight_constraint_closed_form():
    # 4p / (0.2 + 1) ≥ 2 → 4p ≥ 2.4
    solution = solve_lp(LpProblem(objective=[1.0]).add([4.0], Sense.GE, 2.4))
    npt.assert_allclose(solution.x, [0.6], rtol=1e-12)


def test_contradiction_is_infeasible():
    solution = solve_lp(LpProblem(objective=[1.0]).add([1.0], Sense.GE, 2.0).add([1.0], Sense.LE, 1.0))
    assert solution.status == LpStatus.INFEASIBLE
    assert solution.x is None


def test_zero_row_handling():
    assert solve_lp(LpProblem(objective=[1.0]).add([0.0], Sense.GE, -1.0)).is_optimal
    assert not solve_lp(LpProblem(objective=[1.0]).add([0.0], Sense.GE, 1.0)).is_optimal


def test_no_constraints_gives_zero():
    solution = solve_lp(LpProblem(objective=[2.0, 3.0]))
    npt.assert_array_equal(solution.x, [0.0, 0.0])


def test_redundant_rows():
    problem = LpProblem(objective=[1.0, 2.0])
    for _ in range(3):
        problem.add([1.0, 1.0], Sense.GE, 1.0)
    solution = solve_lp(problem)
    npt.assert_allclose(solution.x, [1.0, 0.0], atol=1e-12)


def test_unbounded_is_internal_error():
    with pytest.raises(SimplexSolver.Error):
        solve_lp(LpProblem(objective=[-1.0]).add([1.0], Sense.GE, 1.0))


def test_malformed_problems():
    with pytest.raises(InvalidInputError):
        LpProblem(objective=[])
    with pytest.raises(InvalidInputError):
        LpProblem(objective=[1.0, 1.0]).add([1.0], Sense.GE, 1.0)
    with pytest.raises(InvalidInputError):
        LpProblem(objective=[1.0]).add([np.inf], Sense.GE, 1.0)


def test_deterministic():
    problem = LpProblem(objective=[1.0, 1.0, 1.0]).add([1.0, 1.0, 0.0], Sense.GE, 1.0).add([0.0, 1.0, 1.0], Sense.GE, 1.0)
    first, second = solve_lp(problem), solve_lp(problem)
    npt.assert_array_equal(first.x, second.x)


def _grid_value(a, b, weights, cap):
    p1, p2 = np.meshgrid(GRID, GRID, indexing='ij')
    feasible = (a[0, 0] * p1 - a[0, 1] * p2 >= b[0]) & (-a[1, 0] * p1 + a[1, 1] * p2 >= b[1])
    if cap is not None:
        feasible &= p1 + p2 <= cap
    if not np.any(feasible):
        return None
    return float(np.min((weights[0] * p1 + weights[1] * p2)[feasible]))


def test_matches_grid_search_oracle():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        a = np.array([[rng.uniform(1, 2), rng.uniform(0, 0.3)], [rng.uniform(0, 0.3), rng.uniform(1, 2)]])
        b = rng.uniform(0.05, 0.3, size=2)
        weights = rng.uniform(0.5, 2.0, size=2)
        cap = rng.uniform(0.1, 1.0) if rng.uniform() < 0.5 else None

        # 最小功率點是兩條 SINR 限制式的交點
        corner = np.linalg.solve(np.array([[a[0, 0], -a[0, 1]], [-a[1, 0], a[1, 1]]]), b)
        if cap is not None and abs(corner.sum() - cap) < 0.01:
            continue
        checked += 1

        problem = LpProblem(objective=weights)
        problem.add([a[0, 0], -a[0, 1]], Sense.GE, b[0])
        problem.add([-a[1, 0], a[1, 1]], Sense.GE, b[1])
        if cap is not None:
            problem.add([1.0, 1.0], Sense.LE, cap)
        solution = solve_lp(problem)
        grid_value = _grid_value(a, b, weights, cap)

        assert solution.is_optimal == (grid_value is not None)
        if grid_value is not None:
            assert solution.value <= grid_value + 1e-9
            assert grid_value <= solution.value + 2 * GRID_STEP * weights.sum()
            npt.assert_allclose(solution.x, corner, rtol=1e-9, atol=1e-12)
