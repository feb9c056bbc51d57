from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from src.utils.errors import InvalidInputError
from src.utils.logging import setup_logging


class Sense(str, Enum):
    GE = '>='
    LE = '<='


class LpStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'


@dataclass(frozen=True)
class LpConstraint:
    coeffs: np.ndarray
    sense: Sense
    bound: float


@dataclass
class LpProblem:
    """minimize wᵀp  s.t.  rows,  p ≥ 0"""
    objective: np.ndarray
    constraints: List[LpConstraint] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.size < 1:
            raise InvalidInputError("LP 至少需要一個變數")
        if not np.all(np.isfinite(self.objective)):
            raise InvalidInputError("目標係數必須為有限值")

    @property
    def num_variables(self) -> int:
        return self.objective.size

    def add(self, coeffs: Sequence[float], sense: Sense, bound: float) -> 'LpProblem':
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        if coeffs.size != self.num_variables:
            raise InvalidInputError(f"限制式長度 {coeffs.size} ≠ 變數數 {self.num_variables}")
        if not (np.all(np.isfinite(coeffs)) and np.isfinite(bound)):
            raise InvalidInputError("限制式係數必須為有限值")
        self.constraints.append(LpConstraint(coeffs=coeffs, sense=Sense(sense), bound=float(bound)))
        return self


@dataclass
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    value: float = float('nan')

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


class SimplexSolver:
    """Dense two-phase tableau simplex with Bland's anti-cycling rule

    每列先以最大係數正規化，所以容許誤差是相對量。
    """

    class Error(Exception):
        """LP 內部錯誤（無界或超過迭代上限）"""
        pass

    def __init__(self, tolerance: float = 1e-11, feasibility_tolerance: float = 1e-9, max_iterations: int = 10_000):
        self.tolerance = tolerance
        self.feasibility_tolerance = feasibility_tolerance
        self.max_iterations = max_iterations
        self.logger = setup_logging(__name__)

    def _standard_form(self, problem: LpProblem):
        """a·x ≥ b → a·x − s = b，a·x ≤ b → a·x + s = b，再讓 b ≥ 0"""
        n = problem.num_variables
        rows, rhs, slack_signs = [], [], []
        for constraint in problem.constraints:
            scale = max(np.max(np.abs(constraint.coeffs)), abs(constraint.bound))
            if scale == 0.0:
                continue
            coeffs = constraint.coeffs / scale
            bound = constraint.bound / scale
            if np.max(np.abs(coeffs)) == 0.0:
                # 0 ≥ b 或 0 ≤ b
                satisfied = bound <= 0 if constraint.sense == Sense.GE else bound >= 0
                if not satisfied:
                    return None
                continue
            rows.append(coeffs)
            rhs.append(bound)
            slack_signs.append(-1.0 if constraint.sense == Sense.GE else 1.0)

        m = len(rows)
        a = np.zeros((m, n + m))
        b = np.asarray(rhs, dtype=float)
        for i, (coeffs, sign) in enumerate(zip(rows, slack_signs)):
            a[i, :n] = coeffs
            a[i, n + i] = sign
            if b[i] < 0:
                a[i] *= -1.0
                b[i] *= -1.0
        return a, b

    def _pivot(self, tableau: np.ndarray, row: int, column: int) -> None:
        tableau[row] /= tableau[row, column]
        for i in range(tableau.shape[0]):
            if i != row and tableau[i, column] != 0.0:
                tableau[i] -= tableau[i, column] * tableau[row]

    def _iterate(self, tableau: np.ndarray, basis: List[int], cost: np.ndarray, allowed: int) -> None:
        """Run simplex pivots until optimal; columns ≥ `allowed` never enter"""
        for _ in range(self.max_iterations):
            reduced = cost[:allowed] - cost[basis] @ tableau[:, :allowed]
            candidates = np.flatnonzero(reduced < -self.tolerance)
            if candidates.size == 0:
                return
            entering = int(candidates[0])  # Bland: 最小索引

            column = tableau[:, entering]
            positive = np.flatnonzero(column > self.tolerance)
            if positive.size == 0:
                raise SimplexSolver.Error("LP 無界：目標可無限下降")

            ratios = tableau[positive, -1] / column[positive]
            best = np.min(ratios)
            ties = positive[ratios <= best + self.tolerance * max(1.0, abs(best))]
            leaving = int(min(ties, key=lambda i: basis[i]))  # Bland: 最小基變數索引

            self._pivot(tableau, leaving, entering)
            basis[leaving] = entering

        raise SimplexSolver.Error(f"超過 {self.max_iterations} 次迭代")

    def solve(self, problem: LpProblem) -> LpSolution:
        n = problem.num_variables
        standard = self._standard_form(problem)
        if standard is None:
            return LpSolution(status=LpStatus.INFEASIBLE)
        a, b = standard
        m, columns = a.shape

        # Phase 1：每列一個人工變數
        tableau = np.zeros((m, columns + m + 1))
        tableau[:, :columns] = a
        tableau[:, columns:columns + m] = np.eye(m)
        tableau[:, -1] = b
        basis = list(range(columns, columns + m))

        phase1_cost = np.concatenate([np.zeros(columns), np.ones(m)])
        self._iterate(tableau, basis, phase1_cost, allowed=columns + m)
        infeasibility = float(phase1_cost[basis] @ tableau[:, -1])
        if infeasibility > self.feasibility_tolerance:
            self.logger.debug(f"Phase 1 殘差 {infeasibility:.3e}，LP 不可行")
            return LpSolution(status=LpStatus.INFEASIBLE)

        # 把留在基底的人工變數換出，換不出的列是冗餘列
        keep_rows = []
        for i in range(m):
            if basis[i] < columns:
                keep_rows.append(i)
                continue
            nonzero = np.flatnonzero(np.abs(tableau[i, :columns]) > self.tolerance)
            if nonzero.size:
                self._pivot(tableau, i, int(nonzero[0]))
                basis[i] = int(nonzero[0])
                keep_rows.append(i)
        tableau = np.column_stack([tableau[keep_rows, :columns], tableau[keep_rows, -1]])
        basis = [basis[i] for i in keep_rows]

        # Phase 2
        scale = np.max(np.abs(problem.objective))
        weights = problem.objective / scale if scale > 0 else problem.objective
        phase2_cost = np.concatenate([weights, np.zeros(columns - n)])
        self._iterate(tableau, basis, phase2_cost, allowed=columns)

        solution = np.zeros(columns)
        solution[basis] = tableau[:, -1]
        x = np.clip(solution[:n], 0.0, None)
        return LpSolution(status=LpStatus.OPTIMAL, x=x, value=float(problem.objective @ x))


def solve_lp(problem: LpProblem) -> LpSolution:
    return SimplexSolver().solve(problem)
