"""
Minimum-distance one-to-one transfer of drones between two placements.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import Norm, as_norm, horizontal_distance
from .exceptions import AeroCellValidationException


logger = logging.getLogger('aerocell.transfer')

UNREACHABLE = math.inf


@dataclass(frozen=True)
class TransferProblem:
    sources: tuple
    targets: tuple
    speed: float
    time_budget: float
    move_norm: Norm = Norm.L2

    def __post_init__(self):
        object.__setattr__(self, 'move_norm', as_norm(self.move_norm))
        if not self.sources or not self.targets:
            raise AeroCellValidationException('Sources and targets must be non-empty')
        if not self.speed > 0 or not self.time_budget > 0:
            raise AeroCellValidationException(
                'Speed and time budget must be positive, got {0} and {1}'.format(
                    self.speed, self.time_budget))

    @property
    def reach(self):
        return self.speed * self.time_budget


@dataclass
class CostMatrix:
    entries: np.ndarray
    reach: float

    @property
    def reachable(self):
        return np.isfinite(self.entries)

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class TransferPlan:
    matches: list
    retired: list
    launched: list
    total_cost: float
    reach: float = None

    @property
    def max_move(self):
        return max((d for _, _, d in self.matches), default=0.0)

    def to_dict(self):
        return {
            'matches': [[i, j, d] for i, j, d in self.matches],
            'retired': list(self.retired),
            'launched': list(self.launched),
            'total_cost_m': self.total_cost,
            'max_move_m': self.max_move,
            'reach_m': self.reach,
        }


def build_cost_matrix(problem):
    sources = np.asarray(problem.sources, dtype=float).reshape(-1, 2)
    targets = np.asarray(problem.targets, dtype=float).reshape(-1, 2)
    distances = horizontal_distance(sources[:, None, :], targets[None, :, :], problem.move_norm)
    entries = np.where(distances <= problem.reach, distances, UNREACHABLE)
    return CostMatrix(entries=entries, reach=problem.reach)


def _padded(entries):
    """Square matrix where surplus sources or targets pair with zero-cost dummies."""
    n, m = entries.shape
    size = max(n, m)
    matrix = np.zeros((size, size))
    matrix[:n, :m] = entries
    return matrix


def _augmented(entries):
    """
    Square matrix over sources + targets: a source may retire and a target
    may be launched at a penalty larger than any total of real moves, so
    the number of matches is maximised before distance is minimised.
    """
    n, m = entries.shape
    finite = entries[np.isfinite(entries)]
    penalty = 1.0 + math.fsum(finite.tolist())

    matrix = np.full((n + m, m + n), UNREACHABLE)
    matrix[:n, :m] = entries
    matrix[np.arange(n), m + np.arange(n)] = penalty
    matrix[n + np.arange(m), np.arange(m)] = penalty
    matrix[n:, m:] = 0.0
    return matrix


def _solve(matrix, entries):
    """Assignment over `matrix` as (match count, real distance, row -> column)."""
    n, m = entries.shape
    try:
        rows, cols = linear_sum_assignment(matrix)
    except ValueError:
        return None
    solution = dict(zip(rows.tolist(), cols.tolist()))
    moves = [entries[i, solution[i]] for i in range(n) if solution.get(i, m) < m]
    return len(moves), math.fsum(moves), solution


def _same(result, best):
    if result is None or result[0] != best[0]:
        return False
    return abs(result[1] - best[1]) <= 1e-9 * max(1.0, abs(best[1]))


def _force(matrix, row, col):
    forced = matrix.copy()
    keep = forced[row, col]
    forced[row, :] = UNREACHABLE
    forced[:, col] = UNREACHABLE
    forced[row, col] = keep
    return forced


def solve_transfer(costs):
    """
    Minimum total distance matching; the smaller side is matched completely
    whenever reachability allows it, otherwise as many drones as possible
    are matched. Among optimal plans the source-ordered match list is
    lexicographically smallest, retiring a source ranking after every
    possible match.
    """
    entries = np.asarray(costs.entries, dtype=float)
    if entries.ndim != 2 or min(entries.shape) < 1:
        raise AeroCellValidationException('Cost matrix must be at least 1x1')
    n, m = entries.shape

    matrix = _padded(entries)
    best = _solve(matrix, entries)
    if best is None:
        matrix = _augmented(entries)
        best = _solve(matrix, entries)

    for i in range(n):
        current = best[2][i]
        options = [j for j in range(m) if np.isfinite(entries[i, j])]
        if current < m:
            options = [j for j in options if j < current]
        for j in options:
            forced = _force(matrix, i, j)
            result = _solve(forced, entries)
            if _same(result, best):
                matrix, best = forced, result
                break
        else:
            matrix = _force(matrix, i, current)

    solution = best[2]
    matches = [(i, solution[i], float(entries[i, solution[i]]))
               for i in range(n) if solution[i] < m]
    matched_targets = {j for _, j, _ in matches}
    plan = TransferPlan(
        matches=matches,
        retired=[i for i in range(n) if solution[i] >= m],
        launched=[j for j in range(m) if j not in matched_targets],
        total_cost=math.fsum(d for _, _, d in matches),
        reach=costs.reach,
    )
    if len(matches) < min(n, m):
        logger.warning(
            'Partial transfer: {0} of {1} drones matched, {2} retired, {3} launched'.format(
                len(matches), min(n, m), len(plan.retired), len(plan.launched)))
    return plan


def plan_transition(placement_t, placement_t1, speed, time_budget, move_norm=Norm.L2):
    problem = TransferProblem(
        sources=tuple(placement_t.positions),
        targets=tuple(placement_t1.positions),
        speed=speed,
        time_budget=time_budget,
        move_norm=move_norm,
    )
    plan = solve_transfer(build_cost_matrix(problem))
    logger.info('Transfer plan: {0} moves, total {1:.3f} m'.format(
        len(plan.matches), plan.total_cost))
    return plan
