"""
Drone base-station placement: coverage maximisation for a fixed fleet and
the binary search for the smallest fleet reaching a coverage target.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pulp

from .channel import coverage_matrix
from .exceptions import AeroCellException, AeroCellValidationException


logger = logging.getLogger('aerocell.placement')

CAPACITY_TOLERANCE = 1e-9
EXACT_MARGIN = 1e-6
EXACT_LIMIT = 400
MAX_SWAP_ROUNDS = None
MAX_DRONES_FORMULAS = ('product', 'sum')


@dataclass(frozen=True)
class GroundUser:
    id: int
    x: float
    y: float
    bw: float

    def __post_init__(self):
        if not self.bw > 0:
            raise AeroCellValidationException(
                'User {0} requires bandwidth > 0, got {1}'.format(self.id, self.bw))

    @property
    def xy(self):
        return (self.x, self.y)

    def to_dict(self):
        return {'id': self.id, 'x': self.x, 'y': self.y, 'bw': self.bw}


@dataclass(frozen=True)
class Region:
    X: float
    Y: float
    R: float

    def __post_init__(self):
        if not (self.X > 0 and self.Y > 0):
            raise AeroCellValidationException(
                'Region sides must be positive, got {0}x{1}'.format(self.X, self.Y))
        if not 0 < self.R <= min(self.X, self.Y):
            raise AeroCellValidationException(
                'Coverage range must lie in (0, min(X, Y)], got {0}'.format(self.R))

    def contains(self, x, y):
        return 0 <= x <= self.X and 0 <= y <= self.Y

    def to_dict(self):
        return {'X': self.X, 'Y': self.Y, 'R': self.R}


@dataclass
class Placement:
    positions: tuple
    capacity: float
    ucd: np.ndarray
    user_ids: tuple = ()

    @property
    def n_dbs(self):
        return len(self.positions)

    @property
    def assignment(self):
        """Serving DBS index per user column, -1 when unserved."""
        owner = np.full(self.ucd.shape[1], -1, dtype=int)
        dbs, users = np.nonzero(self.ucd)
        owner[users] = dbs
        return owner.tolist()

    def to_dict(self):
        return {
            'positions': [[float(x), float(y)] for x, y in self.positions],
            'capacity': self.capacity,
            'user_ids': list(self.user_ids),
            'assignment': self.assignment,
        }


@dataclass
class CoverageReport:
    covered_count: int
    total_users: int
    coverage_fraction: float
    served_rate: float
    per_dbs_load: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            'covered_count': self.covered_count,
            'total_users': self.total_users,
            'coverage_fraction': self.coverage_fraction,
            'served_rate': self.served_rate,
            'per_dbs_load': list(self.per_dbs_load),
        }


@dataclass
class FleetResult:
    n_star: int
    placement: Placement
    report: CoverageReport
    below_target: bool
    evaluations: int
    max_drones: int


def capacity_fits(load, bw, capacity):
    """The strict bandwidth constraint: a DBS never reaches its capacity."""
    return load + bw < capacity - CAPACITY_TOLERANCE


def max_drones(region, formula='product'):
    """
    Upper bound on the fleet size from tiling the region with cells of side
    sqrt(2) * R, the square inscribed in a coverage disc of radius R.

    `formula='sum'` gives the per-axis sum instead of the product; it is kept
    for comparison only.
    """
    pitch = math.sqrt(2.0) * region.R
    nx = max(1, math.ceil(region.X / pitch - 1e-9))
    ny = max(1, math.ceil(region.Y / pitch - 1e-9))
    if formula == 'product':
        return nx * ny
    if formula == 'sum':
        return nx + ny
    raise AeroCellValidationException('Unknown max_drones formula: {0}'.format(formula))


def _axis_positions(length, pitch):
    positions = []
    k = 1
    while k * pitch < length - 1e-9:
        positions.append(k * pitch)
        k += 1
    if not positions:
        return [length / 2.0]
    # boundary completion
    if length - positions[-1] > pitch / 2.0 + 1e-9:
        positions.append(length - pitch / 2.0)
    return positions


def candidate_sites(region, users):
    """
    Row-major lattice of pitch R/sqrt(2) over the region followed by user
    locations in id order, without duplicates.
    """
    pitch = region.R / math.sqrt(2.0)
    xs = _axis_positions(region.X, pitch)
    ys = _axis_positions(region.Y, pitch)

    sites = {}
    for y in ys:
        for x in xs:
            sites.setdefault((float(x), float(y)), None)
    for user in sorted(users, key=lambda u: u.id):
        sites.setdefault((float(user.x), float(user.y)), None)
    return list(sites)


class _CoverageModel:
    """Precomputed coverage of a user set by a list of sites."""

    def __init__(self, sites, users, capacity, params):
        self.sites = list(sites)
        self.users = list(users)
        self.capacity = capacity
        self.bw = [u.bw for u in self.users]
        self.cover = coverage_matrix(self.sites, [u.xy for u in self.users], params)
        self.assignable = [capacity_fits(0.0, bw, capacity) for bw in self.bw]
        self.site_users = [np.flatnonzero(row).tolist() for row in self.cover]
        groups = {}
        for s, row in enumerate(self.cover):
            groups.setdefault(row.tobytes(), []).append(s)
        # sites sharing a coverage row, in order of their first site
        self.groups = list(groups.values())
        reachable = self.cover.any(axis=0)
        self.coverable = sum(1 for j, ok in enumerate(self.assignable) if ok and reachable[j])

    def assign(self, chosen, base=None):
        """
        Users in id order go to the covering DBS with the most remaining
        capacity, lowest index on ties. Users already served in `base` keep
        their DBS. Returns (owner, loads).
        """
        loads = [0.0] * len(chosen)
        owner = [-1] * len(self.users) if base is None else list(base)
        for j, k in enumerate(owner):
            if k >= 0:
                loads[k] += self.bw[j]
        if not chosen:
            return owner, loads

        covers = self.cover[list(chosen)].T.tolist()
        for j, row in enumerate(covers):
            if owner[j] >= 0 or not self.assignable[j]:
                continue
            bw = self.bw[j]
            best = -1
            for k, covered in enumerate(row):
                if not covered or not capacity_fits(loads[k], bw, self.capacity):
                    continue
                if best < 0 or loads[k] < loads[best]:
                    best = k
            if best >= 0:
                owner[j] = best
                loads[best] += bw
        return owner, loads

    def count(self, chosen):
        owner, _ = self.assign(chosen)
        return sum(1 for k in owner if k >= 0)

    def fresh_gain(self, site, unserved):
        load = 0.0
        gain = 0
        for j in self.site_users[site]:
            if unserved[j] and self.assignable[j] \
                    and capacity_fits(load, self.bw[j], self.capacity):
                load += self.bw[j]
                gain += 1
        return gain

    def placement(self, chosen, owner):
        ucd = np.zeros((len(chosen), len(self.users)), dtype=np.int8)
        for j, k in enumerate(owner):
            if k >= 0:
                ucd[k, j] = 1
        return Placement(
            positions=tuple(self.sites[s] for s in chosen),
            capacity=self.capacity,
            ucd=ucd,
            user_ids=tuple(u.id for u in self.users),
        )


def _ordered(users):
    return sorted(users, key=lambda u: u.id)


def assign_users(positions, users, capacity, params):
    if not len(positions):
        raise AeroCellValidationException('At least one DBS position is required')
    model = _CoverageModel([tuple(p) for p in positions], _ordered(users), capacity, params)
    chosen = list(range(len(model.sites)))
    owner, _ = model.assign(chosen)
    return model.placement(chosen, owner)


def coverage_report(placement, users):
    users = _ordered(users)
    bw = np.array([u.bw for u in users], dtype=float)
    per_dbs_load = tuple(
        math.fsum(bw[np.flatnonzero(row)]) for row in placement.ucd
    )
    covered = int(placement.ucd.sum())
    total = len(users)
    return CoverageReport(
        covered_count=covered,
        total_users=total,
        coverage_fraction=covered / total if total else 1.0,
        served_rate=math.fsum(per_dbs_load),
        per_dbs_load=per_dbs_load,
    )


def audit_placement(placement, users, params):
    """Constraint violations of a placement; empty when it is feasible."""
    users = _ordered(users)
    violations = []
    ucd = placement.ucd
    for j in np.flatnonzero(ucd.sum(axis=0) > 1):
        violations.append('user {0} served by more than one DBS'.format(users[j].id))

    bw = np.array([u.bw for u in users], dtype=float)
    for i, row in enumerate(ucd):
        load = math.fsum(bw[np.flatnonzero(row)])
        if not load < placement.capacity:
            violations.append('DBS {0} load {1} reaches capacity {2}'.format(
                i, load, placement.capacity))

    cover = coverage_matrix(list(placement.positions), [u.xy for u in users], params)
    for i, j in zip(*np.nonzero(ucd.astype(bool) & ~cover)):
        violations.append('user {0} assigned to DBS {1} outside coverage'.format(users[j].id, i))
    return violations


def _free_sites(model, taken):
    """Lowest untaken site of every coverage group, ascending."""
    free = []
    for group in model.groups:
        for s in group:
            if s not in taken:
                free.append(s)
                break
    return sorted(free)


def _greedy_fill(model, chosen, n_dbs):
    chosen = list(chosen)
    while len(chosen) < n_dbs:
        owner, _ = model.assign(chosen)
        unserved = [k < 0 for k in owner]
        taken = set(chosen)
        best_site, best_gain = -1, -1
        for s in _free_sites(model, taken):
            gain = model.fresh_gain(s, unserved)
            if gain > best_gain:
                best_site, best_gain = s, gain
        if best_site < 0:
            raise AeroCellValidationException(
                'Only {0} candidate sites for {1} DBS'.format(len(model.sites), n_dbs))
        chosen.append(best_site)
    return chosen


def _swap_candidates(model, chosen, owner):
    taken = set(chosen)
    unserved = [j for j, k in enumerate(owner) if k < 0 and model.assignable[j]]
    if not unserved:
        return []
    reach = model.cover[:, unserved].any(axis=1)
    seen = set()
    candidates = []
    for s in np.flatnonzero(reach).tolist():
        if s in taken:
            continue
        signature = model.cover[s].tobytes()
        if signature in seen:
            continue
        seen.add(signature)
        candidates.append(s)
    return candidates


def _swap_positions(model, chosen):
    """First position of every distinct coverage row among the chosen sites."""
    seen = set()
    positions = []
    for p, s in enumerate(chosen):
        signature = model.cover[s].tobytes()
        if signature not in seen:
            seen.add(signature)
            positions.append(p)
    return positions


def _local_search(model, chosen, max_rounds=None):
    """
    First-improvement 1-swap until no swap raises the covered count, or
    after `max_rounds` improvements when given.

    A swap brings in a site that covers at least one unserved user, one
    site per distinct coverage row. Every improvement serves one more user,
    so the unbounded search stops after at most `coverable` rounds.
    """
    chosen = list(chosen)
    best = model.count(chosen)
    rounds = itertools.count() if max_rounds is None else range(max_rounds)
    for _ in rounds:
        if best >= model.coverable:
            break
        owner, _ = model.assign(chosen)
        improved = False
        positions = _swap_positions(model, chosen)
        for s in _swap_candidates(model, chosen, owner):
            for p in positions:
                trial = chosen[:p] + [s] + chosen[p + 1:]
                count = model.count(trial)
                if count > best:
                    chosen, best, improved = trial, count, True
                    break
            if improved:
                break
        if not improved:
            break
    return chosen


def _solve_exact(model, n_dbs):
    problem = pulp.LpProblem('dbs_max_coverage', pulp.LpMaximize)
    site_vars = pulp.LpVariable.dicts('y', range(len(model.sites)), cat='Binary')
    pairs = [
        (s, j)
        for s, users in enumerate(model.site_users)
        for j in users
        if model.assignable[j]
    ]
    assign_vars = pulp.LpVariable.dicts('x', pairs, cat='Binary')

    problem += pulp.lpSum(assign_vars.values()), 'covered users'
    problem += pulp.lpSum(site_vars.values()) == n_dbs, 'fleet size'
    for s, j in pairs:
        problem += assign_vars[(s, j)] <= site_vars[s]
    by_user = {}
    by_site = {}
    for s, j in pairs:
        by_user.setdefault(j, []).append(assign_vars[(s, j)])
        by_site.setdefault(s, []).append(model.bw[j] * assign_vars[(s, j)])
    for j, variables in by_user.items():
        problem += pulp.lpSum(variables) <= 1
    for s, terms in by_site.items():
        problem += pulp.lpSum(terms) <= model.capacity - EXACT_MARGIN

    problem.solve(pulp.PULP_CBC_CMD(msg=False))
    status = pulp.LpStatus[problem.status]
    if status != 'Optimal':
        raise AeroCellException('Exact placement model ended with status {0}'.format(status))

    chosen = sorted(s for s, var in site_vars.items() if var.value() > 0.5)
    position = {s: k for k, s in enumerate(chosen)}
    owner = [-1] * len(model.users)
    loads = [0.0] * len(chosen)
    for (s, j), var in sorted(assign_vars.items()):
        if var.value() > 0.5 and s in position:
            k = position[s]
            if capacity_fits(loads[k], model.bw[j], model.capacity):
                owner[j] = k
                loads[k] += model.bw[j]
    return chosen, owner


def _warm_owner(model, start, warm_start):
    """Assignment carried over from a warm start, restricted to its kept sites."""
    user_ids = tuple(u.id for u in model.users)
    carried = (isinstance(warm_start, Placement) and tuple(warm_start.user_ids) == user_ids
               and warm_start.capacity <= model.capacity)
    if not carried:
        owner, _ = model.assign(start)
        return owner
    return [k if k < len(start) else -1 for k in warm_start.assignment]


def solve_placement(users, n_dbs, region, capacity, params, solver='auto', warm_start=None,
                    exact_limit=EXACT_LIMIT, max_swap_rounds=MAX_SWAP_ROUNDS,
                    max_drones_formula='product'):
    """
    Choose `n_dbs` candidate sites maximising the number of served users.

    `solver='heuristic'` runs greedy maximum coverage followed by 1-swap local
    search, `solver='exact'` solves the integer model, and `'auto'` uses the
    exact model when users x candidate sites <= `exact_limit`.
    `max_swap_rounds` caps the local search, None runs it to a local optimum.

    A warm start, the `Placement` of a smaller fleet or just its positions,
    is kept and extended greedily. Users it served stay with their DBS, so
    the heuristic never serves fewer users than the warm start did.
    """
    limit = max_drones(region, max_drones_formula)
    if not 1 <= n_dbs <= limit:
        raise AeroCellValidationException(
            'Fleet size must lie in [1, {0}], got {1}'.format(limit, n_dbs))
    if solver not in ('auto', 'heuristic', 'exact'):
        raise AeroCellValidationException('Unknown solver: {0}'.format(solver))

    users = _ordered(users)
    sites = candidate_sites(region, users)
    warm_positions = warm_start.positions if isinstance(warm_start, Placement) else warm_start
    warm = [tuple(map(float, p)) for p in (warm_positions or ())]
    for position in warm:
        if position not in sites:
            sites.append(position)
    model = _CoverageModel(sites, users, capacity, params)

    exact = solver == 'exact' or (
        solver == 'auto' and len(users) * len(sites) <= exact_limit)
    if exact:
        logger.info('Solving exact placement: {0} users, {1} sites, {2} DBS'.format(
            len(users), len(sites), n_dbs))
        chosen, owner = _solve_exact(model, n_dbs)
        canonical, _ = model.assign(chosen)
        if sum(k >= 0 for k in canonical) >= sum(k >= 0 for k in owner):
            owner = canonical
    else:
        logger.info('Solving heuristic placement: {0} users, {1} sites, {2} DBS'.format(
            len(users), len(sites), n_dbs))
        index = {site: s for s, site in enumerate(sites)}
        start = [index[p] for p in warm][:n_dbs]
        chosen = _greedy_fill(model, start, n_dbs)
        chosen = _local_search(model, chosen, max_swap_rounds)
        owner, _ = model.assign(chosen)

        if start:
            extended = start + [s for s in chosen if s not in start][:n_dbs - len(start)]
            warm_owner, _ = model.assign(extended, _warm_owner(model, start, warm_start))
            if sum(k >= 0 for k in warm_owner) > sum(k >= 0 for k in owner):
                chosen, owner = extended, warm_owner

    placement = model.placement(chosen, owner)
    report = coverage_report(placement, users)
    logger.info('Placement with {0} DBS serves {1}/{2} users'.format(
        n_dbs, report.covered_count, report.total_users))
    return placement, report


def _best_start(pool, n_dbs, capacity):
    """Solved placement serving the most users with at most `n_dbs` DBS and no more capacity."""
    best = None
    for placement, report in pool:
        if placement.n_dbs > n_dbs or placement.capacity > capacity:
            continue
        key = (report.covered_count, placement.n_dbs)
        if best is None or key > best[0]:
            best = key, placement, report
    return None if best is None else best[1:]


def binary_search_fleet(users, region, capacity, params, alpha=0.9, max_iter=32, pool=None,
                        **solve_kwargs):
    """
    Smallest fleet whose placement serves at least `alpha` of the users.

    Every fleet size tried is also solved from the best placement already
    known for the same users with no more DBS and no more capacity, and
    keeps the one serving more users. `pool` collects the solved
    placements; sharing it between searches at increasing capacity keeps
    the fleet size non-increasing in capacity.

    ```python
    result = binary_search_fleet(users, Region(300, 400, 50), 40.0, params)
    result.n_star, result.report.coverage_fraction, result.below_target
    ```
    """
    if not 0 < alpha <= 1:
        raise AeroCellValidationException('alpha must lie in (0, 1], got {0}'.format(alpha))
    if max_iter < 1:
        raise AeroCellValidationException('max_iter must be >= 1, got {0}'.format(max_iter))

    limit = max_drones(region, solve_kwargs.get('max_drones_formula', 'product'))
    pool = [] if pool is None else pool
    solved = {}

    def evaluate(n):
        if n in solved:
            return solved[n]
        result = solve_placement(users, n, region, capacity, params, **solve_kwargs)
        start = _best_start(pool, n, capacity)
        if start is not None and start[1].covered_count > result[1].covered_count:
            logger.debug('Fleet size n={0}: warm start from {1} DBS at {2}'.format(
                n, start[0].n_dbs, start[0].capacity))
            warm = solve_placement(users, n, region, capacity, params, warm_start=start[0],
                                   **solve_kwargs)
            if warm[1].covered_count > result[1].covered_count:
                result = warm
        solved[n] = result
        pool.append(result)
        logger.info('Fleet size n={0}: coverage {1:.4f}'.format(
            n, result[1].coverage_fraction))
        return result

    low, high = 1, limit
    iterations = 0
    while low < high and iterations < max_iter:
        middle = (low + high) // 2
        iterations += 1
        _, report = evaluate(middle)
        if report.coverage_fraction >= alpha:
            high = middle
        else:
            low = middle + 1

    n_star = low if low == high else high
    placement, report = evaluate(n_star)
    while report.coverage_fraction < alpha and n_star < limit:
        n_star += 1
        placement, report = evaluate(n_star)

    below_target = report.coverage_fraction < alpha
    if below_target:
        logger.warning('Coverage target {0} not reached with {1} DBS ({2:.4f})'.format(
            alpha, n_star, report.coverage_fraction))

    return FleetResult(
        n_star=n_star,
        placement=placement,
        report=report,
        below_target=below_target,
        evaluations=len(solved),
        max_drones=limit,
    )


def capacity_sweep(users, region, capacities, params, alpha=0.9, max_iter=32, **solve_kwargs):
    """
    Minimal fleet for each DBS capacity, as {capacity: FleetResult}.

    Capacities are searched in ascending order over one shared pool of
    placements, so a larger capacity never needs more DBS.
    """
    ordered = sorted({float(c) for c in capacities})
    if not ordered or ordered[0] <= 0:
        raise AeroCellValidationException('Capacities must be positive, got {0}'.format(
            list(capacities)))
    pool = []
    results = {}
    for capacity in ordered:
        results[capacity] = binary_search_fleet(users, region, capacity, params, alpha=alpha,
                                                max_iter=max_iter, pool=pool, **solve_kwargs)
        logger.info('Capacity {0}: {1} DBS'.format(capacity, results[capacity].n_star))
    return results
