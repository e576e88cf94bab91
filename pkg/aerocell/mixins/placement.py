from ..placement import (
    FleetResult, audit_placement, binary_search_fleet, capacity_sweep, max_drones, solve_placement,
)
from ..scenario import generate_users


class PlacementMixin:
    """Placement stage bound to the planner's scenario config"""

    def generate_users(self, count=None, seed=None):
        count = self.config.user_count if count is None else count
        return generate_users(self.config, count, seed)

    def place(self, users, n=None, warm_start=None):
        """
        Fixed fleet when `n` is given, otherwise the smallest fleet reaching
        the coverage target. Always returns a `FleetResult`.
        """
        config = self.config
        options = config.solve_options
        if n is None:
            return binary_search_fleet(
                users, config.region, config.capacity, config.channel,
                alpha=config.alpha, max_iter=config.max_iter, **options)

        placement, report = solve_placement(
            users, n, config.region, config.capacity, config.channel,
            warm_start=warm_start, **options)
        return FleetResult(
            n_star=n,
            placement=placement,
            report=report,
            below_target=report.coverage_fraction < config.alpha,
            evaluations=1,
            max_drones=max_drones(config.region, config.max_drones_formula),
        )

    def sweep(self, users, capacities=None):
        """Smallest fleet per DBS capacity, over the config palette by default."""
        config = self.config
        capacities = config.capacity_palette if capacities is None else capacities
        return capacity_sweep(
            users, config.region, capacities, config.channel,
            alpha=config.alpha, max_iter=config.max_iter, **config.solve_options)

    def audit(self, placement, users):
        return audit_placement(placement, users, self.config.channel)
