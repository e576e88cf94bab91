from ..exceptions import AeroCellValidationException
from ..transfer import plan_transition


class TransferMixin:
    """Drone transfer planning bound to the planner's scenario config"""

    def plan_transfer(self, placement_t, placement_t1):
        config = self.config
        if config.time_budget is None:
            raise AeroCellValidationException('time_budget is required for transfer planning')
        return plan_transition(placement_t, placement_t1, config.speed, config.time_budget,
                               config.move_norm)
