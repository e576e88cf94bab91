from .forecast import ForecastMixin  # noqa
from .placement import PlacementMixin  # noqa
from .transfer import TransferMixin  # noqa
