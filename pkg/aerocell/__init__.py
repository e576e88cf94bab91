import logging

from .channel import ChannelParams, Norm  # noqa
from .exceptions import (  # noqa
    AeroCellException, AeroCellIOException, AeroCellValidationException, PipelineStageException,
    SeriesTooShortException, TraceFormatException,
)
from .forecast import SmoothingParams, UsageSeries  # noqa
from .placement import GroundUser, Placement, Region  # noqa
from .planner import AeroCellPlanner, PipelineReport  # noqa
from .scenario import ScenarioConfig, load_config  # noqa


logging.getLogger('aerocell').addHandler(logging.NullHandler())
