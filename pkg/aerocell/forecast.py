"""
Per-station demand forecasting: classical additive decomposition and
additive Holt-Winters smoothing.

```python
from aerocell.forecast import UsageSeries, predict_counts

series = UsageSeries(bs_id=3, values=saturday_counts, season_length=55)
predict_counts(series, 1)   # [12]
```
"""
import logging
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from statsmodels.tsa.seasonal import seasonal_decompose

from .exceptions import AeroCellValidationException, SeriesTooShortException


logger = logging.getLogger('aerocell.forecast')

SmoothingParams = namedtuple('SmoothingParams', ['alpha', 'beta', 'gamma'])

DEFAULT_PARAMS = SmoothingParams(0.2, 0.1, 0.1)
GRID = tuple(round(0.05 * k, 2) for k in range(21))
INIT_METHODS = ('first-season', 'anchored')


@dataclass(frozen=True)
class UsageSeries:
    bs_id: int
    values: tuple
    season_length: int
    timestamps: tuple = None

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        if self.timestamps is not None:
            object.__setattr__(self, 'timestamps', tuple(self.timestamps))
        if self.season_length < 1:
            raise AeroCellValidationException(
                'Season length must be >= 1, got {0}'.format(self.season_length))
        if any(v < 0 for v in self.values):
            raise AeroCellValidationException(
                'Usage series for BS {0} contains negative counts'.format(self.bs_id))
        if self.timestamps is not None and len(self.timestamps) != len(self.values):
            raise AeroCellValidationException('One timestamp per sample is required')

    def __len__(self):
        return len(self.values)

    def head(self, count):
        timestamps = self.timestamps[:count] if self.timestamps is not None else None
        return UsageSeries(self.bs_id, self.values[:count], self.season_length, timestamps)


@dataclass(frozen=True)
class HwState:
    level: float
    trend: float
    seasonals: tuple
    params: SmoothingParams = DEFAULT_PARAMS

    def __post_init__(self):
        object.__setattr__(self, 'params', SmoothingParams(*self.params))
        object.__setattr__(self, 'seasonals', tuple(self.seasonals))
        if not self.seasonals:
            raise AeroCellValidationException('At least one seasonal index is required')
        if any(not 0 <= p <= 1 for p in self.params):
            raise AeroCellValidationException(
                'Smoothing parameters must lie in [0, 1], got {0}'.format(tuple(self.params)))

    @property
    def season_length(self):
        return len(self.seasonals)


@dataclass
class DecompResult:
    trend_cycle: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    adjusted: np.ndarray

    @property
    def defined(self):
        """Mask of indices where the moving average exists."""
        return ~np.isnan(self.trend_cycle)


def _require_seasons(series, seasons):
    needed = seasons * series.season_length
    if len(series) < needed:
        raise SeriesTooShortException(
            'BS {0}: {1} samples, {2} needed ({3} seasons of {4})'.format(
                series.bs_id, len(series), needed, seasons, series.season_length))


def decompose(series):
    """
    Classical additive decomposition. The trend-cycle is the centred moving
    average of one season (2 x s for even s) and is NaN at the ends.
    """
    _require_seasons(series, 2)
    values = np.asarray(series.values, dtype=float)
    result = seasonal_decompose(values, model='additive', period=series.season_length)
    seasonal = np.asarray(result.seasonal, dtype=float)
    return DecompResult(
        trend_cycle=np.asarray(result.trend, dtype=float),
        seasonal=seasonal,
        remainder=np.asarray(result.resid, dtype=float),
        adjusted=values - seasonal,
    )


def hw_init(series, params=DEFAULT_PARAMS, method='first-season'):
    """
    Initial state at time s from the first two seasons.

    `'first-season'` takes the level as the mean of the first season;
    `'anchored'` moves that level to the end of the season along the initial
    trend and detrends the seasonal indices accordingly.
    """
    if method not in INIT_METHODS:
        raise AeroCellValidationException('Unknown initialisation: {0}'.format(method))
    _require_seasons(series, 2)
    s = series.season_length
    y = np.asarray(series.values, dtype=float)

    level = y[:s].mean()
    trend = ((y[s:2 * s] - y[:s]) / s).sum() / s
    seasonals = y[:s] - level
    if method == 'anchored':
        offsets = np.arange(1, s + 1) - (s + 1) / 2.0
        seasonals = seasonals - offsets * trend
        level = level + (s - 1) / 2.0 * trend

    return HwState(float(level), float(trend), tuple(float(v) for v in seasonals), params)


def hw_step(state, y):
    alpha, beta, gamma = state.params
    oldest = state.seasonals[0]
    level = alpha * (y - oldest) + (1 - alpha) * (state.level + state.trend)
    trend = beta * (level - state.level) + (1 - beta) * state.trend
    seasonal = gamma * (y - level) + (1 - gamma) * oldest
    return HwState(level, trend, state.seasonals[1:] + (seasonal,), state.params)


def hw_forecast(state, m):
    if m < 1:
        raise AeroCellValidationException('Forecast horizon must be >= 1, got {0}'.format(m))
    s = state.season_length
    return [
        state.level + state.trend * h + state.seasonals[(h - 1) % s]
        for h in range(1, m + 1)
    ]


def hw_run(series, params=DEFAULT_PARAMS, method='first-season'):
    """State after smoothing every sample past the first season."""
    state = hw_init(series, params, method)
    for y in series.values[series.season_length:]:
        state = hw_step(state, y)
    return state


def one_step_residuals(series, params=DEFAULT_PARAMS, method='first-season'):
    """Actual minus one-step-ahead forecast for every sample past the first season."""
    state = hw_init(series, params, method)
    residuals = []
    for y in series.values[series.season_length:]:
        residuals.append(y - hw_forecast(state, 1)[0])
        state = hw_step(state, y)
    return residuals


def holdout_residuals(series, holdout, params=DEFAULT_PARAMS, method='first-season'):
    """
    Forecast the last `holdout` samples from the rest of the series.
    Returns rows of (index, actual, forecast, actual - forecast).
    """
    if not 1 <= holdout < len(series):
        raise AeroCellValidationException('Invalid holdout length: {0}'.format(holdout))
    state = hw_run(series.head(len(series) - holdout), params, method)
    start = len(series) - holdout
    rows = []
    for offset, forecast in enumerate(hw_forecast(state, holdout)):
        actual = series.values[start + offset]
        rows.append((start + offset, actual, forecast, actual - forecast))
    return rows


def _grid_sse(values, s, level, trend, seasonals, grid):
    alpha, beta, gamma = grid[:, 0], grid[:, 1], grid[:, 2]
    level = np.full(len(grid), level)
    trend = np.full(len(grid), trend)
    ring = np.tile(np.asarray(seasonals, dtype=float), (len(grid), 1))
    sse = np.zeros(len(grid))
    for q, y in enumerate(values[s:]):
        slot = q % s
        oldest = ring[:, slot].copy()
        error = y - (level + trend + oldest)
        sse += error * error
        new_level = alpha * (y - oldest) + (1 - alpha) * (level + trend)
        trend = beta * (new_level - level) + (1 - beta) * trend
        level = new_level
        ring[:, slot] = gamma * (y - level) + (1 - gamma) * oldest
    return sse


def fit_params(series, method='first-season'):
    """
    Grid search over {0, 0.05, ..., 1} for each smoothing weight minimising
    the one-step-ahead squared error on all but the last season. Ties go to
    the smallest alpha, then beta, then gamma.
    """
    _require_seasons(series, 3)
    s = series.season_length
    training = series.head(len(series) - s)
    start = hw_init(training, DEFAULT_PARAMS, method)

    axes = np.asarray(GRID)
    grid = np.stack(np.meshgrid(axes, axes, axes, indexing='ij'), axis=-1).reshape(-1, 3)
    sse = _grid_sse(np.asarray(training.values), s, start.level, start.trend,
                    start.seasonals, grid)
    best = int(np.argmin(sse))
    params = SmoothingParams(*(float(v) for v in grid[best]))
    logger.info('BS {0}: fitted smoothing {1} with SSE {2:.6f}'.format(
        series.bs_id, tuple(params), sse[best]))
    return params


def round_count(value):
    """Nearest non-negative integer, halves rounded up."""
    return max(0, int(np.floor(value + 0.5)))


def predict_counts(series, m, params=DEFAULT_PARAMS, method='first-season'):
    state = hw_run(series, params, method)
    return [round_count(v) for v in hw_forecast(state, m)]
