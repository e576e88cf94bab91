import math

from ..exceptions import AeroCellValidationException
from ..forecast import decompose, fit_params, holdout_residuals, hw_forecast, hw_run, round_count
from ..scenario import series_from_trace, station_ids


class ForecastMixin:
    """Demand forecasting bound to the planner's scenario config"""

    def _season_length(self):
        if self.config.season_length is None:
            raise AeroCellValidationException(
                'season_length is required for forecasting; it is never inferred')
        return self.config.season_length

    def station_series(self, records, bs_id):
        return series_from_trace(records, bs_id, self._season_length())

    def smoothing_for(self, series):
        if self.config.fit_smoothing:
            return fit_params(series, self.config.hw_init)
        return self.config.smoothing

    def forecast_station(self, series, horizon=None):
        """
        Raw and clamped predictions for horizons 1..`horizon`:

        ```python
        planner.forecast_station(series, 2)
        # [{'bs_id': 3, 'horizon': 1, 'raw': 11.62, 'count': 12}, ...]
        ```
        """
        horizon = self.config.horizon if horizon is None else horizon
        params = self.smoothing_for(series)
        state = hw_run(series, params, self.config.hw_init)
        return [
            {'bs_id': series.bs_id, 'horizon': h, 'raw': raw, 'count': round_count(raw)}
            for h, raw in enumerate(hw_forecast(state, horizon), start=1)
        ]

    def forecast_demand(self, records, bs_ids=None):
        """Forecast rows of every requested base station, in id order."""
        ids = station_ids(records) if bs_ids is None else sorted(bs_ids)
        rows = []
        for bs_id in ids:
            rows.extend(self.forecast_station(self.station_series(records, bs_id)))
        return rows

    def holdout_table(self, series, holdout):
        params = self.smoothing_for(series.head(len(series) - holdout))
        return [
            {'bs_id': series.bs_id, 'index': index, 'actual': actual, 'forecast': forecast,
             'error': error}
            for index, actual, forecast, error in holdout_residuals(
                series, holdout, params, self.config.hw_init)
        ]

    def decomposition_table(self, series):
        result = decompose(series)

        def value(v):
            return None if math.isnan(v) else float(v)

        return [
            {'bs_id': series.bs_id, 'index': k, 'observed': y,
             'trend_cycle': value(result.trend_cycle[k]), 'seasonal': value(result.seasonal[k]),
             'remainder': value(result.remainder[k]), 'adjusted': value(result.adjusted[k])}
            for k, y in enumerate(series.values)
        ]
