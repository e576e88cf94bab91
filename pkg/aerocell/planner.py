import io
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import requests
from requests.adapters import HTTPAdapter
from requests.exceptions import RequestException
from requests.packages.urllib3.util.retry import Retry

from . import scenario
from .exceptions import (
    AeroCellException, AeroCellIOException, AeroCellValidationException, PipelineStageException,
    TraceFormatException,
)
from .mixins import ForecastMixin, PlacementMixin, TransferMixin
from .report import placement_section


logger = logging.getLogger('aerocell.planner')

FETCH_TIMEOUT = 30.0


@dataclass
class PipelineReport:
    config: dict
    place_t: dict
    forecast: list
    place_t1: dict
    transfer: dict
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        """Everything but wall times, so equal runs give equal reports."""
        return {
            'config': self.config,
            'place_t': self.place_t,
            'forecast': self.forecast,
            'place_t1': self.place_t1,
            'transfer': self.transfer,
        }


class AeroCellPlanner(PlacementMixin, ForecastMixin, TransferMixin):
    """
    ```python
    from aerocell import AeroCellPlanner, load_config

    planner = AeroCellPlanner(load_config('scenario.json'))

    # Smallest fleet serving 90% of a user snapshot
    users = planner.load_users('users_t.csv')
    fleet = planner.place(users)

    # Whole pipeline, trace fetched over HTTP
    report = planner.run_plan(users, 'https://example.org/trace.csv')
    ```
    """

    def __init__(self, config=None, retry_trace_fetch=False, fetch_timeout=FETCH_TIMEOUT):
        self.config = config if config is not None else scenario.ScenarioConfig()
        self.fetch_timeout = fetch_timeout

        self._session = requests.Session()
        if retry_trace_fetch:
            self.retry_trace_fetch()

    def retry_trace_fetch(self, total=3, backoff_factor=0.5,
                          status_forcelist=(429, 500, 502, 503, 504)):
        """Retry trace downloads on dropped connections and transient server statuses."""
        retries = Retry(total=total, backoff_factor=backoff_factor,
                        status_forcelist=status_forcelist)
        self._session.mount('http://', HTTPAdapter(max_retries=retries))
        self._session.mount('https://', HTTPAdapter(max_retries=retries))

    def _fetch_trace_text(self, url):
        try:
            response = self._session.get(url, timeout=self.fetch_timeout)
        except RequestException as exc:
            logger.exception('Trace download from {0} failed'.format(url))
            raise AeroCellIOException('Cannot fetch trace {0}: {1}'.format(url, exc))

        if not response.ok:
            msg = 'Cannot fetch trace {0}: HTTP {1}'.format(url, response.status_code)
            logger.warning(msg)
            raise AeroCellIOException(msg)

        try:
            return response.content.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise TraceFormatException(response.content[:exc.start].count(b'\n') + 1,
                                       'invalid UTF-8 byte at offset {0}'.format(exc.start))

    def load_trace(self, source):
        """Trace records from a local path or an http(s) URL."""
        source = str(source)
        if source.startswith(('http://', 'https://')):
            logger.info('Fetching trace from: {0}'.format(source))
            return scenario.parse_trace(io.StringIO(self._fetch_trace_text(source)),
                                        self.config.region)
        return scenario.load_trace(source, self.config.region)

    def load_users(self, path):
        return scenario.load_users(path, self.config.region)

    def materialize(self, records, forecast_rows):
        """
        Users for the next round around each base station, using the count
        at the last forecast horizon.
        """
        counts = {}
        for row in forecast_rows:
            counts[row['bs_id']] = row['count']

        users = []
        for bs_id in sorted(counts):
            bs = scenario.latest_record(records, bs_id)
            users.extend(scenario.materialize_users(
                bs, counts[bs_id], self.config.effective_cell_radius,
                scenario.child_seed(self.config.seed, 1, bs_id), self.config,
                first_id=len(users)))
        return users

    @contextmanager
    def _stage(self, name, timings):
        started = time.perf_counter()
        logger.info('Stage {0} started'.format(name))
        try:
            yield
        except PipelineStageException:
            raise
        except AeroCellException as exc:
            raise PipelineStageException(name, exc)
        except Exception as exc:
            logger.exception('Stage {0} crashed'.format(name))
            raise PipelineStageException(name, exc)
        finally:
            timings[name] = time.perf_counter() - started

    def run_plan(self, users_t, trace_source, n_t=None, n_t1=None):
        """place(t) -> forecast -> materialize -> place(t+1) -> transfer"""
        timings = {}
        params = self.config.channel
        if self.config.time_budget is None:
            raise AeroCellValidationException('time_budget is required for transfer planning')
        self._season_length()

        with self._stage('place_t', timings):
            fleet_t = self.place(users_t, n_t)

        with self._stage('forecast', timings):
            records = self.load_trace(trace_source)
            forecast = self.forecast_demand(records)

        with self._stage('materialize', timings):
            users_t1 = self.materialize(records, forecast)

        with self._stage('place_t1', timings):
            fleet_t1 = self.place(users_t1, n_t1)

        with self._stage('transfer', timings):
            plan = self.plan_transfer(fleet_t.placement, fleet_t1.placement)

        return PipelineReport(
            config=self.config.to_dict(),
            place_t=placement_section(fleet_t, users_t, params),
            forecast=forecast,
            place_t1=placement_section(fleet_t1, users_t1, params),
            transfer=plan.to_dict(),
            timings=timings,
        )
