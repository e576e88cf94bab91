import math

import pytest
from requests.exceptions import RequestException

from aerocell import (
    AeroCellIOException, AeroCellPlanner, AeroCellValidationException, PipelineReport,
    PipelineStageException, ScenarioConfig, TraceFormatException, load_config,
)
from aerocell.planner import FETCH_TIMEOUT
from aerocell.scenario import load_trace

from .fixtures import ResponseMock, data_path


class TestAeroCellPlanner(object):

    def setup_method(self):
        self.planner = AeroCellPlanner(ScenarioConfig(season_length=4, time_budget=100.0))
        self.test_url = 'http://example.com/trace.csv'

    def test_instance(self):
        planner = AeroCellPlanner()

        assert planner.config == ScenarioConfig()
        assert planner.config.season_length is None

    def test_fetch_trace_text_success(self, session_get_mock):
        session_get_mock.return_value = ResponseMock()(200, b'a,b\n')
        data = self.planner._fetch_trace_text(self.test_url)
        assert data == 'a,b\n'
        session_get_mock.assert_called_with(self.test_url, timeout=FETCH_TIMEOUT)

    def test_fetch_trace_text_request_exception(self, session_get_mock):
        session_get_mock.side_effect = RequestException('Error')
        with pytest.raises(AeroCellIOException) as exc:
            self.planner._fetch_trace_text(self.test_url)

        assert str(exc.value) == 'Cannot fetch trace {0}: Error'.format(self.test_url)

    def test_fetch_trace_text_404(self, session_get_mock):
        session_get_mock.return_value = ResponseMock()(404, b'')
        with pytest.raises(AeroCellIOException) as exc:
            self.planner._fetch_trace_text(self.test_url)

        assert str(exc.value).endswith('HTTP 404')

    def test_fetch_trace_text_not_utf8(self, session_get_mock):
        session_get_mock.return_value = ResponseMock()(200, b'timestamp\n\xff\n')
        with pytest.raises(TraceFormatException) as exc:
            self.planner._fetch_trace_text(self.test_url)

        assert exc.value.line == 2

    def test_fetch_timeout(self, session_get_mock):
        session_get_mock.return_value = ResponseMock()(200, b'')
        AeroCellPlanner(fetch_timeout=5.0)._fetch_trace_text(self.test_url)

        session_get_mock.assert_called_with(self.test_url, timeout=5.0)

    def test_load_trace_from_url(self, session_get_mock):
        with open(data_path('golden_trace.csv'), 'rb') as fp:
            session_get_mock.return_value = ResponseMock()(200, fp.read())

        records = self.planner.load_trace(self.test_url)

        session_get_mock.assert_called_with(self.test_url, timeout=FETCH_TIMEOUT)
        assert records == load_trace(data_path('golden_trace.csv'))

    def test_load_trace_from_path(self, session_get_mock):
        records = self.planner.load_trace(data_path('golden_trace.csv'))

        assert len(records) == 24
        session_get_mock.assert_not_called()

    def test_retry_trace_fetch(self):
        planner = AeroCellPlanner(retry_trace_fetch=True)
        adapter = planner._session.get_adapter('https://example.com')

        assert adapter.max_retries.total == 3
        assert 503 in adapter.max_retries.status_forcelist
        assert 429 in adapter.max_retries.status_forcelist

    def test_materialize(self):
        planner = AeroCellPlanner(load_config(data_path('golden_config.json')))
        records = planner.load_trace(data_path('golden_trace.csv'))
        rows = [{'bs_id': 1, 'count': 4}, {'bs_id': 2, 'count': 3}, {'bs_id': 3, 'count': 5}]

        users = planner.materialize(records, rows)

        assert [u.id for u in users] == list(range(12))
        centres = [(50.0, 50.0)] * 4 + [(150.0, 200.0)] * 3 + [(250.0, 350.0)] * 5
        for user, (cx, cy) in zip(users, centres):
            assert math.hypot(user.x - cx, user.y - cy) <= 5.0 + 1e-9
        assert planner.materialize(records, rows) == users

    def test_materialize_uses_last_horizon(self):
        records = self.planner.load_trace(data_path('golden_trace.csv'))
        rows = [{'bs_id': 1, 'horizon': 1, 'count': 9}, {'bs_id': 1, 'horizon': 2, 'count': 2}]

        assert len(self.planner.materialize(records, rows)) == 2


class TestRunPlan(object):

    def setup_method(self):
        self.planner = AeroCellPlanner(load_config(data_path('golden_config.json')))
        self.users = self.planner.load_users(data_path('golden_users.csv'))
        self.trace = data_path('golden_trace.csv')

    def test_golden_pipeline(self):
        report = self.planner.run_plan(self.users, self.trace)

        assert isinstance(report, PipelineReport)
        for section in (report.place_t, report.place_t1):
            assert section['n_star'] == 3
            assert section['evaluations'] == 5
            assert section['coverage']['covered_count'] == 12
        assert [row['count'] for row in report.forecast] == [4, 3, 5]
        assert len(report.transfer['matches']) == 3
        assert report.transfer['retired'] == [] and report.transfer['launched'] == []
        assert set(report.timings) == {'place_t', 'forecast', 'materialize', 'place_t1',
                                       'transfer'}
        assert 'timings' not in report.to_dict()

    def test_runs_are_repeatable(self):
        first = self.planner.run_plan(self.users, self.trace).to_dict()
        second = AeroCellPlanner(self.planner.config).run_plan(self.users, self.trace).to_dict()

        assert first == second

    def test_fixed_fleet(self):
        report = self.planner.run_plan(self.users, self.trace, n_t=4, n_t1=3)

        assert report.place_t['n_star'] == 4
        assert report.place_t['evaluations'] == 1
        assert report.place_t1['n_star'] == 3

    def test_missing_trace_fails_forecast_stage(self, tmp_path):
        with pytest.raises(PipelineStageException) as exc:
            self.planner.run_plan(self.users, str(tmp_path / 'missing.csv'))

        assert exc.value.stage == 'forecast'
        assert isinstance(exc.value.cause, AeroCellIOException)
        assert str(exc.value).startswith('stage "forecast" failed')

    def test_unexpected_error_is_labelled(self, mocker):
        mocker.patch.object(self.planner, 'plan_transfer', side_effect=RuntimeError('boom'))
        with pytest.raises(PipelineStageException) as exc:
            self.planner.run_plan(self.users, self.trace)

        assert exc.value.stage == 'transfer'
        assert isinstance(exc.value.cause, RuntimeError)

    def test_time_budget_required(self):
        planner = AeroCellPlanner(self.planner.config.replace(time_budget=None))
        with pytest.raises(AeroCellValidationException):
            planner.run_plan(self.users, self.trace)

    def test_season_length_required(self, mocker):
        planner = AeroCellPlanner(self.planner.config.replace(season_length=None))
        place = mocker.spy(planner, 'place')
        with pytest.raises(AeroCellValidationException):
            planner.run_plan(self.users, self.trace)

        place.assert_not_called()

    def test_identical_demand_needs_no_moves(self, mocker):
        mocker.patch.object(self.planner, 'materialize', return_value=self.users)
        report = self.planner.run_plan(self.users, self.trace)

        assert report.place_t1['placement'] == report.place_t['placement']
        assert report.transfer['total_cost_m'] == 0.0
        assert report.transfer['max_move_m'] == 0.0
        assert report.transfer['retired'] == [] and report.transfer['launched'] == []
