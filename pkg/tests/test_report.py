import json
import math
import os

import pytest

from aerocell import AeroCellIOException, AeroCellValidationException, ChannelParams, GroundUser
from aerocell.placement import FleetResult, assign_users, coverage_report
from aerocell.report import (
    cell_outline, dbs_dat, decomposition_csv, dumps, forecast_csv, holdout_csv, placement_section,
    read_json, rhombus_dat, summary_text, sweep_csv, sweep_rows, transfer_dat, users_dat,
    write_json, write_plot_data, write_text,
)


def section_for(positions, users, params):
    placement = assign_users(positions, users, 40.0, params)
    fleet = FleetResult(n_star=len(positions), placement=placement,
                        report=coverage_report(placement, users), below_target=False,
                        evaluations=3, max_drones=30)
    return placement_section(fleet, users, params)


class TestJson(object):

    def test_dumps_is_canonical(self):
        assert dumps({'b': 1, 'a': [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'

    def test_dumps_rejects_nan(self):
        with pytest.raises(ValueError):
            dumps({'a': float('nan')})

    def test_write_then_read(self, tmp_path):
        path = write_json(str(tmp_path / 'out.json'), {'n_star': 3})
        assert read_json(path) == {'n_star': 3}

    def test_read_invalid(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{')
        with pytest.raises(AeroCellValidationException):
            read_json(str(path))

    def test_read_missing(self, tmp_path):
        with pytest.raises(AeroCellIOException):
            read_json(str(tmp_path / 'missing.json'))

    def test_write_into_missing_directory(self, tmp_path):
        with pytest.raises(AeroCellIOException):
            write_text(str(tmp_path / 'no' / 'such' / 'file.dat'), 'x')


class TestCellOutline(object):

    def test_rhombus(self):
        outline = cell_outline((10.0, 20.0), 5.0, 'L1')

        assert outline == [[15.0, 20.0], [10.0, 25.0], [5.0, 20.0], [10.0, 15.0], [15.0, 20.0]]

    def test_circle(self):
        outline = cell_outline((0.0, 0.0), 5.0, 'L2')

        assert len(outline) == 33
        assert outline[0] == outline[-1]
        for x, y in outline:
            assert math.hypot(x, y) == pytest.approx(5.0)


class TestPlotData(object):

    def setup_method(self):
        self.params = ChannelParams.calibrated(50.0)
        self.users = [
            GroundUser(0, 50.0, 50.0, 1.0),
            GroundUser(1, 60.0, 60.0, 1.0),
            GroundUser(2, 200.0, 210.0, 2.0),
            GroundUser(3, 290.0, 390.0, 1.0),
        ]
        self.section = section_for([(50.0, 50.0), (200.0, 200.0)], self.users, self.params)

    def test_section(self):
        section = self.section

        assert section['placement']['assignment'] == [0, 0, 1, -1]
        assert section['coverage']['covered_count'] == 3
        assert section['coverage_radius_m'] == pytest.approx(50.0, abs=1e-6)
        assert section['horizontal_norm'] == 'L1'
        assert len(section['cells']) == 2
        assert [u['id'] for u in section['users']] == [0, 1, 2, 3]
        json.loads(dumps(section))

    def test_users_dat(self):
        lines = users_dat(self.section).splitlines()

        assert lines[0].startswith('#')
        assert lines[1] == '0 50.0 50.0 1.0 0'
        assert lines[4] == '3 290.0 390.0 1.0 -1'

    def test_dbs_dat(self):
        lines = dbs_dat(self.section).splitlines()

        assert lines[1:] == ['0 50.0 50.0 2.0 2', '1 200.0 200.0 2.0 1']

    def test_rhombus_dat_matches_cells(self):
        blocks = rhombus_dat(self.section).split('\n\n')

        assert len(blocks) == 2
        for block, cell in zip(blocks, self.section['cells']):
            rows = [line.split() for line in block.splitlines() if not line.startswith('#')]
            assert [[float(x), float(y)] for x, y in rows] == cell

    def test_transfer_dat(self):
        section_t1 = section_for([(60.0, 50.0)], self.users, self.params)
        transfer = {'matches': [[0, 0, 10.0]], 'retired': [1], 'launched': []}
        lines = transfer_dat(transfer, self.section, section_t1).splitlines()

        assert lines[1:] == ['50.0 50.0 10.0 0.0 10.0 0 0']

    def test_write_plot_data(self, tmp_path):
        written = write_plot_data(str(tmp_path), self.section, prefix='t_')

        assert sorted(os.path.basename(p) for p in written) == [
            't_dbs.dat', 't_rhombus.dat', 't_users.dat']
        with open(written[0], encoding='utf-8') as fp:
            assert fp.read() == users_dat(self.section)


class TestTables(object):

    def test_forecast_csv(self):
        text = forecast_csv([{'bs_id': 1, 'horizon': 1, 'raw': 3.6, 'count': 4}])
        assert text == 'bs_id,horizon,raw,count\n1,1,3.6,4\n'

    def test_holdout_csv(self):
        text = holdout_csv([{'bs_id': 2, 'index': 7, 'actual': 5.0, 'forecast': 4.5,
                             'error': 0.5}])
        assert text.splitlines() == ['bs_id,index,actual,forecast,error', '2,7,5.0,4.5,0.5']

    def test_decomposition_csv_blank_for_missing(self):
        text = decomposition_csv([{'bs_id': 1, 'index': 0, 'observed': 3.0, 'trend_cycle': None,
                                   'seasonal': 0.5, 'remainder': None, 'adjusted': 2.5}])
        assert text.splitlines()[1] == '1,0,3.0,,0.5,,2.5'


class TestSummary(object):

    def test_plan_summary(self):
        report = {
            'place_t': {'n_star': 3, 'below_target': False,
                        'coverage': {'covered_count': 12, 'total_users': 12,
                                     'coverage_fraction': 1.0, 'served_rate': 12.0}},
            'forecast': [{'bs_id': 1, 'horizon': 1, 'count': 4, 'raw': 4.0}],
            'transfer': {'matches': [[0, 0, 1.0]], 'total_cost_m': 1.0, 'max_move_m': 1.0,
                         'retired': [], 'launched': []},
        }
        lines = summary_text(report).splitlines()

        assert lines[0] == 't: 3 DBS serve 12/12 users (100.0%), sum rate 12.00 Mbit/s'
        assert lines[1] == 'BS 1 h=1: 4 users (4.0000)'
        assert lines[2].startswith('transfer: 1 moves')

    def test_place_summary_flags_below_target(self):
        report = {'placement': {}, 'n_star': 30, 'below_target': True,
                  'coverage': {'covered_count': 5, 'total_users': 10,
                               'coverage_fraction': 0.5, 'served_rate': 5.0}}
        assert summary_text(report).rstrip().endswith('[below target]')


class TestSweep(object):

    def setup_method(self):
        params = ChannelParams.calibrated(50.0)
        users = [GroundUser(0, 50.0, 50.0, 1.0), GroundUser(1, 290.0, 390.0, 1.0)]
        placement = assign_users([(50.0, 50.0)], users, 40.0, params)
        report = coverage_report(placement, users)
        self.results = {
            40.0: FleetResult(1, placement, report, True, 4, 30),
            10.0: FleetResult(2, placement, report, False, 5, 30),
        }

    def test_rows_in_capacity_order(self):
        rows = sweep_rows(self.results)

        assert [row['capacity'] for row in rows] == [10.0, 40.0]
        assert rows[1] == {'capacity': 40.0, 'n_star': 1, 'covered_count': 1,
                           'coverage_fraction': 0.5, 'served_rate': 1.0, 'below_target': True}

    def test_csv(self):
        lines = sweep_csv(sweep_rows(self.results)).splitlines()

        assert lines[0] == 'capacity,n_star,covered_count,coverage_fraction,served_rate,' \
            'below_target'
        assert lines[1] == '10.0,2,1,0.5,1.0,False'

    def test_summary(self):
        lines = summary_text({'sweep': sweep_rows(self.results)}).splitlines()

        assert lines == ['capacity 10: 2 DBS serve 1 users (50.0%)',
                         'capacity 40: 1 DBS serve 1 users (50.0%) [below target]']
