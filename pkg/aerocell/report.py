"""
Report emitters: canonical JSON, whitespace-delimited plot data and CSV
tables.

Plot data is built only from report dictionaries. Every coordinate in a
`.dat` file is already present in the JSON it was derived from.
"""
import io
import json
import logging
import math
import os

import pandas as pd

from .channel import Norm, coverage_radius
from .exceptions import AeroCellIOException, AeroCellValidationException


logger = logging.getLogger('aerocell.report')

CIRCLE_VERTICES = 32
FORECAST_COLUMNS = ['bs_id', 'horizon', 'raw', 'count']
HOLDOUT_COLUMNS = ['bs_id', 'index', 'actual', 'forecast', 'error']
DECOMPOSITION_COLUMNS = ['bs_id', 'index', 'observed', 'trend_cycle', 'seasonal', 'remainder',
                         'adjusted']
SWEEP_COLUMNS = ['capacity', 'n_star', 'covered_count', 'coverage_fraction', 'served_rate',
                 'below_target']


def dumps(data):
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_text(path, text):
    try:
        with io.open(path, 'w', encoding='utf-8', newline='\n') as fp:
            fp.write(text)
    except OSError as exc:
        raise AeroCellIOException('Cannot write {0}: {1}'.format(path, exc))
    logger.debug('Wrote {0}'.format(path))
    return path


def write_json(path, data):
    return write_text(path, dumps(data))


def read_json(path):
    try:
        with open(path, encoding='utf-8') as fp:
            return json.load(fp)
    except OSError as exc:
        raise AeroCellIOException('Cannot read {0}: {1}'.format(path, exc))
    except ValueError as exc:
        raise AeroCellValidationException('Invalid JSON in {0}: {1}'.format(path, exc))


def cell_outline(center, radius, norm):
    """Closed outline of a coverage cell: a rhombus under L1, a polygon under L2."""
    x, y = (float(v) for v in center)
    if Norm(norm) is Norm.L1:
        corners = [(x + radius, y), (x, y + radius), (x - radius, y), (x, y - radius)]
    else:
        corners = [
            (x + radius * math.cos(2 * math.pi * k / CIRCLE_VERTICES),
             y + radius * math.sin(2 * math.pi * k / CIRCLE_VERTICES))
            for k in range(CIRCLE_VERTICES)
        ]
    return [[cx, cy] for cx, cy in corners + corners[:1]]


def placement_section(fleet, users, params):
    """Report dictionary of one planning round."""
    placement = fleet.placement
    radius = coverage_radius(params)
    return {
        'n_star': fleet.n_star,
        'max_drones': fleet.max_drones,
        'below_target': fleet.below_target,
        'evaluations': fleet.evaluations,
        'placement': placement.to_dict(),
        'coverage': fleet.report.to_dict(),
        'users': [u.to_dict() for u in sorted(users, key=lambda u: u.id)],
        'coverage_radius_m': radius,
        'horizontal_norm': params.horizontal_norm.value,
        'cells': [cell_outline(p, radius, params.horizontal_norm) for p in placement.positions],
    }


def sweep_rows(results):
    """One row per DBS capacity of a `capacity_sweep` result."""
    rows = []
    for capacity in sorted(results):
        fleet = results[capacity]
        coverage = fleet.report
        rows.append({
            'capacity': capacity,
            'n_star': fleet.n_star,
            'covered_count': coverage.covered_count,
            'coverage_fraction': coverage.coverage_fraction,
            'served_rate': coverage.served_rate,
            'below_target': fleet.below_target,
        })
    return rows


def _line(*values):
    return ' '.join(repr(v) if isinstance(v, float) else str(v) for v in values) + '\n'


def users_dat(section):
    assignment = section['placement']['assignment']
    lines = ['# id x y bw dbs\n']
    for user, dbs in zip(section['users'], assignment):
        lines.append(_line(user['id'], float(user['x']), float(user['y']), float(user['bw']), dbs))
    return ''.join(lines)


def dbs_dat(section):
    loads = section['coverage']['per_dbs_load']
    assignment = section['placement']['assignment']
    lines = ['# index x y load users\n']
    for k, (position, load) in enumerate(zip(section['placement']['positions'], loads)):
        served = sum(1 for owner in assignment if owner == k)
        lines.append(_line(k, float(position[0]), float(position[1]), float(load), served))
    return ''.join(lines)


def rhombus_dat(section):
    # one block per DBS, blank line between blocks
    blocks = []
    for k, outline in enumerate(section['cells']):
        rows = ['# dbs {0}\n'.format(k)]
        rows.extend(_line(float(x), float(y)) for x, y in outline)
        blocks.append(''.join(rows))
    return '\n'.join(blocks)


def transfer_dat(transfer, section_t, section_t1):
    sources = section_t['placement']['positions']
    targets = section_t1['placement']['positions']
    lines = ['# x y dx dy distance source target\n']
    for i, j, distance in transfer['matches']:
        x0, y0 = sources[i]
        x1, y1 = targets[j]
        lines.append(_line(float(x0), float(y0), float(x1 - x0), float(y1 - y0), float(distance),
                           i, j))
    return ''.join(lines)


def write_plot_data(out_dir, section, prefix=''):
    written = []
    for name, render in (('users', users_dat), ('dbs', dbs_dat), ('rhombus', rhombus_dat)):
        path = os.path.join(out_dir, '{0}{1}.dat'.format(prefix, name))
        written.append(write_text(path, render(section)))
    return written


def _csv(rows, columns):
    return pd.DataFrame(rows, columns=columns).to_csv(index=False, lineterminator='\n')


def forecast_csv(rows):
    return _csv([[row[c] for c in FORECAST_COLUMNS] for row in rows], FORECAST_COLUMNS)


def holdout_csv(rows):
    return _csv([[row[c] for c in HOLDOUT_COLUMNS] for row in rows], HOLDOUT_COLUMNS)


def decomposition_csv(rows):
    return _csv([[row[c] for c in DECOMPOSITION_COLUMNS] for row in rows], DECOMPOSITION_COLUMNS)


def sweep_csv(rows):
    return _csv([[row[c] for c in SWEEP_COLUMNS] for row in rows], SWEEP_COLUMNS)


def summary_text(report):
    """Human readable digest of a place or plan report."""
    lines = []
    rounds = [('t', report.get('place_t')), ('t+1', report.get('place_t1'))]
    if 'placement' in report:
        rounds = [('t', report)]
    for label, section in rounds:
        if not section:
            continue
        coverage = section['coverage']
        lines.append(
            '{0}: {1} DBS serve {2}/{3} users ({4:.1%}), sum rate {5:.2f} Mbit/s{6}'.format(
                label, section['n_star'], coverage['covered_count'], coverage['total_users'],
                coverage['coverage_fraction'], coverage['served_rate'],
                ' [below target]' if section['below_target'] else ''))
    for row in report.get('sweep', []):
        lines.append('capacity {0:g}: {1} DBS serve {2} users ({3:.1%}){4}'.format(
            row['capacity'], row['n_star'], row['covered_count'], row['coverage_fraction'],
            ' [below target]' if row['below_target'] else ''))
    for row in report.get('forecast', []):
        lines.append('BS {0} h={1}: {2} users ({3:.4f})'.format(
            row['bs_id'], row['horizon'], row['count'], row['raw']))
    transfer = report.get('transfer')
    if transfer:
        lines.append('transfer: {0} moves, {1:.2f} m total, {2:.2f} m max, {3} retired, '
                     '{4} launched'.format(len(transfer['matches']), transfer['total_cost_m'],
                                           transfer['max_move_m'], len(transfer['retired']),
                                           len(transfer['launched'])))
    return '\n'.join(lines) + '\n'
