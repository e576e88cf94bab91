"""
Scenario inputs: base-station usage traces, user snapshots, the scenario
configuration and seeded user generation.

Generated users are portable across implementations. Every draw comes from
`numpy.random.Generator(numpy.random.PCG64(seed))`, reading only uniform
doubles through `Generator.random`, one row of doubles per user in user-id
order:

* `generate_users`: (u0, u1, u2) -> x = u0 * X, y = u1 * Y,
  bw = palette[floor(u2 * len(palette))]
* `generate_hotspot_users`: (u0, u1, u2, u3) -> hotspot = floor(u0 * H),
  radius = spread * sqrt(u1), angle = 2 * pi * u2, bw from u3
* `materialize_users`: (u0, u1, u2) -> radius = cell_radius * sqrt(u0),
  angle = 2 * pi * u1, bw from u2

Disc points are clipped to the region. Per-stage seeds derive from the run
seed through `child_seed`, a `numpy.random.SeedSequence` keyed by integers.
"""
import io
import json
import logging
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import pandas as pd

from .channel import ChannelParams, Norm, as_norm
from .exceptions import (
    AeroCellIOException, AeroCellValidationException, SeriesTooShortException,
    TraceFormatException,
)
from .forecast import DEFAULT_PARAMS, INIT_METHODS, SmoothingParams, UsageSeries
from .placement import MAX_DRONES_FORMULAS, GroundUser, Region


logger = logging.getLogger('aerocell.scenario')

TRACE_COLUMNS = ['timestamp', 'bs_id', 'x_m', 'y_m', 'online_users']
USER_COLUMNS = ['user_id', 'x_m', 'y_m', 'bw_mbps']
BW_PALETTE = (0.1, 0.5, 1.0, 1.5, 2.0)
CAPACITY_PALETTES = ((10.0, 20.0, 30.0, 40.0), (10.0, 20.0, 50.0, 100.0))
SOLVERS = ('auto', 'heuristic', 'exact')


@dataclass(frozen=True)
class BsRecord:
    bs_id: int
    x: float
    y: float
    timestamp: int
    online_users: float

    def __post_init__(self):
        if self.online_users < 0:
            raise AeroCellValidationException(
                'BS {0} reports negative online users at {1}'.format(self.bs_id, self.timestamp))


@dataclass
class ScenarioConfig:
    region: Region = field(default_factory=lambda: Region(300.0, 400.0, 50.0))
    channel: ChannelParams = field(default_factory=ChannelParams)
    capacity: float = 40.0
    capacity_palette: tuple = CAPACITY_PALETTES[0]
    bw_palette: tuple = BW_PALETTE
    seed: int = 0
    alpha: float = 0.9
    max_iter: int = 32
    speed: float = 10.0
    time_budget: float = None
    move_norm: Norm = Norm.L2
    season_length: int = None
    horizon: int = 1
    smoothing: SmoothingParams = DEFAULT_PARAMS
    fit_smoothing: bool = False
    hw_init: str = 'first-season'
    cell_radius: float = None
    user_count: int = 150
    max_drones_formula: str = 'product'
    solver: str = 'auto'
    exact_limit: int = 400
    max_swap_rounds: int = None

    def __post_init__(self):
        self.capacity_palette = tuple(float(v) for v in self.capacity_palette)
        self.bw_palette = tuple(float(v) for v in self.bw_palette)
        self.smoothing = SmoothingParams(*(float(v) for v in self.smoothing))
        self.move_norm = as_norm(self.move_norm)
        if self.channel.pl_threshold is None:
            self.channel = ChannelParams.calibrated(
                self.region.R, **{k: v for k, v in self.channel.to_dict().items()
                                  if k != 'pl_threshold'})
        self._validate()

    def _validate(self):
        checks = [
            (self.capacity > 0, 'capacity must be positive'),
            (all(v > 0 for v in self.capacity_palette),
             'capacity palette values must be positive'),
            (len(self.bw_palette) > 0 and all(v > 0 for v in self.bw_palette),
             'bandwidth palette values must be positive'),
            (0 <= self.seed < 2 ** 64, 'seed must be an unsigned 64-bit integer'),
            (0 < self.alpha <= 1, 'alpha must lie in (0, 1]'),
            (self.max_iter >= 1, 'max_iter must be >= 1'),
            (self.speed > 0, 'speed must be positive'),
            (self.time_budget is None or self.time_budget > 0, 'time_budget must be positive'),
            (self.season_length is None or self.season_length >= 1, 'season_length must be >= 1'),
            (self.horizon >= 1, 'horizon must be >= 1'),
            (all(0 <= p <= 1 for p in self.smoothing), 'smoothing weights must lie in [0, 1]'),
            (self.hw_init in INIT_METHODS, 'hw_init must be one of {0}'.format(INIT_METHODS)),
            (self.cell_radius is None or self.cell_radius > 0, 'cell_radius must be positive'),
            (self.user_count >= 0, 'user_count must be >= 0'),
            (self.max_drones_formula in MAX_DRONES_FORMULAS,
             'max_drones_formula must be one of {0}'.format(MAX_DRONES_FORMULAS)),
            (self.solver in SOLVERS, 'solver must be one of {0}'.format(SOLVERS)),
            (self.exact_limit >= 0, 'exact_limit must be >= 0'),
            (self.max_swap_rounds is None or self.max_swap_rounds >= 0,
             'max_swap_rounds must be >= 0'),
        ]
        for ok, message in checks:
            if not ok:
                raise AeroCellValidationException('Invalid scenario config: {0}'.format(message))

    @property
    def effective_cell_radius(self):
        return self.cell_radius if self.cell_radius is not None else self.region.R

    @property
    def solve_options(self):
        return {
            'solver': self.solver,
            'exact_limit': self.exact_limit,
            'max_swap_rounds': self.max_swap_rounds,
            'max_drones_formula': self.max_drones_formula,
        }

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data['region'] = dict(self.region.to_dict(), H=self.channel.h)
        data['channel'] = self.channel.to_dict()
        data['capacity_palette'] = list(self.capacity_palette)
        data['bw_palette'] = list(self.bw_palette)
        data['smoothing'] = list(self.smoothing)
        data['move_norm'] = self.move_norm.value
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise AeroCellValidationException(
                'Unknown config keys: {0}'.format(', '.join(unknown)))

        region = dict(data.pop('region', {}))
        channel = dict(data.pop('channel', {}))
        altitude = region.pop('H', None)
        if altitude is not None:
            channel.setdefault('h', altitude)
        try:
            region = Region(**dict(asdict(Region(300.0, 400.0, 50.0)), **region))
            channel = ChannelParams(**channel)
            return cls(region=region, channel=channel, **data)
        except TypeError as exc:
            raise AeroCellValidationException('Invalid scenario config: {0}'.format(exc))


def load_config(path):
    try:
        with open(path, encoding='utf-8') as fp:
            data = json.load(fp)
    except OSError as exc:
        raise AeroCellIOException('Cannot read config {0}: {1}'.format(path, exc))
    except ValueError as exc:
        raise AeroCellValidationException('Invalid JSON in config {0}: {1}'.format(path, exc))
    if not isinstance(data, dict):
        raise AeroCellValidationException('Config {0} must hold a JSON object'.format(path))
    return ScenarioConfig.from_dict(data)


def _read_table(stream, columns):
    try:
        frame = pd.read_csv(stream, dtype=str, keep_default_na=False,
                            skip_blank_lines=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise TraceFormatException(1, 'missing header')
    except pd.errors.ParserError as exc:
        match = re.search(r'line (\d+)', str(exc))
        raise TraceFormatException(int(match.group(1)) if match else 1,
                                   'unparseable CSV: {0}'.format(exc))

    if list(frame.columns) != columns:
        raise TraceFormatException(
            1, 'expected header {0}, got {1}'.format(','.join(columns), ','.join(frame.columns)))
    # header is line 1
    return enumerate(frame.itertuples(index=False, name=None), start=2)


def _field(line, name, value, kind):
    if not isinstance(value, str) or not value.strip():
        raise TraceFormatException(line, 'missing {0}'.format(name))
    try:
        parsed = kind(value.strip())
    except ValueError:
        raise TraceFormatException(line, 'invalid {0}: {1!r}'.format(name, value))
    if kind is float and not math.isfinite(parsed):
        raise TraceFormatException(line, 'non-finite {0}: {1!r}'.format(name, value))
    return parsed


def parse_trace(stream, region=None):
    """
    Validated `BsRecord`s ordered by base station then timestamp.

    ```python
    with open('trace.csv', encoding='utf-8') as fp:
        records = parse_trace(fp)
    ```
    """
    records = {}
    for line, row in _read_table(stream, TRACE_COLUMNS):
        timestamp = _field(line, 'timestamp', row[0], int)
        bs_id = _field(line, 'bs_id', row[1], int)
        x = _field(line, 'x_m', row[2], float)
        y = _field(line, 'y_m', row[3], float)
        online = _field(line, 'online_users', row[4], float)
        if online < 0:
            raise TraceFormatException(line, 'negative online_users: {0}'.format(row[4]))
        if region is not None and not region.contains(x, y):
            raise TraceFormatException(line, 'BS {0} lies outside the region'.format(bs_id))
        key = (bs_id, timestamp)
        if key in records:
            raise TraceFormatException(
                line, 'duplicate sample for BS {0} at {1}'.format(bs_id, timestamp))
        records[key] = BsRecord(bs_id, x, y, timestamp, online)

    logger.debug('Parsed {0} trace records'.format(len(records)))
    return [records[key] for key in sorted(records)]


def serialize_trace(records):
    ordered = sorted(records, key=lambda r: (r.bs_id, r.timestamp))
    frame = pd.DataFrame(
        [(r.timestamp, r.bs_id, float(r.x), float(r.y), float(r.online_users)) for r in ordered],
        columns=TRACE_COLUMNS,
    )
    return frame.to_csv(index=False, lineterminator='\n')


def _read_text(path, kind):
    try:
        with open(path, 'rb') as fp:
            data = fp.read()
    except OSError as exc:
        raise AeroCellIOException('Cannot read {0} {1}: {2}'.format(kind, path, exc))
    try:
        return io.StringIO(data.decode('utf-8'), newline=None)
    except UnicodeDecodeError as exc:
        raise TraceFormatException(data[:exc.start].count(b'\n') + 1,
                                   'invalid UTF-8 byte at offset {0}'.format(exc.start))


def load_trace(path, region=None):
    return parse_trace(_read_text(path, 'trace'), region)


def station_ids(records):
    return sorted({r.bs_id for r in records})


def latest_record(records, bs_id):
    """Most recent sample of a base station (its position and last count)."""
    samples = [r for r in records if r.bs_id == bs_id]
    if not samples:
        raise AeroCellValidationException('No samples for BS {0}'.format(bs_id))
    return max(samples, key=lambda r: r.timestamp)


def series_from_trace(records, bs_id, season_length):
    samples = sorted((r for r in records if r.bs_id == bs_id), key=lambda r: r.timestamp)
    if len(samples) < 2 * season_length:
        raise SeriesTooShortException(
            'BS {0}: {1} samples, {2} needed for two seasons'.format(
                bs_id, len(samples), 2 * season_length))
    return UsageSeries(
        bs_id=bs_id,
        values=tuple(r.online_users for r in samples),
        season_length=season_length,
        timestamps=tuple(r.timestamp for r in samples),
    )


def parse_users(stream, region=None):
    users = {}
    for line, row in _read_table(stream, USER_COLUMNS):
        user_id = _field(line, 'user_id', row[0], int)
        x = _field(line, 'x_m', row[1], float)
        y = _field(line, 'y_m', row[2], float)
        bw = _field(line, 'bw_mbps', row[3], float)
        if not bw > 0:
            raise TraceFormatException(line, 'bandwidth must be positive: {0}'.format(row[3]))
        if region is not None and not region.contains(x, y):
            raise TraceFormatException(line, 'user {0} lies outside the region'.format(user_id))
        if user_id in users:
            raise TraceFormatException(line, 'duplicate user_id {0}'.format(user_id))
        users[user_id] = GroundUser(user_id, x, y, bw)
    return [users[key] for key in sorted(users)]


def serialize_users(users):
    frame = pd.DataFrame(
        [(u.id, float(u.x), float(u.y), float(u.bw)) for u in sorted(users, key=lambda u: u.id)],
        columns=USER_COLUMNS,
    )
    return frame.to_csv(index=False, lineterminator='\n')


def load_users(path, region=None):
    return parse_users(_read_text(path, 'users'), region)


def save_users(users, path):
    try:
        with io.open(path, 'w', encoding='utf-8', newline='') as fp:
            fp.write(serialize_users(users))
    except OSError as exc:
        raise AeroCellIOException('Cannot write users {0}: {1}'.format(path, exc))


def child_seed(seed, *keys):
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _generator(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _pick(palette, u):
    return palette[min(int(u * len(palette)), len(palette) - 1)]


def generate_users(config, count, seed=None):
    """Users spread uniformly over the region with bandwidth drawn from the palette."""
    if count < 0:
        raise AeroCellValidationException('User count must be >= 0, got {0}'.format(count))
    seed = config.seed if seed is None else seed
    draws = _generator(seed).random((count, 3))
    region = config.region
    return [
        GroundUser(k, float(u0 * region.X), float(u1 * region.Y), _pick(config.bw_palette, u2))
        for k, (u0, u1, u2) in enumerate(draws.tolist())
    ]


def _disc_point(region, cx, cy, radius, angle):
    x = min(max(cx + radius * math.cos(angle), 0.0), region.X)
    y = min(max(cy + radius * math.sin(angle), 0.0), region.Y)
    return x, y


def generate_hotspot_users(config, count, hotspots, spread, seed=None):
    """Users scattered in discs of radius `spread` around hotspot centres."""
    if count < 0:
        raise AeroCellValidationException('User count must be >= 0, got {0}'.format(count))
    if not hotspots:
        raise AeroCellValidationException('At least one hotspot is required')
    seed = config.seed if seed is None else seed
    draws = _generator(seed).random((count, 4))
    users = []
    for k, (u0, u1, u2, u3) in enumerate(draws.tolist()):
        cx, cy = hotspots[min(int(u0 * len(hotspots)), len(hotspots) - 1)]
        x, y = _disc_point(config.region, cx, cy, spread * math.sqrt(u1), 2 * math.pi * u2)
        users.append(GroundUser(k, x, y, _pick(config.bw_palette, u3)))
    return users


def materialize_users(bs, predicted_count, cell_radius, seed, config, first_id=0):
    """Place `predicted_count` users uniformly in the disc around a base station."""
    if predicted_count < 0:
        raise AeroCellValidationException(
            'Predicted count must be >= 0, got {0}'.format(predicted_count))
    draws = _generator(seed).random((predicted_count, 3))
    users = []
    for k, (u0, u1, u2) in enumerate(draws.tolist()):
        x, y = _disc_point(config.region, bs.x, bs.y, cell_radius * math.sqrt(u0),
                           2 * math.pi * u1)
        users.append(GroundUser(first_id + k, x, y, _pick(config.bw_palette, u2)))
    return users
