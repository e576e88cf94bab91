"""
Command line entry point.

    aerocell generate --seed 7 --count 200 --hotspot 60,80 --hotspot 150,220 --out data/
    aerocell place --config scenario.json --users users_t.csv --auto --out out/
    aerocell place --config scenario.json --users users_t.csv --sweep --out sweep/
    aerocell forecast --trace trace.csv --bs 3 --season 55 --horizon 2
    aerocell plan --config scenario.json --users users_t.csv --trace trace.csv --out out/
    aerocell report out/report.json --out plots/

Exit status: 0 ok, 1 validation, 2 I/O, 3 internal error. Verbosity comes
from the AEROCELL_LOG environment variable.
"""
import argparse
import logging
import os
import sys
import time

from .exceptions import (
    AeroCellException, AeroCellIOException, AeroCellValidationException, PipelineStageException,
)
from .planner import AeroCellPlanner
from .report import (
    decomposition_csv, dumps, forecast_csv, holdout_csv, placement_section, read_json,
    summary_text, sweep_csv, sweep_rows, transfer_dat, write_json, write_plot_data, write_text,
)
from .scenario import ScenarioConfig, child_seed, generate_hotspot_users, load_config, save_users


logger = logging.getLogger('aerocell.cli')

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, '{0}: error: {1}\n'.format(self.prog, message))


def _positive_int(value):
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError('expected an integer, got {0!r}'.format(value))
    if number < 1:
        raise argparse.ArgumentTypeError('must be >= 1, got {0}'.format(number))
    return number


def _point(value):
    try:
        x, y = (float(v) for v in value.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError('expected x,y in metres, got {0!r}'.format(value))
    return x, y


def _positive_float(value):
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError('expected a number, got {0!r}'.format(value))
    if not number > 0:
        raise argparse.ArgumentTypeError('must be positive, got {0}'.format(value))
    return number


def _seed(value):
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError('expected an integer, got {0!r}'.format(value))
    if not 0 <= number < 2 ** 64:
        raise argparse.ArgumentTypeError('seed must be an unsigned 64-bit integer')
    return number


def _common(parser):
    parser.add_argument('--config', help='scenario config JSON')
    parser.add_argument('--seed', type=_seed, help='run seed, overrides the config')
    parser.add_argument('--out', help='output directory')


def _fleet(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--n', type=_positive_int, help='fixed fleet size')
    group.add_argument('--auto', action='store_true', help='search the smallest fleet (default)')
    parser.add_argument('--alpha', type=float, help='coverage target in (0, 1]')
    return group


def _forecasting(parser):
    parser.add_argument('--season', type=_positive_int, help='samples per season')
    parser.add_argument('--horizon', type=_positive_int, help='forecast horizon')


def build_parser():
    parser = _Parser(prog='aerocell', description='Drone base station planning')
    commands = parser.add_subparsers(dest='command', metavar='command', parser_class=_Parser)
    commands.required = True

    generate = commands.add_parser('generate', help='write a seeded user snapshot CSV')
    _common(generate)
    generate.add_argument('--count', type=int, help='number of users, defaults to user_count')
    generate.add_argument('--hotspot', type=_point, action='append',
                          help='x,y centre of a user hotspot (repeatable)')
    generate.add_argument('--spread', type=_positive_float, default=10.0,
                          help='hotspot radius in metres')

    place = commands.add_parser('place', help='place DBS for a user snapshot')
    _common(place)
    _fleet(place).add_argument('--sweep', action='store_true',
                               help='smallest fleet for every capacity of the palette')
    place.add_argument('--users', help='user snapshot CSV; generated from the seed if omitted')

    forecast = commands.add_parser('forecast', help='forecast online users per base station')
    _common(forecast)
    _forecasting(forecast)
    forecast.add_argument('--trace', required=True, help='trace CSV path or URL')
    forecast.add_argument('--bs', type=int, action='append', help='base station id (repeatable)')
    forecast.add_argument('--format', choices=('json', 'csv'), default='json')
    forecast.add_argument('--holdout', type=_positive_int,
                          help='also forecast the last K samples from the rest')
    forecast.add_argument('--decompose', action='store_true',
                          help='also emit the additive decomposition')

    plan = commands.add_parser('plan', help='run the whole planning pipeline')
    _common(plan)
    _fleet(plan)
    _forecasting(plan)
    plan.add_argument('--users', help='user snapshot CSV at t; generated if omitted')
    plan.add_argument('--trace', required=True, help='trace CSV path or URL')

    report = commands.add_parser('report', help='plot data and summary of a report JSON')
    report.add_argument('report', help='report JSON written by place or plan')
    report.add_argument('--out', help='output directory, defaults to the report directory')
    return parser


def configure_logging():
    level = os.environ.get('AEROCELL_LOG', 'WARNING').upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    root = logging.getLogger('aerocell')
    root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.WARNING))
    return handler


def _config(args):
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    for flag, name in (('seed', 'seed'), ('alpha', 'alpha'), ('season', 'season_length'),
                       ('horizon', 'horizon')):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    return config.replace(**overrides) if overrides else config


def _out_dir(path):
    path = path or os.curdir
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise AeroCellIOException('Cannot create output directory {0}: {1}'.format(path, exc))
    return path


def _users(planner, args, key):
    if args.users:
        return planner.load_users(args.users)
    return planner.generate_users(seed=child_seed(planner.config.seed, key))


def _remove(paths):
    for path in paths:
        try:
            os.remove(path)
        except OSError:
            logger.warning('Could not remove partial output {0}'.format(path))


def cmd_generate(args):
    planner = AeroCellPlanner(_config(args))
    config = planner.config
    count = config.user_count if args.count is None else args.count
    # same stream as `place` and `plan` use when --users is omitted
    seed = child_seed(config.seed, 0)
    if args.hotspot:
        users = generate_hotspot_users(config, count, args.hotspot, args.spread, seed=seed)
    else:
        users = planner.generate_users(count, seed=seed)

    path = os.path.join(_out_dir(args.out), 'users.csv')
    save_users(users, path)
    sys.stdout.write('{0} users written to {1}\n'.format(len(users), path))
    return EXIT_OK


def _sweep(planner, users, out):
    rows = sweep_rows(planner.sweep(users))
    data = {'sweep': rows, 'config': planner.config.to_dict()}
    written = []
    try:
        written.append(write_json(os.path.join(out, 'sweep.json'), data))
        written.append(write_text(os.path.join(out, 'sweep.csv'), sweep_csv(rows)))
    except AeroCellException:
        _remove(written)
        raise
    sys.stdout.write(summary_text(data))
    return EXIT_OK


def cmd_place(args):
    planner = AeroCellPlanner(_config(args))
    users = _users(planner, args, 0)
    if args.sweep:
        return _sweep(planner, users, _out_dir(args.out))
    fleet = planner.place(users, args.n)
    section = placement_section(fleet, users, planner.config.channel)
    section['config'] = planner.config.to_dict()

    out = _out_dir(args.out)
    written = []
    try:
        written.append(write_json(os.path.join(out, 'placement.json'), section))
        written.extend(write_plot_data(out, section))
    except AeroCellException:
        _remove(written)
        raise
    sys.stdout.write(summary_text(section))
    return EXIT_OK


def cmd_forecast(args):
    planner = AeroCellPlanner(_config(args))
    records = planner.load_trace(args.trace)
    rows = planner.forecast_demand(records, args.bs)
    extras = {}
    if args.holdout or args.decompose:
        bs_ids = sorted({row['bs_id'] for row in rows})
        series = [planner.station_series(records, bs_id) for bs_id in bs_ids]
        if args.holdout:
            extras['holdout'] = [r for s in series for r in planner.holdout_table(s, args.holdout)]
        if args.decompose:
            extras['decomposition'] = [r for s in series for r in planner.decomposition_table(s)]

    if args.format == 'csv':
        outputs = {'forecast.csv': forecast_csv(rows)}
        if 'holdout' in extras:
            outputs['holdout.csv'] = holdout_csv(extras['holdout'])
        if 'decomposition' in extras:
            outputs['decomposition.csv'] = decomposition_csv(extras['decomposition'])
    else:
        outputs = {'forecast.json': dumps(dict(extras, forecast=rows,
                                               config=planner.config.to_dict()))}

    if not args.out:
        for text in outputs.values():
            sys.stdout.write(text)
        return EXIT_OK

    out = _out_dir(args.out)
    written = []
    try:
        for name in sorted(outputs):
            written.append(write_text(os.path.join(out, name), outputs[name]))
    except AeroCellException:
        _remove(written)
        raise
    return EXIT_OK


def cmd_plan(args):
    planner = AeroCellPlanner(_config(args))
    out = _out_dir(args.out)
    try:
        users = _users(planner, args, 0)
    except AeroCellException as exc:
        raise PipelineStageException('place_t', exc)
    report = planner.run_plan(users, args.trace, n_t=args.n, n_t1=args.n)

    written = []
    started = time.perf_counter()
    try:
        data = report.to_dict()
        written.append(write_json(os.path.join(out, 'report.json'), data))
        written.extend(write_plot_data(out, data['place_t'], prefix='t_'))
        written.extend(write_plot_data(out, data['place_t1'], prefix='t1_'))
        written.append(write_text(
            os.path.join(out, 'transfer.dat'),
            transfer_dat(data['transfer'], data['place_t'], data['place_t1'])))
        timings = dict(report.timings, write=time.perf_counter() - started)
        written.append(write_json(os.path.join(out, 'timings.json'), timings))
    except Exception as exc:
        _remove(written)
        raise PipelineStageException('write', exc)

    sys.stdout.write(summary_text(data))
    return EXIT_OK


def cmd_report(args):
    data = read_json(args.report)
    out = _out_dir(args.out or os.path.dirname(os.path.abspath(args.report)))
    written = []
    try:
        if 'place_t' in data:
            written.extend(write_plot_data(out, data['place_t'], prefix='t_'))
            written.extend(write_plot_data(out, data['place_t1'], prefix='t1_'))
            written.append(write_text(
                os.path.join(out, 'transfer.dat'),
                transfer_dat(data['transfer'], data['place_t'], data['place_t1'])))
        elif 'placement' in data:
            written.extend(write_plot_data(out, data))
        elif 'sweep' in data:
            logger.info('{0} holds a capacity sweep, no plot data to write'.format(args.report))
        else:
            raise AeroCellValidationException(
                '{0} is not a recognised report'.format(args.report))
    except (AeroCellException, KeyError) as exc:
        _remove(written)
        if isinstance(exc, KeyError):
            raise AeroCellValidationException('Incomplete report, missing {0}'.format(exc))
        raise
    sys.stdout.write(summary_text(data))
    return EXIT_OK


COMMANDS = {
    'generate': cmd_generate,
    'place': cmd_place,
    'forecast': cmd_forecast,
    'plan': cmd_plan,
    'report': cmd_report,
}


def exit_code(exc):
    if isinstance(exc, PipelineStageException):
        exc = exc.cause
    if isinstance(exc, AeroCellValidationException):
        return EXIT_VALIDATION
    if isinstance(exc, (AeroCellIOException, OSError)):
        return EXIT_IO
    return EXIT_INTERNAL


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = configure_logging()
    try:
        return COMMANDS[args.command](args)
    except AeroCellException as exc:
        sys.stderr.write('aerocell: {0}\n'.format(exc))
        return exit_code(exc)
    except Exception as exc:
        logger.exception('Unexpected failure')
        sys.stderr.write('aerocell: internal error: {0}\n'.format(exc))
        return EXIT_INTERNAL
    finally:
        logging.getLogger('aerocell').removeHandler(handler)
