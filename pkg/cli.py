# -*- coding: utf-8 -*-
"""
orba command line: run scenarios, reproduce bundled examples, serve reports

Exit codes: 0 every check passed, 1 a check failed or an operation raised,
2 the input was invalid. Reports go to stdout (or --out); logs go to stderr.
"""

import json
import logging
import os

import click

from config import Config
from database import init_db, save_report
from utils.errors import OrbaError, ScenarioError
from utils.logging_config import configure_root_logger
from web.report_generator import emit_report
from web.scenarios import describe_schema, list_examples, load_scenario_file, reproduce, run_batch, run_scenario

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


def report_options(func):
    """Options shared by every command that produces a report."""
    options = [
        click.option('--out', type=click.Path(dir_okay=False), help='Write the JSON report to this file.'),
        click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), help='Write ratio tables as CSV.'),
        click.option('--seed', type=int, default=None, help='Override the scenario seed.'),
        click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
                     help='Worker threads for independent scenarios and scans.'),
        click.option('--tol-lp', type=float, default=None, help='LP feasibility tolerance.'),
        click.option('--tol-num', type=float, default=None, help='Numerical comparison tolerance.'),
        click.option('--record', is_flag=True, help='Store the report in the sqlite history.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _finish(produce, out, csv_path, tol_lp, tol_num, record):
    """Run ``produce(tolerances)``, emit its report and exit with the stable code."""
    tolerances = {key: value for key, value in (('lp', tol_lp), ('num', tol_num)) if value is not None}
    try:
        report = produce(tolerances)
    except ScenarioError as exc:
        click.echo(f'invalid input: {exc.message}', err=True)
        raise SystemExit(EXIT_INVALID)
    except OrbaError as exc:
        logger.error('operation failed (%s): %s', exc.kind, exc.message)
        click.echo(json.dumps(exc.to_dict(), ensure_ascii=False, default=str))
        raise SystemExit(EXIT_FAILED)

    text = emit_report(report, out, csv_path)
    if not out:
        click.echo(text)
    if record:
        init_db()
        logger.info('report stored as %s', save_report(report))
    raise SystemExit(EXIT_OK if report['passed'] else EXIT_FAILED)


@click.group()
@click.option('--log-level', default=None, help='Logging level (default from LOGGING_LEVEL).')
@click.version_option('1.1.0', prog_name='orba')
def cli(log_level):
    """Ordered Banach spaces, Bochner integrals, covers and group convolution."""
    configure_root_logger(log_level or Config.LOGGING_LEVEL, log_dir=None)


@cli.command()
@click.argument('scenario_file', type=click.Path(dir_okay=False))
@report_options
def run(scenario_file, out, csv_path, seed, jobs, tol_lp, tol_num, record):
    """Run a scenario file (one scenario or {"scenarios": [...]})."""
    def produce(tolerances):
        scenarios, is_batch = load_scenario_file(scenario_file)
        if is_batch:
            return run_batch(scenarios, seed, jobs, tolerances)
        return run_scenario(scenarios[0], seed, jobs, tolerances)

    _finish(produce, out, csv_path, tol_lp, tol_num, record)


@cli.command('reproduce')
@click.argument('example_id')
@report_options
def reproduce_command(example_id, out, csv_path, seed, jobs, tol_lp, tol_num, record):
    """Run a bundled reproduction and compare against its expected values."""
    _finish(lambda tolerances: reproduce(example_id, seed, jobs, tolerances), out, csv_path, tol_lp, tol_num, record)


@cli.command('list-examples')
def list_examples_command():
    """List the bundled reproductions."""
    try:
        click.echo(json.dumps(list_examples(), ensure_ascii=False, indent=2))
    except ScenarioError as exc:
        click.echo(f'invalid input: {exc.message}', err=True)
        raise SystemExit(EXIT_INVALID)


@cli.command()
def schema():
    """Print the scenario schema and the operation registry."""
    click.echo(json.dumps(describe_schema(), ensure_ascii=False, indent=2))


def _read_json(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f'cannot read {path}: {exc}') from None


@cli.command()
@click.option('--group', 'group_kind', type=click.Choice(['z', 'zn']), default='z', show_default=True)
@click.option('--window', type=click.IntRange(min=1), default=64, show_default=True,
              help='Radius of the window [-window, window] on Z.')
@click.option('--order', type=click.IntRange(min=1), default=None, help='Order of Z/n.')
@click.option('--chain', type=click.Choice(['linear', 'dyadic']), default='linear', show_default=True)
@click.option('--mu', 'mu_path', required=True, type=click.Path(dir_okay=False), help='Measure JSON.')
@click.option('--f', 'f_path', required=True, type=click.Path(dir_okay=False), help='Function JSON.')
@click.option('--check-integral/--no-check-integral', default=True, show_default=True)
@report_options
def convolve(group_kind, window, order, chain, mu_path, f_path, check_integral,
             out, csv_path, seed, jobs, tol_lp, tol_num, record):
    """Convolve a finite measure with a function on Z or Z/n."""
    def produce(tolerances):
        if group_kind == 'zn':
            if order is None:
                raise ScenarioError('--order is required for --group zn')
            group = {'kind': 'zn', 'order': order}
        else:
            group = {'kind': 'z', 'radius': window, 'chain': chain}
        scenario = {
            'name': f'convolve-{os.path.basename(f_path)}',
            'operation': 'convolve',
            'inputs': {'group': group, 'mu': _read_json(mu_path), 'f': _read_json(f_path),
                       'check_integral': check_integral},
        }
        return run_scenario(scenario, seed, jobs, tolerances)

    _finish(produce, out, csv_path, tol_lp, tol_num, record)


@cli.command()
@click.option('--host', default='127.0.0.1', show_default=True)
@click.option('--port', type=int, default=lambda: int(os.environ.get('PORT', 5000)))
def serve(host, port):
    """Serve the report API with the Flask development server."""
    from app import create_app

    create_app().run(host=host, port=port)


if __name__ == '__main__':
    cli()
