"""
Command-line front door: `sfn-coverage <command> --scenario file.json [options]`.
"""
import argparse
import logging
import sys
from typing import List, Optional

from config.settings import EXIT_CODES
from models.errors import DomainError, Infeasible, NumericalInstability, ScenarioError
from ui.commands import COMMANDS, RunManifest
from utils.table_export import write_table

logger = logging.getLogger(__name__)

__all__ = ['main', 'build_parser']


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('--scenario', required=True, help='Scenario JSON file')
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help='Override a scenario value, e.g. interference.lambda_per_m2=1e-6 (repeatable)')
    parser.add_argument('--out', dest='output_path', help='CSV or .xlsx destination (default: stdout)')
    parser.add_argument('--lambdas', type=float, nargs='+', help='Interferer densities per m², one block each')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')


def _add_theta_grid(parser: argparse.ArgumentParser, prefix: str = 'theta-db'):
    parser.add_argument(f'--{prefix}', type=float, nargs='+', help='Explicit thresholds in dB')
    parser.add_argument(f'--{prefix}-min', type=float, help='Grid start in dB')
    parser.add_argument(f'--{prefix}-max', type=float, help='Grid end in dB (inclusive)')
    parser.add_argument(f'--{prefix}-step', type=float, help='Grid step in dB')


def _add_kappa_grid(parser: argparse.ArgumentParser):
    parser.add_argument('--kappa', type=float, nargs='+', help='Explicit target rates in bit/s')
    parser.add_argument('--kappa-min', type=float, help='Rate grid start in bit/s')
    parser.add_argument('--kappa-max', type=float, help='Rate grid end in bit/s')
    parser.add_argument('--kappa-steps', type=int, help='Number of rate grid points')


def _add_pa(parser: argparse.ArgumentParser, default_solver: str):
    parser.add_argument('--t-hat', type=float, help='Outage target in (0, 1]')
    parser.add_argument('--p-max-w', type=float, help='Per-station power cap in watts')
    parser.add_argument('--solver', choices=['bisect', 'evo'], default=default_solver)
    parser.add_argument('--budget', type=int, help='Evolutionary candidate evaluations')
    parser.add_argument('--seed', type=int, help='Evolutionary seed')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sfn-coverage',
        description='Outage and rate coverage of a single frequency network under PPP interference'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    outage = sub.add_parser('outage', help='Analytic outage probability over a threshold grid')
    _add_common(outage)
    _add_theta_grid(outage)

    rate = sub.add_parser('rate', help='Analytic rate coverage over a target-rate grid')
    _add_common(rate)
    _add_kappa_grid(rate)

    simulate = sub.add_parser('simulate', help='Monte Carlo outage or rate coverage')
    _add_common(simulate)
    _add_theta_grid(simulate)
    _add_kappa_grid(simulate)
    simulate.add_argument('--rate', action='store_true', help='Estimate rate coverage on the κ grid')
    simulate.add_argument('--trials', type=int, help='Realisations per density')
    simulate.add_argument('--seed', type=int, help='Simulation seed')
    simulate.add_argument('--radius-m', type=float, help='Interference field radius')
    simulate.add_argument('--epsilon', type=float, help='Truncation accuracy; sets the radius')
    simulate.add_argument('--workers', type=int, help='Worker processes')
    simulate.add_argument('--with-analytic', action='store_true',
                          help='Add the analytic value and the gap to every row')

    optimize = sub.add_parser('optimize', help='Minimum total power meeting an outage target')
    _add_common(optimize)
    optimize.add_argument('--theta-hat-db', type=float, help='SINR threshold in dB')
    _add_pa(optimize, 'evo')

    sweep = sub.add_parser('sweep', help='Power allocation over threshold and density grids')
    _add_common(sweep)
    _add_theta_grid(sweep, 'theta-hat-db')
    sweep.add_argument('--axis', choices=['theta', 'lambda'], default='theta',
                       help='Row ordering: θ̂ varies fastest (theta) or λ varies fastest (lambda)')
    _add_pa(sweep, 'bisect')
    return parser


def _manifest(args: argparse.Namespace) -> RunManifest:
    options = dict(vars(args))
    for name in ('command', 'scenario', 'overrides', 'output_path', 'seed', 'trials', 'verbose'):
        options.pop(name, None)
    if args.command == 'sweep':
        options['theta_hat_db_list'] = options.pop('theta_hat_db', None)
    return RunManifest(
        command=args.command,
        scenario_path=args.scenario,
        overrides=args.overrides,
        output_path=args.output_path,
        seed=getattr(args, 'seed', None),
        trials=getattr(args, 'trials', None),
        options=options
    )


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    manifest = _manifest(args)

    try:
        table = COMMANDS[manifest.command](manifest)
        write_table(table, manifest.output_path)
    except (ScenarioError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['CONFIG']
    except NumericalInstability as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['NUMERICAL']
    except Infeasible as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['INFEASIBLE']
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES['CONFIG']

    if manifest.command == 'optimize' and not table['feasible'].all():
        print("error: outage target unreachable even with every station at the power cap", file=sys.stderr)
        return EXIT_CODES['INFEASIBLE']
    return EXIT_CODES['OK']


if __name__ == '__main__':
    sys.exit(main())
