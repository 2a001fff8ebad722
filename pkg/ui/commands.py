import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from config.settings import CSV_COLUMNS, GRID_CONFIG, PA_CONFIG, get_default_lambdas, get_theta_grid_db
from models.analytic import outage_probability, rate_coverage
from models.errors import DomainError, Infeasible
from models.montecarlo import (
    SimConfig,
    choose_radius,
    implied_epsilon,
    outage_from_samples,
    rate_coverage_from_samples,
    simulate_sinr
)
from models.optimizer import (
    PaProblem,
    PaSolution,
    PaSweepRow,
    solve_evolutionary,
    solve_uniform_bisection,
    sweep_pa
)
from models.scenario import Scenario
from utils.scenario_io import load_scenario
from utils.units import db_to_linear, linear_to_db, rate_to_sinr_threshold

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """
    Everything one command invocation needs.

    Attributes:
        command (str): outage, rate, simulate, optimize or sweep
        scenario_path (str): Scenario JSON file
        overrides (list): `key=value` overrides applied to the loaded scenario
        output_path (str): CSV/xlsx destination, stdout when None
        seed (int): Simulation or evolutionary seed
        trials (int): Monte Carlo trials
        options (dict): Command-specific flags
    """
    command: str
    scenario_path: str
    overrides: List[str] = field(default_factory=list)
    output_path: Optional[str] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    options: dict = field(default_factory=dict)

    def load(self) -> Scenario:
        return load_scenario(self.scenario_path, self.overrides)

    def option(self, name: str, default=None):
        value = self.options.get(name)
        return default if value is None else value


def _theta_grid_db(manifest: RunManifest) -> np.ndarray:
    explicit = manifest.option('theta_db')
    if explicit:
        return np.array(explicit, dtype=float)
    return get_theta_grid_db(
        manifest.option('theta_db_min', GRID_CONFIG['THETA_DB_MIN']),
        manifest.option('theta_db_max', GRID_CONFIG['THETA_DB_MAX']),
        manifest.option('theta_db_step', GRID_CONFIG['THETA_DB_STEP']))


def _kappa_grid(manifest: RunManifest) -> np.ndarray:
    explicit = manifest.option('kappa')
    if explicit:
        return np.array(explicit, dtype=float)
    steps = int(manifest.option('kappa_steps', GRID_CONFIG['KAPPA_STEPS']))
    if steps < 1:
        raise DomainError(f"kappa-steps must be >= 1, got {steps}")
    return np.linspace(manifest.option('kappa_min', GRID_CONFIG['KAPPA_MIN']),
                       manifest.option('kappa_max', GRID_CONFIG['KAPPA_MAX']), steps)


def _lambdas(manifest: RunManifest, scenario: Scenario) -> list:
    return list(manifest.option('lambdas') or [scenario.interference.lambda_i])


def cmd_outage(manifest: RunManifest) -> pd.DataFrame:
    """Analytic P_T over a θ grid, one block of rows per interferer density."""
    scenario = manifest.load()
    rows = []
    for lambda_i in _lambdas(manifest, scenario):
        point = scenario.with_lambda(lambda_i)
        for theta_db in _theta_grid_db(manifest):
            result = outage_probability(point, db_to_linear(theta_db))
            rows.append({
                'lambda_per_m2': lambda_i,
                'theta_db': float(theta_db),
                'p_t_analytic': result.probability,
                'branch': result.branch.value
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS['outage'])


def cmd_rate(manifest: RunManifest) -> pd.DataFrame:
    """Analytic rate coverage over a κ grid."""
    scenario = manifest.load()
    rows = []
    for lambda_i in _lambdas(manifest, scenario):
        point = scenario.with_lambda(lambda_i)
        for kappa in _kappa_grid(manifest):
            rows.append({
                'lambda_per_m2': lambda_i,
                'kappa_bps': float(kappa),
                'theta_linear': rate_to_sinr_threshold(kappa, point.bandwidth_hz, point.rate_h, point.rate_j),
                'r_c_analytic': rate_coverage(point, float(kappa))
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS['rate'])


def _sim_config(manifest: RunManifest, scenario: Scenario) -> SimConfig:
    radius = manifest.option('radius_m')
    epsilon = manifest.option('epsilon')
    if radius is None and epsilon is not None:
        radius = choose_radius(scenario.alpha_los, epsilon)
    defaults = SimConfig()
    return SimConfig(
        trials=defaults.trials if manifest.trials is None else manifest.trials,
        seed=defaults.seed if manifest.seed is None else manifest.seed,
        radius_m=radius,
        workers=manifest.option('workers', defaults.workers)
    )


def cmd_simulate(manifest: RunManifest) -> pd.DataFrame:
    """
    Monte Carlo outage (θ grid) or rate coverage (κ grid) estimates.

    All grid points of one density share the same SINR samples, so outage and rate
    columns of one run are paired trial by trial.
    """
    scenario = manifest.load()
    sim = _sim_config(manifest, scenario)
    rate_mode = bool(manifest.option('kappa')) or manifest.option('rate', False)
    with_analytic = manifest.option('with_analytic', False)
    radius = sim.radius_m or scenario.interference.radius_m
    logger.info("simulating %d trials at R=%g m (epsilon %.3g)",
                sim.trials, radius, implied_epsilon(scenario.alpha_los, radius))

    rows = []
    for lambda_i in _lambdas(manifest, scenario):
        point = scenario.with_lambda(lambda_i)
        sinr = simulate_sinr(point, sim)
        if rate_mode:
            for kappa in _kappa_grid(manifest):
                estimate = rate_coverage_from_samples(point, sinr, float(kappa))
                row = {'lambda_per_m2': lambda_i, 'kappa_bps': float(kappa)}
                row.update(mean=estimate.mean, std_error=estimate.std_error, trials=estimate.trials)
                if with_analytic:
                    row['r_c_analytic'] = rate_coverage(point, float(kappa))
                    row['gap'] = row['mean'] - row['r_c_analytic']
                rows.append(row)
        else:
            for theta_db in _theta_grid_db(manifest):
                estimate = outage_from_samples(sinr, db_to_linear(theta_db))
                row = {'lambda_per_m2': lambda_i, 'theta_db': float(theta_db)}
                row.update(mean=estimate.mean, std_error=estimate.std_error, trials=estimate.trials)
                if with_analytic:
                    row['p_t_analytic'] = outage_probability(point, db_to_linear(theta_db)).probability
                    row['gap'] = row['p_t_analytic'] - row['mean']
                rows.append(row)

    columns = list(CSV_COLUMNS['simulate_rate' if rate_mode else 'simulate_outage'])
    if with_analytic:
        columns += ['r_c_analytic' if rate_mode else 'p_t_analytic', 'gap']
    return pd.DataFrame(rows, columns=columns)


def _pa_problem(manifest: RunManifest, scenario: Scenario, theta_hat_db: float) -> PaProblem:
    return PaProblem(
        scenario=scenario,
        theta_hat=db_to_linear(theta_hat_db),
        t_hat=manifest.option('t_hat', PA_CONFIG['T_HAT']),
        p_max=manifest.option('p_max_w', PA_CONFIG['P_MAX_W'])
    )


def _pa_frame(rows: List[PaSweepRow], num_stations: int) -> pd.DataFrame:
    power_columns = [f'p{i + 1}_w' for i in range(num_stations)]
    records = []
    for row in rows:
        solution = row.solution
        record = {'theta_hat_db': linear_to_db(row.theta_hat), 'lambda_per_m2': row.lambda_i}
        for name, power in zip(power_columns, solution.powers or [None] * num_stations):
            record[name] = power
        record.update(
            total_w=solution.total_power if solution.feasible else None,
            achieved_outage=solution.achieved_outage,
            feasible=solution.feasible,
            static_total_w=row.static_total,
            savings_ratio=None if math.isnan(row.savings_ratio) else row.savings_ratio
        )
        records.append(record)
    columns = CSV_COLUMNS['optimize'][:2] + power_columns + CSV_COLUMNS['optimize'][2:]
    return pd.DataFrame(records, columns=columns)


def cmd_optimize(manifest: RunManifest) -> pd.DataFrame:
    """
    Solve the power allocation problem at one threshold, once per interferer density.

    An unreachable target yields a row with `feasible=False` and empty powers;
    the CLI writes it and exits with the infeasible code.
    """
    scenario = manifest.load()
    theta_hat_db = manifest.option('theta_hat_db', PA_CONFIG['THETA_HAT_DB'])
    rows = []
    for lambda_i in _lambdas(manifest, scenario):
        problem = _pa_problem(manifest, scenario.with_lambda(lambda_i), theta_hat_db)
        try:
            if manifest.option('solver', 'evo') == 'evo':
                kwargs = {'seed': manifest.seed} if manifest.seed is not None else {}
                if manifest.option('budget') is not None:
                    kwargs['budget'] = manifest.option('budget')
                solution = solve_evolutionary(problem, **kwargs)
            else:
                solution = solve_uniform_bisection(problem)
        except Infeasible:
            logger.warning("no allocation meets the outage target at λ=%g", lambda_i)
            solution = PaSolution.infeasible(problem)
        rows.append(PaSweepRow(problem.theta_hat, lambda_i, solution, problem.static_total))
    return _pa_frame(rows, scenario.num_stations)


def cmd_sweep(manifest: RunManifest) -> pd.DataFrame:
    """Power allocation over θ̂ and λ grids; infeasible points are rows, not errors."""
    scenario = manifest.load()
    theta_db = manifest.option('theta_hat_db_list')
    if not theta_db:
        theta_db = list(get_theta_grid_db(
            manifest.option('theta_hat_db_min', GRID_CONFIG['THETA_DB_MIN']),
            manifest.option('theta_hat_db_max', GRID_CONFIG['THETA_DB_MAX']),
            manifest.option('theta_hat_db_step', GRID_CONFIG['THETA_DB_STEP'])))
    by_lambda = manifest.option('axis', 'theta') == 'lambda'
    if by_lambda and not manifest.option('lambdas'):
        lambdas = get_default_lambdas()
    else:
        lambdas = _lambdas(manifest, scenario)
    template = _pa_problem(manifest, scenario, theta_db[0])
    kwargs = {'solver': manifest.option('solver', 'bisect')}
    if manifest.seed is not None:
        kwargs['seed'] = manifest.seed
    if manifest.option('budget') is not None:
        kwargs['budget'] = manifest.option('budget')
    rows = sweep_pa(template, thetas=[db_to_linear(t) for t in theta_db], lambdas=lambdas, **kwargs)

    frame = _pa_frame(rows, scenario.num_stations)
    if by_lambda:
        frame = frame.sort_values(['theta_hat_db', 'lambda_per_m2'], kind='mergesort').reset_index(drop=True)
    return frame


COMMANDS = {
    'outage': cmd_outage,
    'rate': cmd_rate,
    'simulate': cmd_simulate,
    'optimize': cmd_optimize,
    'sweep': cmd_sweep
}
