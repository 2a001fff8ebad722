import numpy as np

# Physical constants
BOLTZMANN_J_PER_K = 1.380649e-23

# Reference emergency SFN deployment:
# three main-lobe stations around a cluster centred at the origin,
# overlaid on a PPP of operator base stations.
REFERENCE_SCENARIO = {
    'sfn_stations': [
        {'x_m': -300.0, 'y_m': 0.0, 'power_w': 30.0},
        {'x_m': 300.0, 'y_m': 0.0, 'power_w': 30.0},
        {'x_m': 0.0, 'y_m': 200.0, 'power_w': 30.0},
    ],
    'interference': {
        'lambda_per_m2': 0.2e-5,
        'p_los': 0.2,
        'power_w': 10.0,
        'radius_m': 1000.0
    },
    'gains_db': {
        'sfn_tx': 20.0,
        'interferer_tx': 7.0,
        'rx': 10.0
    },
    'path_loss': {
        'alpha_los': 2.5,
        'alpha_nlos': 3.5
    },
    'noise': {
        'temperature_k': 290.0,
        'from_bandwidth': True
    },
    'rate': {
        'bandwidth_hz': 50e6,
        'h': 0.17,
        'j': 0.06
    }
}

SIMULATION_CONFIG = {
    'TRIALS': 100_000,
    'SEED': 42,
    # Trials per substream; also the unit of work handed to a worker
    'CHUNK_SIZE': 10_000,
    'WORKERS': 1
}

EVOLUTION_CONFIG = {
    'POPULATION': 32,
    'BUDGET': 32 * 60,
    'TRUNCATION': 0.25,
    'MUTATION_SIGMA': 0.1,      # fraction of the power cap
    'MUTATION_DECAY': 0.95,
    'CROSSOVER_PROB': 0.5,
    'ELITISM': 2,
    'OFF_THRESHOLD': 1e-6,      # fraction of the power cap snapped to 0 W
    'REPAIR_STEPS': 40,
    'SEED': 7
}

GRID_CONFIG = {
    'THETA_DB_MIN': -10.0,
    'THETA_DB_MAX': 25.0,
    'THETA_DB_STEP': 0.5,
    'KAPPA_MIN': 0.0,
    'KAPPA_MAX': 2e8,
    'KAPPA_STEPS': 100,
    'LAMBDAS_PER_M2': [0.1e-5, 0.2e-5, 0.3e-5]
}

PA_CONFIG = {
    'THETA_HAT_DB': 6.5,
    'T_HAT': 0.1,
    'P_MAX_W': 30.0
}

NUMERIC_CONFIG = {
    # Means closer than this (relative) share one multiplicity bucket
    'GROUPING_RTOL': 1e-9,
    # Raw probabilities may stray this far outside [0, 1] before we complain
    'PROBABILITY_SLACK': 1e-9,
    'BISECTION_RTOL': 1e-6,
    'BISECTION_MAX_ITER': 200
}

EXIT_CODES = {
    'OK': 0,
    'CONFIG': 2,
    'NUMERICAL': 3,
    'INFEASIBLE': 4
}

CSV_COLUMNS = {
    'outage': ['lambda_per_m2', 'theta_db', 'p_t_analytic', 'branch'],
    'rate': ['lambda_per_m2', 'kappa_bps', 'theta_linear', 'r_c_analytic'],
    'simulate_outage': ['lambda_per_m2', 'theta_db', 'mean', 'std_error', 'trials'],
    'simulate_rate': ['lambda_per_m2', 'kappa_bps', 'mean', 'std_error', 'trials'],
    'optimize': ['theta_hat_db', 'lambda_per_m2', 'total_w', 'achieved_outage',
                 'feasible', 'static_total_w', 'savings_ratio']
}


def get_theta_grid_db(
        theta_min: float = GRID_CONFIG['THETA_DB_MIN'],
        theta_max: float = GRID_CONFIG['THETA_DB_MAX'],
        theta_step: float = GRID_CONFIG['THETA_DB_STEP']) -> np.ndarray:
    """Inclusive θ grid in dB."""
    count = int(round((theta_max - theta_min) / theta_step)) + 1
    return theta_min + theta_step * np.arange(max(count, 1))


def get_default_lambdas() -> list:
    """Reference interferer densities, stations per square metre."""
    return list(GRID_CONFIG['LAMBDAS_PER_M2'])
