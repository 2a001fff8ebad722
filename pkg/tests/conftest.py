import copy

import numpy as np
import pytest

from config.settings import REFERENCE_SCENARIO
from utils.scenario_io import save_document, scenario_from_dict


@pytest.fixture
def reference_document():
    """Three-station deployment of the numerical study, 30 W per station."""
    return copy.deepcopy(REFERENCE_SCENARIO)


@pytest.fixture
def reference_scenario(reference_document):
    return scenario_from_dict(reference_document)


@pytest.fixture
def random_scenario(reference_document):
    """
    Factory for seeded random deployments: 1 to 4 stations, random geometry, density and exponents.

    Every third seed mirrors the first station so the repeated-means form is exercised too.
    """
    def make(seed: int):
        rng = np.random.default_rng(seed)
        document = copy.deepcopy(reference_document)
        stations = []
        for _ in range(int(rng.integers(1, 5))):
            distance, angle = rng.uniform(100.0, 600.0), rng.uniform(0.0, 2 * np.pi)
            stations.append({'x_m': float(distance * np.cos(angle)), 'y_m': float(distance * np.sin(angle)),
                             'power_w': float(rng.uniform(1.0, 30.0))})
        if seed % 3 == 0:
            first = stations[0]
            stations.append({'x_m': -first['x_m'], 'y_m': -first['y_m'], 'power_w': first['power_w']})
        document['sfn_stations'] = stations
        document['interference']['lambda_per_m2'] = float(10 ** rng.uniform(-7.0, np.log10(5e-6)))
        document['interference']['p_los'] = float(rng.uniform(0.0, 1.0))
        document['path_loss'] = {'alpha_los': float(rng.uniform(2.2, 3.0)),
                                 'alpha_nlos': float(rng.uniform(3.0, 4.5))}
        return scenario_from_dict(document)

    return make


@pytest.fixture
def loud_noise_document(reference_document):
    """No interferers and −30 dBm of noise, so outage is a plain hypoexponential CDF."""
    reference_document['interference']['lambda_per_m2'] = 0.0
    reference_document['noise'] = {'dbm': -30.0}
    return reference_document


@pytest.fixture
def noise_only_scenario(loud_noise_document):
    return scenario_from_dict(loud_noise_document)


@pytest.fixture
def single_station_scenario(loud_noise_document):
    loud_noise_document['sfn_stations'] = [{'x_m': 0.0, 'y_m': 200.0, 'power_w': 30.0}]
    return scenario_from_dict(loud_noise_document)


@pytest.fixture
def distinct_scenario(reference_document):
    """Stations at 200, 300 and 400 m: every exponential mean differs."""
    reference_document['sfn_stations'] = [
        {'x_m': 0.0, 'y_m': 200.0, 'power_w': 30.0},
        {'x_m': 300.0, 'y_m': 0.0, 'power_w': 30.0},
        {'x_m': 0.0, 'y_m': -400.0, 'power_w': 30.0},
    ]
    return scenario_from_dict(reference_document)


@pytest.fixture
def scenario_file(tmp_path, reference_document):
    path = tmp_path / 'scenario.json'
    save_document(reference_document, str(path))
    return str(path)
