import json
from dataclasses import replace

import numpy as np
import pytest

from models.errors import ScenarioError
from utils.scenario_io import (
    apply_overrides,
    load_document,
    load_scenario,
    save_document,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict
)
from utils.units import thermal_noise_w


def test_reference_document_loads(reference_scenario):
    assert reference_scenario.noise_w == pytest.approx(thermal_noise_w(290.0, 50e6))
    assert reference_scenario.rate_h == 0.17
    assert reference_scenario.interference.radius_m == 1000.0


def test_overrides_parse_numbers(reference_document):
    result = apply_overrides(reference_document, ['interference.lambda_per_m2=1e-6', 'sfn_stations.2.power_w=0'])
    assert result['interference']['lambda_per_m2'] == 1e-6
    assert result['sfn_stations'][2]['power_w'] == 0
    # the input document is left alone
    assert reference_document['interference']['lambda_per_m2'] == 2e-6


def test_noise_override_switches_form(reference_document):
    result = apply_overrides(reference_document, ['noise.dbm=-90'])
    assert result['noise'] == {'dbm': -90}
    assert scenario_from_dict(result).noise_w == pytest.approx(1e-12)


@pytest.mark.parametrize('override', [
    'interference.density=1',
    'sfn_stations.7.power_w=1',
    'sfn_stations.0.z_m=1',
    'bogus=3',
    'no_equals_sign',
])
def test_bad_overrides_rejected(reference_document, override):
    with pytest.raises(ScenarioError):
        apply_overrides(reference_document, [override])


def test_missing_section_keys_named(reference_document):
    del reference_document['interference']['p_los']
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(reference_document)
    assert info.value.parameter == 'interference'
    assert 'p_los' in str(info.value)


def test_unknown_top_level_key(reference_document):
    reference_document['extra'] = {}
    with pytest.raises(ScenarioError, match='extra'):
        scenario_from_dict(reference_document)


def test_non_numeric_value_named(reference_document):
    reference_document['path_loss']['alpha_los'] = 'steep'
    with pytest.raises(ScenarioError, match='path_loss.alpha_los'):
        scenario_from_dict(reference_document)


def test_invalid_exponent_named(reference_document):
    reference_document['path_loss']['alpha_nlos'] = 1.5
    with pytest.raises(ScenarioError, match='alpha_nlos'):
        scenario_from_dict(reference_document)


def test_noise_needs_one_form(reference_document):
    reference_document['noise'] = {'dbm': -90.0, 'temperature_k': 290.0}
    with pytest.raises(ScenarioError, match='noise'):
        scenario_from_dict(reference_document)


def test_missing_file():
    with pytest.raises(ScenarioError, match='not found'):
        load_scenario('/nonexistent/scenario.json')


def test_invalid_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"sfn_stations": [', encoding='utf-8')
    with pytest.raises(ScenarioError, match='invalid JSON'):
        load_scenario(str(path))


def test_document_round_trip_is_exact(scenario_file, tmp_path):
    document = load_document(scenario_file)
    copy_path = tmp_path / 'copy.json'
    save_document(document, str(copy_path))
    assert load_document(str(copy_path)) == document
    assert load_scenario(str(copy_path)) == load_scenario(scenario_file)


def test_scenario_round_trip_is_exact(reference_scenario, tmp_path):
    path = tmp_path / 'canonical.json'
    save_scenario(reference_scenario, str(path))
    document = json.loads(path.read_text(encoding='utf-8'))
    assert len(document['noise']) == 1
    assert load_scenario(str(path)) == reference_scenario
    assert scenario_from_dict(scenario_to_dict(reference_scenario)) == reference_scenario


def test_scenario_round_trip_random_gains(reference_scenario, tmp_path):
    rng = np.random.default_rng(3)
    path = tmp_path / 'canonical.json'
    for _ in range(50):
        g_s_tx, g_i_tx, g_rx = (float(g) for g in rng.uniform(0.01, 1000.0, 3))
        scenario = replace(reference_scenario, g_s_tx=g_s_tx, g_i_tx=g_i_tx, g_rx=g_rx,
                           noise_w=float(rng.uniform(1e-15, 1e-9)))
        save_scenario(scenario, str(path))
        assert load_scenario(str(path)) == scenario


def test_linear_gains_and_watts_noise_forms(reference_document):
    del reference_document['gains_db']
    reference_document['gains'] = {'sfn_tx': 100.0, 'interferer_tx': 5.0, 'rx': 10.0}
    reference_document['noise'] = {'watts': 2e-13}
    scenario = scenario_from_dict(reference_document)
    assert scenario.g_s_tx == 100.0
    assert scenario.noise_w == 2e-13


def test_both_gain_sections_rejected(reference_document):
    reference_document['gains'] = {'sfn_tx': 100.0, 'interferer_tx': 5.0, 'rx': 10.0}
    with pytest.raises(ScenarioError, match='gains'):
        scenario_from_dict(reference_document)


def test_load_with_overrides(scenario_file):
    scenario = load_scenario(scenario_file, ['interference.p_los=0.5'])
    assert scenario.interference.p_los == 0.5
