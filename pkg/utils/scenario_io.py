import copy
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional

from models.errors import ScenarioError
from models.scenario import InterferenceField, Scenario, SfnBaseStation
from utils.units import db_to_linear, dbm_to_watts, linear_to_db, thermal_noise_w, watts_to_dbm

logger = logging.getLogger(__name__)

# Keys every section of a scenario document must carry
REQUIRED_KEYS = {
    'interference': ['lambda_per_m2', 'p_los', 'power_w', 'radius_m'],
    'gains_db': ['sfn_tx', 'interferer_tx', 'rx'],
    'gains': ['sfn_tx', 'interferer_tx', 'rx'],
    'path_loss': ['alpha_los', 'alpha_nlos'],
    'rate': ['bandwidth_hz', 'h', 'j']
}
STATION_KEYS = ['x_m', 'y_m', 'power_w']
NOISE_KEYS = {'dbm', 'watts', 'temperature_k', 'from_bandwidth'}
GAIN_SECTIONS = ('gains_db', 'gains')


def _number(value, parameter: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", parameter)
    return float(value)


def _section(document: dict, name: str) -> dict:
    section = document.get(name)
    if not isinstance(section, dict):
        raise ScenarioError("missing or not an object", name)
    missing = [key for key in REQUIRED_KEYS[name] if key not in section]
    if missing:
        raise ScenarioError(f"missing keys: {', '.join(missing)}", name)
    unknown = [key for key in section if key not in REQUIRED_KEYS[name]]
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(unknown)}", name)
    return {key: _number(section[key], f"{name}.{key}") for key in REQUIRED_KEYS[name]}


def noise_watts(noise: dict, bandwidth_hz: float) -> float:
    """
    Resolve the `noise` section to watts.

    Args:
        noise (dict): {dbm: x}, {watts: x} or {temperature_k: T, from_bandwidth: true}
        bandwidth_hz (float): System bandwidth used for k·T·σ

    Returns:
        float: Noise power in watts
    """
    if not isinstance(noise, dict):
        raise ScenarioError("missing or not an object", 'noise')
    unknown = [key for key in noise if key not in NOISE_KEYS]
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(unknown)}", 'noise')
    for key, convert in (('dbm', dbm_to_watts), ('watts', float)):
        if key in noise:
            if len(noise) != 1:
                raise ScenarioError("give exactly one of dbm, watts or temperature_k", 'noise')
            return convert(_number(noise[key], f"noise.{key}"))
    if noise.get('from_bandwidth') is not True or 'temperature_k' not in noise:
        raise ScenarioError("expected {dbm}, {watts} or {temperature_k, from_bandwidth: true}", 'noise')
    temperature = _number(noise['temperature_k'], 'noise.temperature_k')
    if not temperature > 0:
        raise ScenarioError(f"must be > 0, got {temperature}", 'noise.temperature_k')
    return thermal_noise_w(temperature, bandwidth_hz)


def scenario_from_dict(document: dict) -> Scenario:
    """
    Build a Scenario from a scenario document (dB at the boundary, linear inside).

    Args:
        document (dict): Parsed scenario JSON

    Returns:
        Scenario: Validated scenario

    Raises:
        ScenarioError: On any schema or invariant violation, naming the parameter
    """
    if not isinstance(document, dict):
        raise ScenarioError("scenario document must be a JSON object")
    known = {'sfn_stations', 'noise'} | set(REQUIRED_KEYS)
    unknown = [key for key in document if key not in known]
    if unknown:
        raise ScenarioError(f"unknown top-level keys: {', '.join(unknown)}")

    raw_stations = document.get('sfn_stations')
    if not isinstance(raw_stations, list) or not raw_stations:
        raise ScenarioError("must be a non-empty array", 'sfn_stations')
    stations = []
    for index, raw in enumerate(raw_stations):
        prefix = f"sfn_stations.{index}"
        if not isinstance(raw, dict):
            raise ScenarioError("must be an object", prefix)
        missing = [key for key in STATION_KEYS if key not in raw]
        unknown = [key for key in raw if key not in STATION_KEYS]
        if missing or unknown:
            raise ScenarioError(f"missing {missing} / unknown {unknown} keys", prefix)
        try:
            stations.append(SfnBaseStation(
                (_number(raw['x_m'], f"{prefix}.x_m"), _number(raw['y_m'], f"{prefix}.y_m")),
                _number(raw['power_w'], f"{prefix}.power_w")))
        except ScenarioError as e:
            if e.parameter.startswith(prefix):
                raise
            raise ScenarioError(str(e), prefix) from e

    interference = _section(document, 'interference')
    present = [name for name in GAIN_SECTIONS if name in document]
    if len(present) != 1:
        raise ScenarioError("give exactly one of gains_db or gains (linear)", 'gains_db')
    gains = _section(document, present[0])
    if present[0] == 'gains_db':
        gains = {key: db_to_linear(value) for key, value in gains.items()}
    path_loss = _section(document, 'path_loss')
    rate = _section(document, 'rate')
    if not rate['bandwidth_hz'] > 0:
        raise ScenarioError(f"must be > 0, got {rate['bandwidth_hz']}", 'rate.bandwidth_hz')

    return Scenario(
        sfn_stations=tuple(stations),
        interference=InterferenceField(
            lambda_i=interference['lambda_per_m2'],
            p_los=interference['p_los'],
            power_w=interference['power_w'],
            radius_m=interference['radius_m']
        ),
        g_s_tx=gains['sfn_tx'],
        g_i_tx=gains['interferer_tx'],
        g_rx=gains['rx'],
        alpha_los=path_loss['alpha_los'],
        alpha_nlos=path_loss['alpha_nlos'],
        noise_w=noise_watts(document.get('noise'), rate['bandwidth_hz']),
        bandwidth_hz=rate['bandwidth_hz'],
        rate_h=rate['h'],
        rate_j=rate['j']
    )


def _exact_db(value: float, to_db, from_db):
    """dB rendering of value, or None when reading it back would not give value exactly."""
    rendered = to_db(value)
    return rendered if from_db(rendered) == value else None


def scenario_to_dict(scenario: Scenario) -> dict:
    """
    Canonical document for a Scenario; reloading it gives back an equal Scenario.

    Gains and noise are written in dB unless the dB value does not convert back to the
    same double, in which case the linear `gains` section or `{watts}` noise form is used.
    """
    linear_gains = {'sfn_tx': scenario.g_s_tx, 'interferer_tx': scenario.g_i_tx, 'rx': scenario.g_rx}
    gains_db = {key: _exact_db(value, linear_to_db, db_to_linear) for key, value in linear_gains.items()}
    gains = ({'gains_db': gains_db} if None not in gains_db.values() else {'gains': linear_gains})
    noise_dbm = _exact_db(scenario.noise_w, watts_to_dbm, dbm_to_watts)
    noise = {'watts': scenario.noise_w} if noise_dbm is None else {'dbm': noise_dbm}
    return {
        'sfn_stations': [
            {'x_m': s.position[0], 'y_m': s.position[1], 'power_w': s.power_w}
            for s in scenario.sfn_stations
        ],
        'interference': {
            'lambda_per_m2': scenario.interference.lambda_i,
            'p_los': scenario.interference.p_los,
            'power_w': scenario.interference.power_w,
            'radius_m': scenario.interference.radius_m
        },
        **gains,
        'path_loss': {'alpha_los': scenario.alpha_los, 'alpha_nlos': scenario.alpha_nlos},
        'noise': noise,
        'rate': {'bandwidth_hz': scenario.bandwidth_hz, 'h': scenario.rate_h, 'j': scenario.rate_j}
    }


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(document: dict, overrides: Iterable[str]) -> dict:
    """
    Apply `key=value` overrides addressed by dotted schema paths.

    Station entries are addressed by 0-based index (`sfn_stations.2.power_w`). Setting
    `noise.dbm`, `noise.watts` or `noise.temperature_k` switches the noise section to that form.

    Args:
        document (dict): Scenario document; left untouched
        overrides (Iterable[str]): Strings of the form `path=value`

    Returns:
        dict: New document with the overrides applied

    Raises:
        ScenarioError: On malformed overrides or keys outside the schema
    """
    result = copy.deepcopy(document)
    for item in overrides:
        if '=' not in item:
            raise ScenarioError(f"override {item!r} is not of the form key=value")
        key, text = (part.strip() for part in item.split('=', 1))
        value = _parse_value(text)
        parts = key.split('.')

        if parts[0] == 'noise' and len(parts) == 2 and parts[1] in ('dbm', 'watts', 'temperature_k'):
            result['noise'] = ({'temperature_k': value, 'from_bandwidth': True} if parts[1] == 'temperature_k'
                               else {parts[1]: value})
        elif parts[0] in REQUIRED_KEYS and len(parts) == 2 and parts[1] in REQUIRED_KEYS[parts[0]]:
            result.setdefault(parts[0], {})[parts[1]] = value
        elif (parts[0] == 'sfn_stations' and len(parts) == 3 and parts[1].isdigit()
              and parts[2] in STATION_KEYS
              and int(parts[1]) < len(result.get('sfn_stations', []))):
            result['sfn_stations'][int(parts[1])][parts[2]] = value
        else:
            raise ScenarioError(f"unknown override key {key!r}", key)
        logger.info("override %s = %r", key, value)
    return result


def load_document(path: str, overrides: Optional[List[str]] = None) -> dict:
    """
    Read a scenario JSON document and apply overrides, validating it.

    Args:
        path (str): Path to the JSON file
        overrides (list): Optional `key=value` strings

    Returns:
        dict: The (overridden) document, already checked by scenario_from_dict
    """
    try:
        document = json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError as e:
        raise ScenarioError(f"scenario file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON in {path}: {e}") from e
    document = apply_overrides(document, overrides or [])
    scenario_from_dict(document)
    return document


def load_scenario(path: str, overrides: Optional[List[str]] = None) -> Scenario:
    """Read, override and validate a scenario file."""
    return scenario_from_dict(load_document(path, overrides))


def save_document(document: dict, path: str):
    """Write a scenario document as indented JSON."""
    Path(path).write_text(json.dumps(document, indent=2) + '\n', encoding='utf-8')


def save_scenario(scenario: Scenario, path: str):
    """Write the canonical document of a Scenario."""
    save_document(scenario_to_dict(scenario), path)
