import math

import numpy as np

from config.settings import BOLTZMANN_J_PER_K


def db_to_linear(x_db: float) -> float:
    """
    Convert a power ratio in decibels to linear scale.

    Args:
        x_db (float): Ratio in dB

    Returns:
        float: 10^(x/10)
    """
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """
    Convert a positive linear power ratio to decibels.

    Args:
        x (float): Linear ratio, > 0

    Returns:
        float: 10·log10(x)
    """
    if x <= 0:
        raise ValueError(f"cannot express non-positive ratio {x} in dB")
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    """
    Convert a power level in dBm to watts.

    Args:
        x_dbm (float): Power in dBm

    Returns:
        float: Power in watts
    """
    return 10.0 ** (x_dbm / 10.0) * 1e-3


def watts_to_dbm(x_w: float) -> float:
    """
    Convert a positive power in watts to dBm.

    Args:
        x_w (float): Power in watts, > 0

    Returns:
        float: Power in dBm
    """
    return linear_to_db(x_w * 1e3)


def thermal_noise_w(temperature_k: float, bandwidth_hz: float) -> float:
    """
    Thermal noise power W = k·T·σ.

    Args:
        temperature_k (float): Noise temperature in kelvin
        bandwidth_hz (float): System bandwidth in hertz

    Returns:
        float: Noise power in watts
    """
    return BOLTZMANN_J_PER_K * temperature_k * bandwidth_hz


def rate_to_sinr_threshold(kappa_bps: float, bandwidth_hz: float, rate_h: float, rate_j: float) -> float:
    """SINR a link needs so that H·σ·log2(1 + J·SINR) reaches κ."""
    exponent = kappa_bps / (rate_h * bandwidth_hz) * math.log(2.0)
    if exponent > 700.0:
        return math.inf
    return math.expm1(exponent) / rate_j


def sinr_to_rate(sinr, bandwidth_hz: float, rate_h: float, rate_j: float):
    """Corrected Shannon rate H·σ·log2(1 + J·SINR), bit/s. Accepts arrays."""
    return rate_h * bandwidth_hz * np.log2(1.0 + rate_j * np.asarray(sinr))
