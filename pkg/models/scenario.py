import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Tuple

import numpy as np

from config.settings import NUMERIC_CONFIG
from models.errors import AllPowersZero, ScenarioError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SfnBaseStation:
    """
    One SFN transmitter, always in LOS with the cluster centre at the origin.

    Attributes:
        position (tuple): (x, y) coordinates in metres
        power_w (float): Instantaneous transmit power in watts
        distance_m (float): Euclidean distance to the origin, derived
    """
    position: Tuple[float, float]
    power_w: float
    distance_m: float = field(init=False)

    def __post_init__(self):
        x, y = (float(v) for v in self.position)
        object.__setattr__(self, 'position', (x, y))
        distance = math.hypot(x, y)
        if not distance > 0:
            raise ScenarioError("station at the cluster centre has no defined path loss", 'position')
        if not self.power_w >= 0 or not math.isfinite(self.power_w):
            raise ScenarioError(f"must be a finite value >= 0, got {self.power_w}", 'power_w')
        object.__setattr__(self, 'distance_m', distance)

    def with_power(self, power_w: float) -> 'SfnBaseStation':
        return SfnBaseStation(self.position, power_w)


@dataclass(frozen=True)
class InterferenceField:
    """
    Operator network modelled as a homogeneous PPP, independently thinned into LOS and NLOS.

    Attributes:
        lambda_i (float): Intensity in stations per square metre
        p_los (float): Probability that an interferer is in LOS with the origin
        power_w (float): Interferer transmit power in watts
        radius_m (float): Field radius used by the simulator; the closed forms assume R → ∞
    """
    lambda_i: float
    p_los: float
    power_w: float
    radius_m: float

    def __post_init__(self):
        if not self.lambda_i >= 0 or not math.isfinite(self.lambda_i):
            raise ScenarioError(f"must be >= 0, got {self.lambda_i}", 'interference.lambda_per_m2')
        if not 0.0 <= self.p_los <= 1.0:
            raise ScenarioError(f"must lie in [0, 1], got {self.p_los}", 'interference.p_los')
        if not self.power_w > 0:
            raise ScenarioError(f"must be > 0, got {self.power_w}", 'interference.power_w')
        if not self.radius_m > 0:
            raise ScenarioError(f"must be > 0, got {self.radius_m}", 'interference.radius_m')

    @property
    def lambda_los(self) -> float:
        return self.p_los * self.lambda_i

    @property
    def lambda_nlos(self) -> float:
        return self.lambda_i - self.lambda_los


@dataclass(frozen=True)
class Scenario:
    """
    Full parameterisation of one SFN deployment and its interference field.

    All values are linear SI units; dB and dBm live only at the file boundary.

    Attributes:
        sfn_stations (tuple): SfnBaseStation entries, at least one
        interference (InterferenceField): Interfering PPP
        g_s_tx (float): SFN main-lobe transmit gain
        g_i_tx (float): Interferer transmit gain
        g_rx (float): Vehicle receive gain
        alpha_los (float): LOS path-loss exponent, > 2
        alpha_nlos (float): NLOS path-loss exponent, > 2
        noise_w (float): Thermal noise power W in watts
        bandwidth_hz (float): System bandwidth σ
        rate_h (float): Rate correction factor H in (0, 1]
        rate_j (float): Rate correction factor J in (0, 1]
    """
    sfn_stations: Tuple[SfnBaseStation, ...]
    interference: InterferenceField
    g_s_tx: float
    g_i_tx: float
    g_rx: float
    alpha_los: float
    alpha_nlos: float
    noise_w: float
    bandwidth_hz: float
    rate_h: float = 1.0
    rate_j: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'sfn_stations', tuple(self.sfn_stations))
        if len(self.sfn_stations) < 1:
            raise ScenarioError("at least one SFN station is required", 'sfn_stations')
        for name in ('g_s_tx', 'g_i_tx', 'g_rx'):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ScenarioError(f"gain must be a finite value > 0, got {value}", name)
        for name in ('alpha_los', 'alpha_nlos'):
            value = getattr(self, name)
            # sin(2π/α) vanishes at α = 2 and the interference transform diverges
            if not value > 2:
                raise ScenarioError(f"path-loss exponent must be > 2, got {value}", name)
        if not self.noise_w > 0:
            raise ScenarioError(f"must be > 0, got {self.noise_w}", 'noise_w')
        if not self.bandwidth_hz > 0:
            raise ScenarioError(f"must be > 0, got {self.bandwidth_hz}", 'rate.bandwidth_hz')
        if not 0 < self.rate_h <= 1:
            raise ScenarioError(f"must lie in (0, 1], got {self.rate_h}", 'rate.h')
        if not 0 < self.rate_j <= 1:
            raise ScenarioError(f"must lie in (0, 1], got {self.rate_j}", 'rate.j')

    @property
    def num_stations(self) -> int:
        return len(self.sfn_stations)

    @property
    def powers_w(self) -> np.ndarray:
        return np.array([s.power_w for s in self.sfn_stations], dtype=float)

    @property
    def distances_m(self) -> np.ndarray:
        return np.array([s.distance_m for s in self.sfn_stations], dtype=float)

    @property
    def useful_gain(self) -> float:
        """G_S,TX·G_RX, the gain applied to every SFN contribution."""
        return self.g_s_tx * self.g_rx

    @property
    def interferer_gain(self) -> float:
        """G_I,TX·G_RX·P_I, the scale of every interferer contribution."""
        return self.g_i_tx * self.g_rx * self.interference.power_w

    def with_powers(self, powers_w: Sequence[float]) -> 'Scenario':
        """Copy with every station's power replaced, in station order."""
        powers_w = list(powers_w)
        if len(powers_w) != self.num_stations:
            raise ScenarioError(
                f"expected {self.num_stations} powers, got {len(powers_w)}", 'sfn_stations')
        stations = tuple(s.with_power(float(p)) for s, p in zip(self.sfn_stations, powers_w))
        return replace(self, sfn_stations=stations)

    def with_lambda(self, lambda_i: float) -> 'Scenario':
        return replace(self, interference=replace(self.interference, lambda_i=lambda_i))

    def with_radius(self, radius_m: float) -> 'Scenario':
        return replace(self, interference=replace(self.interference, radius_m=radius_m))


@dataclass(frozen=True)
class HypoexpSpec:
    """
    Distinct exponential means and their multiplicities.

    The sum of M independent exponentials with these means is the useful SFN power
    (normalised by the useful gain) seen at the cluster centre.

    Attributes:
        distinct_means (tuple): μ_1..μ_a, all > 0 and pairwise distinct
        multiplicities (tuple): o_1..o_a, positive integers
    """
    distinct_means: Tuple[float, ...]
    multiplicities: Tuple[int, ...]

    def __post_init__(self):
        means = tuple(float(m) for m in self.distinct_means)
        counts = tuple(int(o) for o in self.multiplicities)
        object.__setattr__(self, 'distinct_means', means)
        object.__setattr__(self, 'multiplicities', counts)
        if not means:
            raise ScenarioError("at least one mean is required", 'distinct_means')
        if len(means) != len(counts):
            raise ScenarioError("means and multiplicities differ in length", 'multiplicities')
        if any(not m > 0 or not math.isfinite(m) for m in means):
            raise ScenarioError(f"means must be finite and > 0, got {means}", 'distinct_means')
        if any(o < 1 for o in counts):
            raise ScenarioError(f"multiplicities must be >= 1, got {counts}", 'multiplicities')
        if len(set(means)) != len(means):
            raise ScenarioError("means must be distinct after grouping", 'distinct_means')

    @property
    def order(self) -> int:
        """Number of exponential terms, Σ o_k."""
        return sum(self.multiplicities)

    @property
    def all_distinct(self) -> bool:
        return all(o == 1 for o in self.multiplicities)

    @classmethod
    def from_means(
            cls,
            means: Iterable[float],
            rtol: float = NUMERIC_CONFIG['GROUPING_RTOL']) -> 'HypoexpSpec':
        """
        Group raw means into distinct values with multiplicities.

        Means are sorted in decreasing order and a mean joins the current bucket when it is
        within `rtol` (relative) of the bucket's first member, so the result does not depend
        on input order.

        Args:
            means (Iterable[float]): Raw means, all > 0
            rtol (float): Relative grouping tolerance

        Returns:
            HypoexpSpec: Grouped spec
        """
        ordered = sorted((float(m) for m in means), reverse=True)
        distinct, counts = [], []
        for mean in ordered:
            if distinct and abs(distinct[-1] - mean) <= rtol * distinct[-1]:
                counts[-1] += 1
            else:
                distinct.append(mean)
                counts.append(1)
        return cls(tuple(distinct), tuple(counts))


def build_hypoexp_spec(scenario: Scenario) -> HypoexpSpec:
    """
    Exponential means μ_i = P_i·d_i^(−α_L) of the SFN contributions, grouped.

    Stations transmitting 0 W are switched off and contribute no term.

    Args:
        scenario (Scenario): Deployment to describe

    Returns:
        HypoexpSpec: Grouped means with multiplicities

    Raises:
        AllPowersZero: If no station transmits
    """
    powers = scenario.powers_w
    active = powers > 0
    if not active.any():
        raise AllPowersZero("every SFN station transmits 0 W")
    if not active.all():
        logger.debug("dropping %d switched-off stations", int((~active).sum()))
    means = powers[active] * scenario.distances_m[active] ** (-scenario.alpha_los)
    return HypoexpSpec.from_means(means)
