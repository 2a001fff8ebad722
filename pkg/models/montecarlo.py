import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from config.settings import SIMULATION_CONFIG
from models.errors import DomainError
from models.scenario import InterferenceField, Scenario
from utils.units import rate_to_sinr_threshold

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    """
    Monte Carlo run settings.

    Attributes:
        trials (int): Independent PPP + fading realisations
        seed (int): Root of every random stream in the run
        radius_m (float): Field radius overriding the scenario's, if set
        chunk_size (int): Trials per random substream
        workers (int): Processes evaluating chunks; results do not depend on it
    """
    trials: int = SIMULATION_CONFIG['TRIALS']
    seed: int = SIMULATION_CONFIG['SEED']
    radius_m: Optional[float] = None
    chunk_size: int = SIMULATION_CONFIG['CHUNK_SIZE']
    workers: int = SIMULATION_CONFIG['WORKERS']

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed}")
        if self.radius_m is not None and not self.radius_m > 0:
            raise DomainError(f"radius must be > 0, got {self.radius_m}")
        if self.chunk_size < 1 or self.workers < 1:
            raise DomainError("chunk_size and workers must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    """
    Attributes:
        mean (float): Estimated probability
        std_error (float): Binomial standard error sqrt(p(1−p)/n)
        trials (int): Trials behind the estimate
        successes (int): Trials that met the event
    """
    mean: float
    std_error: float
    trials: int
    successes: int = field(default=0, compare=False)

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> 'SimEstimate':
        p = successes / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, successes)


def choose_radius(alpha_los: float, epsilon: float) -> float:
    """
    Smallest field radius keeping the truncation error of an unbounded PPP below ε.

    Args:
        alpha_los (float): LOS path-loss exponent, > 1
        epsilon (float): Accuracy target in (0, 1]

    Returns:
        float: R = ε^(−1/(α_L−1)) in metres
    """
    if not alpha_los > 1:
        raise DomainError(f"alpha_los must be > 1, got {alpha_los}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    return epsilon ** (-1.0 / (alpha_los - 1.0))


def implied_epsilon(alpha_los: float, radius_m: float) -> float:
    """Truncation accuracy R^(−(α_L−1)) delivered by a field of radius R."""
    if not alpha_los > 1 or not radius_m > 0:
        raise DomainError("alpha_los must be > 1 and radius > 0")
    return radius_m ** (-(alpha_los - 1.0))


def sample_interferers(field: InterferenceField, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw one layout of the interfering PPP on the disk of radius R around the origin.

    Args:
        field (InterferenceField): Density, LOS probability and radius
        rng (np.random.Generator): Random stream

    Returns:
        tuple: (distances_m, is_los) arrays of equal length
    """
    radius = field.radius_m
    count = rng.poisson(field.lambda_i * math.pi * radius ** 2)
    # 1 − U lies in (0, 1], so no interferer sits exactly on the origin
    distances = radius * np.sqrt(1.0 - rng.random(count))
    angles = rng.uniform(0.0, 2.0 * math.pi, count)
    positions = np.column_stack((distances * np.cos(angles), distances * np.sin(angles)))
    is_los = rng.random(count) < field.p_los
    return np.hypot(positions[:, 0], positions[:, 1]), is_los


def simulate_sinr_once(scenario: Scenario, rng: np.random.Generator, fading: bool = True) -> float:
    """
    One realisation of the SINR at the cluster centre.

    Args:
        scenario (Scenario): Deployment
        rng (np.random.Generator): Random stream
        fading (bool): Draw Rayleigh power gains; h = 1 everywhere when False

    Returns:
        float: Linear SINR
    """
    powers = scenario.powers_w * scenario.distances_m ** (-scenario.alpha_los)
    h = rng.exponential(1.0, powers.size) if fading else np.ones(powers.size)
    useful = scenario.useful_gain * float(np.dot(powers, h))

    distances, is_los = sample_interferers(scenario.interference, rng)
    path_loss = np.where(is_los, distances ** (-scenario.alpha_los), distances ** (-scenario.alpha_nlos))
    h_i = rng.exponential(1.0, distances.size) if fading else np.ones(distances.size)
    interference = scenario.interferer_gain * float(np.dot(h_i, path_loss))
    return useful / (scenario.noise_w + interference)


def sample_interference(scenario: Scenario, trials: int, rng: np.random.Generator) -> np.ndarray:
    """
    Aggregate interference power I for `trials` independent layouts, vectorised.

    Args:
        scenario (Scenario): Deployment; its field radius bounds the PPP
        trials (int): Number of realisations
        rng (np.random.Generator): Random stream

    Returns:
        np.ndarray: Interference power in watts per realisation
    """
    field = scenario.interference
    radius = field.radius_m
    counts = rng.poisson(field.lambda_i * math.pi * radius ** 2, trials)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(trials)
    distances = radius * np.sqrt(1.0 - rng.random(total))
    is_los = rng.random(total) < field.p_los
    h = rng.exponential(1.0, total)
    path_loss = np.where(is_los, distances ** (-scenario.alpha_los), distances ** (-scenario.alpha_nlos))
    owner = np.repeat(np.arange(trials), counts)
    return scenario.interferer_gain * np.bincount(owner, weights=h * path_loss, minlength=trials)


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,)))


def _simulate_chunk(args) -> np.ndarray:
    scenario, seed, chunk_index, trials = args
    rng = _chunk_rng(seed, chunk_index)
    means = scenario.powers_w * scenario.distances_m ** (-scenario.alpha_los)
    h = rng.exponential(1.0, (trials, means.size))
    useful = scenario.useful_gain * (h @ means)
    interference = sample_interference(scenario, trials, rng)
    return useful / (scenario.noise_w + interference)


def _chunks(sim: SimConfig):
    full, remainder = divmod(sim.trials, sim.chunk_size)
    sizes = [sim.chunk_size] * full + ([remainder] if remainder else [])
    return list(enumerate(sizes))


def simulate_sinr(scenario: Scenario, sim: SimConfig) -> np.ndarray:
    """
    SINR samples for every trial of a run, in trial order.

    Chunk k always draws from the substream derived from (seed, k), so the samples do
    not depend on how many workers evaluate the chunks.

    Args:
        scenario (Scenario): Deployment
        sim (SimConfig): Run settings

    Returns:
        np.ndarray: `sim.trials` linear SINR values
    """
    if sim.radius_m is not None:
        scenario = scenario.with_radius(sim.radius_m)
    tasks = [(scenario, sim.seed, index, size) for index, size in _chunks(sim)]
    if sim.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=sim.workers) as pool:
            parts = list(pool.map(_simulate_chunk, tasks))
    else:
        parts = [_simulate_chunk(task) for task in tasks]
    logger.debug("simulated %d trials in %d chunks (R=%g m)",
                 sim.trials, len(tasks), scenario.interference.radius_m)
    return np.concatenate(parts)


def outage_from_samples(sinr: np.ndarray, theta: float) -> SimEstimate:
    """Fraction of samples strictly below θ."""
    return SimEstimate.from_counts(int(np.count_nonzero(sinr < theta)), sinr.size)


def coverage_from_samples(sinr: np.ndarray, theta: float) -> SimEstimate:
    """Fraction of samples strictly above θ."""
    return SimEstimate.from_counts(int(np.count_nonzero(sinr > theta)), sinr.size)


def rate_coverage_from_samples(scenario: Scenario, sinr: np.ndarray, kappa: float) -> SimEstimate:
    """Fraction of samples whose corrected Shannon rate exceeds κ."""
    theta = rate_to_sinr_threshold(kappa, scenario.bandwidth_hz, scenario.rate_h, scenario.rate_j)
    return coverage_from_samples(sinr, theta)


def estimate_outage(scenario: Scenario, theta: float, sim: SimConfig) -> SimEstimate:
    """
    Monte Carlo estimate of P[SINR < θ] over a field of finite radius.

    Args:
        scenario (Scenario): Deployment
        theta (float): Linear threshold, >= 0
        sim (SimConfig): Run settings

    Returns:
        SimEstimate: Estimate with binomial standard error
    """
    if not theta >= 0:
        raise DomainError(f"SINR threshold must be >= 0, got {theta}")
    return outage_from_samples(simulate_sinr(scenario, sim), theta)


def estimate_rate_coverage(scenario: Scenario, kappa: float, sim: SimConfig) -> SimEstimate:
    """
    Monte Carlo estimate of P[H·σ·log2(1 + J·SINR) > κ].

    Args:
        scenario (Scenario): Deployment
        kappa (float): Target rate in bit/s, >= 0
        sim (SimConfig): Run settings

    Returns:
        SimEstimate: Estimate with binomial standard error
    """
    if not kappa >= 0:
        raise DomainError(f"target rate must be >= 0, got {kappa}")
    return rate_coverage_from_samples(scenario, simulate_sinr(scenario, sim), kappa)
