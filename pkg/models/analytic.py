import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
from scipy.special import gammaln

from config.settings import NUMERIC_CONFIG
from models.errors import AllPowersZero, DomainError, NumericalInstability
from models.scenario import HypoexpSpec, Scenario, build_hypoexp_spec
from utils.derivatives import (
    exp_derivatives,
    log_reciprocal_derivatives,
    power_term_derivatives
)
from utils.units import rate_to_sinr_threshold

logger = logging.getLogger(__name__)


class OutageBranch(Enum):
    DISTINCT_MEANS = 'distinct_means'
    REPEATED_MEANS = 'repeated_means'
    NOISE_ONLY = 'noise_only'
    DEGENERATE = 'degenerate'


@dataclass(frozen=True)
class LaplaceParams:
    """
    Exponent coefficients of the interference Laplace transform
    L_I(s) = exp(−c_los·s^(2/α_L) − c_nlos·s^(2/α_N)).

    Attributes:
        c_los (float): Coefficient of the LOS sub-process
        c_nlos (float): Coefficient of the NLOS sub-process
        alpha_los (float): LOS path-loss exponent
        alpha_nlos (float): NLOS path-loss exponent
    """
    c_los: float
    c_nlos: float
    alpha_los: float
    alpha_nlos: float

    @property
    def is_silent(self) -> bool:
        return self.c_los == 0 and self.c_nlos == 0


@dataclass(frozen=True)
class OutageResult:
    """
    Attributes:
        probability (float): P_T(θ) in [0, 1]
        branch (OutageBranch): Which closed form produced it
    """
    probability: float
    branch: OutageBranch


def _ppp_coefficient(density: float, alpha: float, interferer_gain: float) -> float:
    """2·λ_X·π²·K^(2/α)/(α·sin(2π/α)) for one thinned sub-process."""
    if density == 0:
        return 0.0
    delta = 2.0 / alpha
    return 2.0 * density * math.pi ** 2 * interferer_gain ** delta / (alpha * math.sin(math.pi * delta))


def laplace_params(scenario: Scenario) -> LaplaceParams:
    """Collect the Laplace-transform coefficients of a scenario's interference field."""
    field = scenario.interference
    gain = scenario.interferer_gain
    return LaplaceParams(
        c_los=_ppp_coefficient(field.lambda_los, scenario.alpha_los, gain),
        c_nlos=_ppp_coefficient(field.lambda_nlos, scenario.alpha_nlos, gain),
        alpha_los=scenario.alpha_los,
        alpha_nlos=scenario.alpha_nlos
    )


def _log_laplace(params: LaplaceParams, s: float) -> float:
    return -(params.c_los * s ** (2.0 / params.alpha_los)
             + params.c_nlos * s ** (2.0 / params.alpha_nlos))


def laplace_interference(params: LaplaceParams, s: float) -> float:
    """
    Laplace transform E[exp(−s·I)] of the aggregate interference at the origin.

    The LOS and NLOS sub-processes are independent PPPs, so the transform is the
    product of one stretched exponential per sub-process.

    Args:
        params (LaplaceParams): Interference coefficients
        s (float): Transform variable, >= 0

    Returns:
        float: Value in (0, 1]

    Raises:
        DomainError: If s < 0
    """
    if not s >= 0:
        raise DomainError(f"Laplace variable must be >= 0, got {s}")
    return math.exp(_log_laplace(params, s))


def omega_derivative(params: LaplaceParams, A: float, B: float, order: int) -> float:
    """
    (−1)^n·dⁿ/dxⁿ [exp(−A·x)·L_I(B·x)] at x = 1.

    This equals E[Uⁿ·exp(−U)] for U = A + B·I, the moment needed by the
    repeated-means outage formula.

    Args:
        params (LaplaceParams): Interference coefficients
        A (float): Noise term θ·W/(μ_k·G_S,TX·G_RX), >= 0
        B (float): Interference scale θ/(μ_k·G_S,TX·G_RX), >= 0
        order (int): Derivative order n >= 0

    Returns:
        float: The signed derivative
    """
    if order < 0:
        raise DomainError(f"derivative order must be >= 0, got {order}")
    delta_los = 2.0 / params.alpha_los
    delta_nlos = 2.0 / params.alpha_nlos
    scale_los = -params.c_los * B ** delta_los
    scale_nlos = -params.c_nlos * B ** delta_nlos
    g0 = -A + scale_los + scale_nlos
    if order == 0:
        return math.exp(g0)

    los = power_term_derivatives(scale_los, delta_los, 1.0, order)
    nlos = power_term_derivatives(scale_nlos, delta_nlos, 1.0, order)
    g_derivs = [a + b for a, b in zip(los, nlos)]
    g_derivs[0] -= A
    f = exp_derivatives(math.exp(g0), g_derivs)
    return (-1) ** order * f[order]


def psi_derivative(spec: HypoexpSpec, k: int, ell: int) -> float:
    """
    Ψ_{k,ℓ}(−1/μ_k) = −d^(ℓ−1)/dt^(ℓ−1) [t^(−1)·Π_{j≠k}(1/μ_j + t)^(−o_j)] at t = −1/μ_k.

    Args:
        spec (HypoexpSpec): Grouped means
        k (int): Index of the distinct mean, 0-based
        ell (int): 1 <= ℓ <= o_k

    Returns:
        float: Ψ_{k,ℓ} evaluated at the pole of the k-th group
    """
    rates = [1.0 / m for m in spec.distinct_means]
    t = -rates[k]
    poles = [0.0] + [r for j, r in enumerate(rates) if j != k]
    powers = [1.0] + [float(o) for j, o in enumerate(spec.multiplicities) if j != k]

    value = 1.0 / t
    for c, p in zip(poles[1:], powers[1:]):
        value *= (c + t) ** (-p)
    if ell == 1:
        return -value
    h_derivs = log_reciprocal_derivatives(poles, powers, t, ell - 1)
    return -exp_derivatives(value, h_derivs)[ell - 1]


def _normalised(spec: HypoexpSpec) -> Tuple[HypoexpSpec, float]:
    """Rescale means by the largest one; the survival coefficients are scale-free."""
    reference = max(spec.distinct_means)
    means = tuple(m / reference for m in spec.distinct_means)
    return HypoexpSpec(means, spec.multiplicities), reference


def survival_coefficients(spec: HypoexpSpec) -> List[List[float]]:
    """
    Coefficients c_{k,ℓ} of the hypoexponential survival function
    S(z) = Σ_k Σ_ℓ c_{k,ℓ}·(z/μ_k)^(o_k−ℓ)·exp(−z/μ_k).

    c_{k,ℓ} = Π_j μ_j^(−o_j)·μ_k^(o_k−ℓ)·Ψ_{k,ℓ}(−1/μ_k)/((o_k−ℓ)!(ℓ−1)!).
    The product over j is taken in log-space on means normalised by the largest one.

    Args:
        spec (HypoexpSpec): Grouped means

    Returns:
        list: coefficients[k][ℓ−1]
    """
    unit, _ = _normalised(spec)
    log_prefactor = -sum(o * math.log(m) for m, o in zip(unit.distinct_means, unit.multiplicities))
    coefficients = []
    for k, (mean, count) in enumerate(zip(unit.distinct_means, unit.multiplicities)):
        row = []
        for ell in range(1, count + 1):
            n = count - ell
            psi = psi_derivative(unit, k, ell)
            log_scale = log_prefactor + n * math.log(mean) - gammaln(n + 1) - gammaln(ell)
            row.append(psi * math.exp(log_scale))
        coefficients.append(row)
    return coefficients


def distinct_means_coefficients(spec: HypoexpSpec) -> List[float]:
    """
    Survival coefficients Π_{j≠k} μ_k/(μ_k − μ_j) for pairwise distinct means.

    Equal to Π_j μ_j^(−1)·D̂_k without the noise factor. Magnitudes are accumulated
    in log-space with the sign tracked separately.

    Args:
        spec (HypoexpSpec): Spec whose multiplicities are all 1

    Returns:
        list: One coefficient per mean
    """
    means = spec.distinct_means
    coefficients = []
    for k, mu_k in enumerate(means):
        log_magnitude, sign = 0.0, 1.0
        for j, mu_j in enumerate(means):
            if j == k:
                continue
            diff = mu_k - mu_j
            sign *= math.copysign(1.0, diff)
            log_magnitude += math.log(mu_k) - math.log(abs(diff))
        coefficients.append(sign * math.exp(log_magnitude))
    return coefficients


def hypoexp_survival(spec: HypoexpSpec, z: float) -> float:
    """P[Σ_i Exp(μ_i) > z]."""
    if z <= 0:
        return 1.0
    total = 0.0
    for mean, row in zip(spec.distinct_means, survival_coefficients(spec)):
        u = z / mean
        count = len(row)
        for ell, coefficient in enumerate(row, start=1):
            total += coefficient * u ** (count - ell) * math.exp(-u)
    return total


def hypoexp_cdf(spec: HypoexpSpec, z: float) -> float:
    """
    CDF of a sum of independent exponentials with (possibly repeated) means.

    Args:
        spec (HypoexpSpec): Grouped means
        z (float): Evaluation point; z <= 0 gives 0

    Returns:
        float: P[Σ_i Exp(μ_i) <= z] in [0, 1]
    """
    if z <= 0:
        return 0.0
    return _checked_probability(1.0 - hypoexp_survival(spec, z), 'hypoexponential CDF')


def _checked_probability(raw: float, what: str) -> float:
    slack = NUMERIC_CONFIG['PROBABILITY_SLACK']
    if not math.isfinite(raw) or raw < -slack or raw > 1.0 + slack:
        raise NumericalInstability(f"{what} evaluated to {raw!r}, outside [0, 1]", raw)
    return min(max(raw, 0.0), 1.0)


def _covered_distinct(spec: HypoexpSpec, params: LaplaceParams, scale: float, noise_w: float) -> float:
    covered = 0.0
    for mean, coefficient in zip(spec.distinct_means, distinct_means_coefficients(spec)):
        noise_term = -scale * noise_w / mean
        covered += coefficient * math.exp(noise_term + _log_laplace(params, scale / mean))
    return covered


def _covered_repeated(spec: HypoexpSpec, params: LaplaceParams, scale: float, noise_w: float) -> float:
    covered = 0.0
    for mean, count, row in zip(spec.distinct_means, spec.multiplicities, survival_coefficients(spec)):
        A = scale * noise_w / mean
        B = scale / mean
        for ell, coefficient in enumerate(row, start=1):
            covered += coefficient * omega_derivative(params, A, B, count - ell)
    return covered


def outage_probability(scenario: Scenario, theta: float, general_form: bool = False) -> OutageResult:
    """
    SINR outage probability P_T(θ) = P[SINR < θ] at the cluster centre.

    Uses the distinct-means closed form when every station contributes a different
    mean, the repeated-means form with exact derivatives otherwise, and the plain
    hypoexponential CDF when there are no interferers. The interfering network is
    taken as unbounded, so the value upper-bounds any finite-radius outage.

    Args:
        scenario (Scenario): Deployment to evaluate
        theta (float): Linear SINR threshold, > 0
        general_form (bool): Use the repeated-means form even when all means differ

    Returns:
        OutageResult: Probability and the branch that produced it

    Raises:
        DomainError: If θ <= 0
        NumericalInstability: If the raw value falls outside [0, 1] beyond tolerance
    """
    if not theta > 0 or not math.isfinite(theta):
        raise DomainError(f"SINR threshold must be finite and > 0, got {theta}")
    try:
        spec = build_hypoexp_spec(scenario)
    except AllPowersZero:
        return OutageResult(1.0, OutageBranch.DEGENERATE)

    scale = theta / scenario.useful_gain
    if scenario.interference.lambda_i == 0:
        probability = hypoexp_cdf(spec, scale * scenario.noise_w)
        return OutageResult(probability, OutageBranch.NOISE_ONLY)

    params = laplace_params(scenario)
    if spec.all_distinct and not general_form:
        branch = OutageBranch.DISTINCT_MEANS
        covered = _covered_distinct(spec, params, scale, scenario.noise_w)
    else:
        branch = OutageBranch.REPEATED_MEANS
        covered = _covered_repeated(spec, params, scale, scenario.noise_w)

    logger.debug("θ=%g via %s over %d groups", theta, branch.value, len(spec.distinct_means))
    probability = _checked_probability(1.0 - covered, 'outage probability')
    return OutageResult(probability, branch)


def rate_coverage(scenario: Scenario, kappa: float) -> float:
    """
    Probability that H·σ·log2(1 + J·SINR) exceeds κ.

    Args:
        scenario (Scenario): Deployment to evaluate
        kappa (float): Target rate in bit/s, >= 0

    Returns:
        float: R_C(κ) = 1 − P_T((2^(κ/(H·σ)) − 1)/J), a lower bound for finite fields
    """
    if not kappa >= 0:
        raise DomainError(f"target rate must be >= 0, got {kappa}")
    if kappa == 0:
        return 1.0
    theta = rate_to_sinr_threshold(kappa, scenario.bandwidth_hz, scenario.rate_h, scenario.rate_j)
    if math.isinf(theta):
        return 0.0
    return 1.0 - outage_probability(scenario, theta).probability


def outage_curve(scenario: Scenario, thetas) -> np.ndarray:
    """Vector of P_T over an array of linear thresholds."""
    return np.array([outage_probability(scenario, float(t)).probability for t in thetas])
