import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from scipy import stats

from models.analytic import (
    LaplaceParams,
    OutageBranch,
    distinct_means_coefficients,
    hypoexp_cdf,
    hypoexp_survival,
    laplace_interference,
    laplace_params,
    omega_derivative,
    outage_curve,
    outage_probability,
    rate_coverage,
    survival_coefficients
)
from models.errors import DomainError
from models.montecarlo import sample_interference
from models.scenario import HypoexpSpec, build_hypoexp_spec
from utils.units import db_to_linear, rate_to_sinr_threshold


# ── Hypoexponential CDF ───────────────────────────────────────────────────────

def test_single_exponential():
    spec = HypoexpSpec((2.0,), (1,))
    assert hypoexp_cdf(spec, 1.0) == pytest.approx(1.0 - math.exp(-0.5))


def test_erlang_two():
    spec = HypoexpSpec((1.0,), (2,))
    assert hypoexp_cdf(spec, 1.0) == pytest.approx(1.0 - 2.0 * math.exp(-1.0))


@pytest.mark.parametrize('shape', [2, 3, 5])
def test_erlang_matches_gamma(shape):
    spec = HypoexpSpec((0.7,), (shape,))
    for z in (0.2, 1.0, 3.5, 8.0):
        assert hypoexp_cdf(spec, z) == pytest.approx(stats.gamma(a=shape, scale=0.7).cdf(z), abs=1e-12)


def test_cdf_at_non_positive_point():
    spec = HypoexpSpec((1.0, 2.0), (1, 1))
    assert hypoexp_cdf(spec, 0.0) == 0.0
    assert hypoexp_cdf(spec, -1.0) == 0.0
    assert hypoexp_survival(spec, 0.0) == 1.0


def test_distinct_coefficients_agree_with_general_ones():
    spec = HypoexpSpec((3.0, 2.0, 1.0), (1, 1, 1))
    general = [row[0] for row in survival_coefficients(spec)]
    assert general == pytest.approx(distinct_means_coefficients(spec), rel=1e-9)
    # S(0) = 1
    assert sum(general) == pytest.approx(1.0, abs=1e-12)


def test_repeated_means_close_to_perturbed_distinct():
    repeated = HypoexpSpec((2.0, 1.0), (1, 2))
    perturbed = HypoexpSpec((2.0, 1.0 + 1e-5, 1.0), (1, 1, 1))
    for z in (0.5, 2.0, 6.0):
        assert hypoexp_cdf(repeated, z) == pytest.approx(hypoexp_cdf(perturbed, z), abs=1e-4)


def test_coefficients_are_scale_free():
    spec = HypoexpSpec((2.0, 1.0), (2, 3))
    scaled = HypoexpSpec((2e-6, 1e-6), (2, 3))
    assert hypoexp_cdf(spec, 4.0) == pytest.approx(hypoexp_cdf(scaled, 4e-6), abs=1e-12)


def test_cdf_matches_sampled_sums():
    means = np.array([3.0, 1.0, 1.0, 0.5])
    rng = np.random.default_rng(11)
    samples = rng.exponential(means, (200_000, means.size)).sum(axis=1)
    spec = HypoexpSpec.from_means(means)
    # DKW band at confidence 0.999
    band = math.sqrt(math.log(2 / 1e-3) / (2 * samples.size))
    for z in (1.0, 3.0, 5.0, 9.0):
        assert abs(hypoexp_cdf(spec, z) - np.mean(samples <= z)) < band


def _random_hypoexp(seed):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, 5))
    # geometric spacing keeps neighbouring means well apart
    means = 0.2 * np.cumprod(rng.uniform(1.3, 3.0, count))
    multiplicities = rng.integers(1, 4, count)
    if seed % 2 == 0:
        multiplicities[0] = max(int(multiplicities[0]), 2)
    return HypoexpSpec(tuple(means[::-1]), tuple(int(o) for o in multiplicities[::-1]))


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(20))
def test_cdf_within_dkw_band_for_random_specs(seed):
    spec = _random_hypoexp(seed)
    rng = np.random.default_rng(1000 + seed)
    n = 1_000_000
    # a sum of o exponentials with mean μ is Gamma(o, μ)
    samples = sum(rng.gamma(o, mu, n) for mu, o in zip(spec.distinct_means, spec.multiplicities))
    # DKW band at confidence 0.99
    band = math.sqrt(math.log(2 / 0.01) / (2 * n))
    samples.sort()
    for q in (0.05, 0.25, 0.75, 0.95):
        z = float(samples[int(q * n)])
        empirical = np.searchsorted(samples, z, side='right') / n
        assert abs(hypoexp_cdf(spec, z) - empirical) < band


# ── Laplace transform and its derivatives ─────────────────────────────────────

def test_laplace_at_zero_and_negative(reference_scenario):
    params = laplace_params(reference_scenario)
    assert laplace_interference(params, 0.0) == 1.0
    with pytest.raises(DomainError):
        laplace_interference(params, -1.0)


def test_laplace_is_monotone_and_log_convex(reference_scenario):
    params = laplace_params(reference_scenario)
    s = np.linspace(0.0, 5e4, 41)
    values = np.array([laplace_interference(params, x) for x in s])
    assert np.all(np.diff(values) <= 0)
    logs = np.log(values)
    assert np.all(logs[:-2] + logs[2:] - 2 * logs[1:-1] >= -1e-12)


def test_silent_field(reference_scenario):
    assert laplace_params(reference_scenario.with_lambda(0.0)).is_silent
    assert not laplace_params(reference_scenario).is_silent


def test_laplace_matches_simulated_field(reference_document):
    from utils.scenario_io import scenario_from_dict
    reference_document['interference']['lambda_per_m2'] = 1e-4
    reference_document['path_loss'] = {'alpha_los': 4.0, 'alpha_nlos': 4.0}
    scenario = scenario_from_dict(reference_document)
    s = 2e4
    interference = sample_interference(scenario, 10_000, np.random.default_rng(5))
    simulated = float(np.mean(np.exp(-s * interference)))
    analytic = laplace_interference(laplace_params(scenario), s)
    assert analytic == pytest.approx(0.21, abs=0.01)
    assert simulated == pytest.approx(analytic, abs=0.02)


@pytest.mark.slow
def test_laplace_matches_wide_simulated_field(reference_scenario):
    scenario = reference_scenario.with_radius(1e4)
    params = laplace_params(scenario)
    s = 1e3
    rng = np.random.default_rng(17)
    draws = np.concatenate([np.exp(-s * sample_interference(scenario, 2_000, rng)) for _ in range(10)])
    simulated = float(draws.mean())
    std_error = float(draws.std(ddof=1) / math.sqrt(draws.size))
    analytic = laplace_interference(params, s)

    # interferers beyond R add at most a factor exp(−s·E[I_far]) to the transform
    field, gain = scenario.interference, scenario.interferer_gain
    far_mean = sum(2 * math.pi * lam * gain * field.radius_m ** (2 - alpha) / (alpha - 2)
                   for lam, alpha in ((field.lambda_los, scenario.alpha_los),
                                      (field.lambda_nlos, scenario.alpha_nlos)))
    assert analytic - 3 * std_error <= simulated <= analytic * math.exp(s * far_mean) + 3 * std_error
    assert 0.5 < analytic < 0.95


def test_omega_order_zero():
    params = LaplaceParams(0.3, 0.2, 2.5, 3.5)
    assert omega_derivative(params, 0.5, 1.5, 0) == pytest.approx(
        math.exp(-0.5) * laplace_interference(params, 1.5))


@pytest.mark.parametrize('order', [1, 2, 3, 4])
def test_omega_without_interference_is_a_moment(order):
    # no interference: E[Aⁿ·e^−A] = Aⁿ·e^−A
    params = LaplaceParams(0.0, 0.0, 2.5, 3.5)
    assert omega_derivative(params, 0.8, 2.0, order) == pytest.approx(0.8 ** order * math.exp(-0.8))


@pytest.mark.parametrize('order', [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize('params, A, B', [
    (LaplaceParams(0.3, 0.2, 2.5, 3.5), 0.5, 1.5),
    (LaplaceParams(7.8e-4, 3.2e-4, 2.5, 3.5), 2.0, 4e3),
    (LaplaceParams(0.05, 0.0, 4.0, 4.0), 0.0, 10.0),
])
def test_omega_matches_high_precision_derivative(order, params, A, B):
    def f(x):
        return mpmath.exp(-A * x - params.c_los * mpmath.power(B * x, 2 / mpmath.mpf(params.alpha_los))
                          - params.c_nlos * mpmath.power(B * x, 2 / mpmath.mpf(params.alpha_nlos)))

    with mpmath.workdps(40):
        expected = float((-1) ** order * mpmath.diff(f, mpmath.mpf(1), order))
    assert omega_derivative(params, A, B, order) == pytest.approx(expected, rel=1e-7)


def test_omega_rejects_negative_order():
    with pytest.raises(DomainError):
        omega_derivative(LaplaceParams(0.1, 0.1, 2.5, 3.5), 0.1, 0.1, -1)


# ── Outage probability ────────────────────────────────────────────────────────

def test_branch_selection(reference_scenario, distinct_scenario, noise_only_scenario):
    assert outage_probability(reference_scenario, 10.0).branch is OutageBranch.REPEATED_MEANS
    assert outage_probability(distinct_scenario, 10.0).branch is OutageBranch.DISTINCT_MEANS
    assert outage_probability(noise_only_scenario, 10.0).branch is OutageBranch.NOISE_ONLY


def test_noise_only_equals_hypoexp_cdf(noise_only_scenario):
    spec = build_hypoexp_spec(noise_only_scenario)
    theta = 5e4
    expected = hypoexp_cdf(spec, theta * noise_only_scenario.noise_w / noise_only_scenario.useful_gain)
    assert outage_probability(noise_only_scenario, theta).probability == pytest.approx(expected)


def test_single_station_closed_form(reference_document):
    from utils.scenario_io import scenario_from_dict
    reference_document['sfn_stations'] = [{'x_m': 0.0, 'y_m': 200.0, 'power_w': 10.0}]
    scenario = scenario_from_dict(reference_document)
    theta = db_to_linear(6.5)
    s = theta / (scenario.useful_gain * 10.0 * 200.0 ** -2.5)
    expected = 1.0 - math.exp(-s * scenario.noise_w) * laplace_interference(laplace_params(scenario), s)
    assert outage_probability(scenario, theta).probability == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize('theta_db', [-5.0, 5.0, 15.0])
def test_general_form_agrees_with_distinct_form(distinct_scenario, theta_db):
    theta = db_to_linear(theta_db)
    distinct = outage_probability(distinct_scenario, theta)
    general = outage_probability(distinct_scenario, theta, general_form=True)
    assert general.branch is OutageBranch.REPEATED_MEANS
    assert general.probability == pytest.approx(distinct.probability, abs=1e-8)


@pytest.mark.parametrize('theta_db', [0.0, 10.0, 20.0])
def test_repeated_form_continuous_under_perturbation(reference_scenario, theta_db):
    theta = db_to_linear(theta_db)
    nudged = reference_scenario.with_powers([30.0 * (1 + 1e-6), 30.0, 30.0])
    assert outage_probability(nudged, theta).branch is OutageBranch.DISTINCT_MEANS
    assert outage_probability(reference_scenario, theta).probability == pytest.approx(
        outage_probability(nudged, theta).probability, abs=1e-4)


def test_outage_curve_nondecreasing_in_theta(reference_scenario):
    thetas = [db_to_linear(t) for t in np.arange(-10.0, 25.5, 0.5)]
    curve = outage_curve(reference_scenario, thetas)
    assert np.all((curve >= 0) & (curve <= 1))
    assert np.all(np.diff(curve) >= -1e-12)


def test_outage_grows_with_interferer_density(reference_scenario):
    theta = db_to_linear(10.0)
    values = [outage_probability(reference_scenario.with_lambda(lam), theta).probability
              for lam in (0.1e-5, 0.2e-5, 0.3e-5)]
    assert values[0] < values[1] < values[2]


def test_outage_falls_with_power(reference_scenario):
    theta = db_to_linear(10.0)
    low = outage_probability(reference_scenario.with_powers([10.0, 10.0, 10.0]), theta).probability
    high = outage_probability(reference_scenario, theta).probability
    assert high < low


def test_switched_off_stations(reference_scenario):
    result = outage_probability(reference_scenario.with_powers([0.0, 0.0, 0.0]), 1.0)
    assert result.probability == 1.0
    assert result.branch is OutageBranch.DEGENERATE
    one_left = outage_probability(reference_scenario.with_powers([0.0, 0.0, 30.0]), 1.0)
    assert one_left.branch is OutageBranch.DISTINCT_MEANS


def test_tiny_threshold_gives_zero_outage(reference_scenario):
    assert outage_probability(reference_scenario, 1e-9).probability == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize('theta', [0.0, -1.0, math.inf])
def test_invalid_threshold(reference_scenario, theta):
    with pytest.raises(DomainError):
        outage_probability(reference_scenario, theta)


def test_bounds_independent_of_field_radius(reference_scenario):
    theta = db_to_linear(8.0)
    wide = replace(reference_scenario, interference=replace(reference_scenario.interference, radius_m=5e4))
    assert outage_probability(wide, theta) == outage_probability(reference_scenario, theta)


# ── Rate coverage ─────────────────────────────────────────────────────────────

def test_rate_coverage_edges(reference_scenario):
    assert rate_coverage(reference_scenario, 0.0) == 1.0
    assert rate_coverage(reference_scenario, 1e12) == 0.0
    with pytest.raises(DomainError):
        rate_coverage(reference_scenario, -1.0)


def test_rate_coverage_is_outage_complement(reference_scenario):
    kappa = 20e6
    theta = rate_to_sinr_threshold(kappa, 50e6, 0.17, 0.06)
    assert rate_coverage(reference_scenario, kappa) == pytest.approx(
        1.0 - outage_probability(reference_scenario, theta).probability)


def test_rate_coverage_nonincreasing(reference_scenario):
    values = [rate_coverage(reference_scenario, k) for k in np.linspace(1e6, 2e8, 25)]
    assert np.all(np.diff(values) <= 1e-12)


# ── Randomised deployments ────────────────────────────────────────────────────

@pytest.mark.parametrize('seed', range(100))
def test_random_deployment_monotonicity(random_scenario, seed):
    scenario = random_scenario(seed)
    slack = 1e-9

    thetas = [db_to_linear(t) for t in np.arange(-10.0, 27.5, 2.5)]
    curve = outage_curve(scenario, thetas)
    assert np.all((curve >= 0) & (curve <= 1))
    assert np.all(np.diff(curve) >= -slack)

    theta = db_to_linear(5.0)
    base = outage_probability(scenario, theta).probability
    lam = scenario.interference.lambda_i
    by_density = [outage_probability(scenario.with_lambda(lam * f), theta).probability
                  for f in (0.0, 0.25, 1.0, 4.0)]
    assert np.all(np.diff(by_density) >= -slack)

    for i in range(scenario.num_stations):
        powers = scenario.powers_w.copy()
        powers[i] *= 2.0
        assert outage_probability(scenario.with_powers(powers), theta).probability <= base + slack

    kappa_max = scenario.rate_h * scenario.bandwidth_hz * math.log2(1 + scenario.rate_j * 10 ** 2.5)
    coverage = [rate_coverage(scenario, k) for k in np.linspace(0.0, kappa_max, 12)]
    assert coverage[0] == 1.0
    assert np.all(np.diff(coverage) <= slack)
