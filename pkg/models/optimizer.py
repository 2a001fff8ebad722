import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import EVOLUTION_CONFIG, NUMERIC_CONFIG
from models.analytic import outage_probability
from models.errors import DomainError, Infeasible
from models.scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PaProblem:
    """
    Power allocation: minimise Σ P_i subject to P_T(θ̂) <= T̂ and 0 <= P_i <= P̂.

    Attributes:
        scenario (Scenario): Deployment; its station powers are ignored
        theta_hat (float): Linear SINR threshold, > 0
        t_hat (float): Outage target in (0, 1]
        p_max (float): Per-station power cap P̂ in watts
    """
    scenario: Scenario
    theta_hat: float
    t_hat: float
    p_max: float

    def __post_init__(self):
        if not self.theta_hat > 0:
            raise DomainError(f"theta_hat must be > 0, got {self.theta_hat}")
        if not 0 < self.t_hat <= 1:
            raise DomainError(f"t_hat must lie in (0, 1], got {self.t_hat}")
        if not self.p_max > 0:
            raise DomainError(f"p_max must be > 0, got {self.p_max}")

    @property
    def num_stations(self) -> int:
        return self.scenario.num_stations

    @property
    def static_total(self) -> float:
        """Total power of the static allocation P_i = P̂."""
        return self.num_stations * self.p_max

    def outage_at(self, powers: Sequence[float]) -> float:
        """Analytic P_T(θ̂) with the given station powers."""
        return outage_probability(self.scenario.with_powers(powers), self.theta_hat).probability

    def is_feasible(self, powers: Sequence[float]) -> bool:
        return self.outage_at(powers) <= self.t_hat


@dataclass(frozen=True)
class PaSolution:
    """
    Attributes:
        powers (tuple): P*_1..P*_M in watts; empty when infeasible
        total_power (float): Σ P*_i (NaN when infeasible)
        achieved_outage (float): P_T(θ̂) at the solution (at the all-max point when infeasible)
        feasible (bool): Whether the outage target is met
    """
    powers: Tuple[float, ...]
    total_power: float
    achieved_outage: float
    feasible: bool

    @classmethod
    def from_powers(cls, problem: PaProblem, powers: Sequence[float]) -> 'PaSolution':
        powers = tuple(float(p) for p in powers)
        outage = problem.outage_at(powers)
        return cls(powers, float(sum(powers)), outage,
                   outage <= problem.t_hat + NUMERIC_CONFIG['PROBABILITY_SLACK'])

    @classmethod
    def infeasible(cls, problem: PaProblem) -> 'PaSolution':
        outage = problem.outage_at([problem.p_max] * problem.num_stations)
        return cls((), math.nan, outage, False)


def check_feasibility(problem: PaProblem) -> bool:
    """
    Whether any allocation meets the outage target.

    P_T is non-increasing in every P_i, so the all-max point is the most favourable.
    """
    if problem.t_hat >= 1:
        return True
    return problem.is_feasible([problem.p_max] * problem.num_stations)


def solve_uniform_bisection(problem: PaProblem) -> PaSolution:
    """
    Smallest common power p with P_T(θ̂) <= T̂ when every station transmits p.

    Args:
        problem (PaProblem): Problem to solve

    Returns:
        PaSolution: Uniform allocation

    Raises:
        Infeasible: If even P_i = P̂ misses the target
    """
    if not check_feasibility(problem):
        raise Infeasible(f"outage target {problem.t_hat} unreachable at P̂ = {problem.p_max} W")
    m = problem.num_stations
    if problem.is_feasible([0.0] * m):
        return PaSolution.from_powers(problem, [0.0] * m)

    lo, hi = 0.0, problem.p_max
    rtol = NUMERIC_CONFIG['BISECTION_RTOL']
    for _ in range(NUMERIC_CONFIG['BISECTION_MAX_ITER']):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if problem.is_feasible([mid] * m):
            hi = mid
        else:
            lo = mid
    return PaSolution.from_powers(problem, [hi] * m)


class EvolutionarySolver:
    """
    Population search over [0, P̂]^M with repair toward the all-max corner.

    Candidates missing the outage target are moved along x + t·(P̂ − x), the direction in
    which P_T can only fall, to the smallest feasible t found by bisection. A penalty on
    the remaining violation guards the ranking against round-off at the boundary. The
    uniform bisection solution seeds the population and elitism keeps it, so the result
    never exceeds the uniform total.
    """

    def __init__(self, problem: PaProblem, budget: int, seed: int, workers: int = 1, config: Optional[dict] = None):
        self.problem = problem
        self.config = dict(EVOLUTION_CONFIG, **(config or {}))
        population = self.config['POPULATION']
        if budget < population:
            raise DomainError(f"budget {budget} is smaller than the population {population}")
        self.budget = budget
        self.generations = max(1, budget // population)
        self.rng = np.random.default_rng(seed)
        self.workers = workers
        self.evaluations = 0

    def _snap(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(x, 0.0, self.problem.p_max)
        x[x < self.config['OFF_THRESHOLD'] * self.problem.p_max] = 0.0
        return x

    def _repair(self, x: np.ndarray) -> np.ndarray:
        problem = self.problem
        if problem.is_feasible(x):
            return x
        cap = np.full_like(x, problem.p_max)
        lo, hi = 0.0, 1.0
        for _ in range(self.config['REPAIR_STEPS']):
            mid = 0.5 * (lo + hi)
            if problem.is_feasible(x + mid * (cap - x)):
                hi = mid
            else:
                lo = mid
        return x + hi * (cap - x)

    def _evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, float, float]:
        x = self._repair(self._snap(x))
        outage = self.problem.outage_at(x)
        violation = max(0.0, outage - self.problem.t_hat)
        fitness = float(x.sum())
        if violation > 0:
            fitness += self.problem.static_total * (1.0 + violation)
        return x, fitness, outage

    def _evaluate_all(self, candidates: List[np.ndarray]) -> list:
        self.evaluations += len(candidates)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(self._evaluate, candidates))
        return [self._evaluate(x) for x in candidates]

    @staticmethod
    def _rank(scored: list) -> list:
        # Equal totals: prefer the allocation with the smaller peak station power
        return sorted(scored, key=lambda item: (item[1], float(item[0].max(initial=0.0))))

    def run(self) -> PaSolution:
        problem = self.problem
        cfg = self.config
        m, p_max = problem.num_stations, problem.p_max
        size = cfg['POPULATION']

        uniform = solve_uniform_bisection(problem)
        seeds = [np.array(uniform.powers), np.full(m, p_max)]
        seeds += [self.rng.uniform(0.0, p_max, m) for _ in range(size - len(seeds))]
        population = self._rank(self._evaluate_all(seeds))

        sigma = cfg['MUTATION_SIGMA'] * p_max
        n_parents = max(2, int(round(cfg['TRUNCATION'] * size)))
        elites = cfg['ELITISM']
        for generation in range(1, self.generations):
            parents = population[:n_parents]
            children = []
            for _ in range(size - elites):
                a, b = self.rng.integers(0, n_parents, 2)
                mask = self.rng.random(m) < cfg['CROSSOVER_PROB']
                child = np.where(mask, parents[a][0], parents[b][0])
                child = child + self.rng.normal(0.0, sigma, m)
                children.append(child)
            population = self._rank(population[:elites] + self._evaluate_all(children))
            sigma *= cfg['MUTATION_DECAY']
            logger.debug("generation %d: best total %.6g W", generation, population[0][1])

        best_x, _, _ = population[0]
        solution = PaSolution.from_powers(problem, best_x)
        if not solution.feasible or solution.total_power > uniform.total_power:
            return uniform
        return solution


def solve_evolutionary(
        problem: PaProblem,
        budget: int = EVOLUTION_CONFIG['BUDGET'],
        seed: int = EVOLUTION_CONFIG['SEED'],
        workers: int = 1) -> PaSolution:
    """
    Heuristic power allocation by an elitist genetic search.

    Args:
        problem (PaProblem): Problem to solve
        budget (int): Candidate evaluations; generations = budget // population
        seed (int): Seed of the search; the result is deterministic per seed
        workers (int): Threads evaluating a generation's candidates

    Returns:
        PaSolution: Best feasible allocation found

    Raises:
        Infeasible: If no allocation meets the target
    """
    return EvolutionarySolver(problem, budget, seed, workers).run()


@dataclass(frozen=True)
class PaSweepRow:
    theta_hat: float
    lambda_i: float
    solution: PaSolution
    static_total: float

    @property
    def savings_ratio(self) -> float:
        if not self.solution.feasible or self.solution.total_power <= 0:
            return math.nan
        return self.static_total / self.solution.total_power


def sweep_pa(
        problem: PaProblem,
        thetas: Optional[Iterable[float]] = None,
        lambdas: Optional[Iterable[float]] = None,
        solver: str = 'bisect',
        budget: int = EVOLUTION_CONFIG['BUDGET'],
        seed: int = EVOLUTION_CONFIG['SEED']) -> List[PaSweepRow]:
    """
    Solve the allocation problem over a grid of thresholds and interferer densities.

    Axes left as None keep the template's value. Infeasible grid points are returned
    as rows with `feasible=False`, never raised.

    Args:
        problem (PaProblem): Template problem
        thetas (Iterable[float]): Linear thresholds θ̂
        lambdas (Iterable[float]): Densities λ_I in stations per square metre
        solver (str): 'bisect' or 'evo'
        budget (int): Evolutionary budget per grid point
        seed (int): Evolutionary seed, reused at every grid point

    Returns:
        list: One PaSweepRow per (λ, θ̂) pair, λ-major
    """
    if solver not in ('bisect', 'evo'):
        raise DomainError(f"unknown solver {solver!r}")
    thetas = [problem.theta_hat] if thetas is None else list(thetas)
    lambdas = [problem.scenario.interference.lambda_i] if lambdas is None else list(lambdas)
    if not thetas or not lambdas:
        raise DomainError("sweep axes must not be empty")

    rows = []
    for lambda_i in lambdas:
        scenario = problem.scenario.with_lambda(lambda_i)
        for theta in thetas:
            point = replace(problem, scenario=scenario, theta_hat=theta)
            try:
                if solver == 'evo':
                    solution = solve_evolutionary(point, budget, seed)
                else:
                    solution = solve_uniform_bisection(point)
            except Infeasible:
                logger.warning("infeasible at θ̂=%g, λ=%g", theta, lambda_i)
                solution = PaSolution.infeasible(point)
            rows.append(PaSweepRow(theta, lambda_i, solution, point.static_total))
    return rows
