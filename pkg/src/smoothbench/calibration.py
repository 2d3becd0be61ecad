"""Genetic-algorithm parameter search for the parametric smoothers.

Minimizes a LOOCV-based objective (AIC by default, MAE or an equal-weight
z-scored combination selectable) over each method's parameter box.  The
operators follow the classic configuration: roulette-wheel selection under a
minimization transform, two-point crossover, per-gene uniform resampling
mutation and a small copied-unchanged elite.  Integer genes are rounded and
odd-window genes snapped to the nearest odd value whenever a genome is
created, so every evaluated genome is feasible.

All randomness flows from one seeded generator; for a fixed (method, series,
config, objective) the full trace is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationFailure, NonParametricMethod, SmoothbenchError
from .evaluation import PerformanceIndex, evaluate_method
from .smoothers import PARAM_SPECS, MethodId, ParamSpec, SmootherSpec
from .timeseries import TimeSeries

OBJECTIVES = ("aic", "mae", "combined")
MAX_FAILURE_FRACTION = 0.1


@dataclass(frozen=True)
class GaConfig:
    """GA hyperparameters; the defaults are the full-fidelity configuration."""

    population_size: int = 100
    iterations: int = 1000
    mutation_rate: float = 0.1
    crossover_rate: float = 0.8
    elitism_fraction: float = 0.05
    seed: int = 42
    patience: int | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        for name in ("mutation_rate", "crossover_rate", "elitism_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.elitism_fraction * self.population_size < 1.0:
            raise ValueError("elitism must amount to at least one individual")

    @property
    def elite_count(self) -> int:
        return max(1, int(round(self.elitism_fraction * self.population_size)))


def desk_config(seed: int = 42, patience: int | None = None) -> GaConfig:
    """Reduced desk-scale budget used by the CLI unless full fidelity is asked."""
    return GaConfig(population_size=30, iterations=100, seed=seed, patience=patience)


@dataclass
class Individual:
    genome: tuple[float, ...]
    fitness: float = math.inf
    failed: bool = False


@dataclass(frozen=True)
class CalibrationResult:
    """Best spec found plus the per-generation best-fitness trace."""

    spec: SmootherSpec
    fitness: float
    history: tuple[float, ...]
    evaluations: int


def search_bounds(method: MethodId, n: int) -> tuple[ParamSpec, ...]:
    """Catalog bounds shrunk so every candidate is applicable to length n."""
    out = []
    for b in PARAM_SPECS[MethodId(method)]:
        hi = b.hi
        if b.odd and hi > n:
            hi = n if n % 2 == 1 else n - 1
        elif b.name == "basis_dim" and hi > n:
            hi = n
        elif b.name == "order":
            hi = min(hi, max(1, (n - 3) // 2))
        out.append(ParamSpec(b.name, b.lo, hi, b.integer, b.odd))
    return tuple(out)


def repair_genome(
    method: MethodId, bounds: Sequence[ParamSpec], raw: Sequence[float]
) -> tuple[float, ...]:
    """Per-gene clamp/round/parity snap plus cross-parameter constraints."""
    genes = [b.repair(x) for b, x in zip(bounds, raw)]
    if method is MethodId.SGF:
        genes[1] = min(genes[1], genes[0] - 1)
    elif method is MethodId.ADP:
        genes[2] = min(max(genes[2], genes[1]), genes[0] - 1)
    return tuple(genes)


def roulette_select(population: Sequence[Individual], rng: np.random.Generator) -> Individual:
    """Sample with probability proportional to (worst finite - fitness + eps)."""
    fitnesses = [ind.fitness for ind in population]
    finite = [f for f in fitnesses if math.isfinite(f)]
    if not finite:
        idx = int(rng.integers(len(population)))
        return population[idx]
    max_f = max(finite)
    min_f = min(finite)
    eps = 1e-12 * (1.0 + abs(max_f) + abs(min_f))
    weights = np.empty(len(population))
    for i, f in enumerate(fitnesses):
        if f == math.inf:
            weights[i] = 0.0
        else:
            clamped = min_f - 1.0 if f == -math.inf else f
            weights[i] = max_f - clamped + eps
    total = float(weights.sum())
    if total <= 0.0:
        idx = int(rng.integers(len(population)))
        return population[idx]
    pick = rng.uniform(0.0, total)
    idx = int(np.searchsorted(np.cumsum(weights), pick, side="right"))
    return population[min(idx, len(population) - 1)]


def two_point_crossover(
    a: Sequence[float],
    b: Sequence[float],
    rng: np.random.Generator,
    bounds: Sequence[ParamSpec] | None = None,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Exchange the segment between two uniform cut points.

    Genomes shorter than 3 degrade to a one-point exchange (length 2) or a
    random swap (length 1).
    """
    length = len(a)
    if length != len(b):
        raise ValueError("genomes must have equal length")
    if length == 1:
        if rng.random() < 0.5:
            child_a, child_b = tuple(b), tuple(a)
        else:
            child_a, child_b = tuple(a), tuple(b)
    elif length == 2:
        child_a = (a[0], b[1])
        child_b = (b[0], a[1])
    else:
        c1, c2 = sorted(rng.choice(np.arange(1, length), size=2, replace=False))
        child_a = tuple(a[:c1]) + tuple(b[c1:c2]) + tuple(a[c2:])
        child_b = tuple(b[:c1]) + tuple(a[c1:c2]) + tuple(b[c2:])
    if bounds is not None:
        child_a = tuple(s.repair(g) for s, g in zip(bounds, child_a))
        child_b = tuple(s.repair(g) for s, g in zip(bounds, child_b))
    return child_a, child_b


def _random_genome(bounds: Sequence[ParamSpec], rng: np.random.Generator) -> list[float]:
    return [rng.uniform(b.lo, b.hi) for b in bounds]


def _mutate(
    genome: Sequence[float],
    bounds: Sequence[ParamSpec],
    rate: float,
    rng: np.random.Generator,
) -> list[float]:
    out = list(genome)
    for i, b in enumerate(bounds):
        if rng.random() < rate:
            out[i] = rng.uniform(b.lo, b.hi)
    return out


def _quantize(genome: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(f"{g:.6g}") for g in genome)


class _FitnessCache:
    """Evaluate-once cache over quantized genomes."""

    def __init__(self, evaluate: Callable[[tuple[float, ...]], float]):
        self._evaluate = evaluate
        self._store: dict[tuple[float, ...], tuple[float, bool]] = {}
        self.evaluations = 0

    def __call__(self, genome: tuple[float, ...]) -> tuple[float, bool]:
        key = _quantize(genome)
        hit = self._store.get(key)
        if hit is not None:
            return hit
        try:
            value = float(self._evaluate(genome))
            failed = False
        except SmoothbenchError:
            value, failed = math.inf, True
        self.evaluations += 1
        self._store[key] = (value, failed)
        return value, failed


def _index_objective(
    objective: str, series: TimeSeries, method: MethodId
) -> Callable[[tuple[float, ...]], PerformanceIndex]:
    def run(genome: tuple[float, ...]) -> PerformanceIndex:
        return evaluate_method(SmootherSpec(method, genome), series)

    return run


def calibrate(
    method: MethodId,
    series: TimeSeries,
    config: GaConfig | None = None,
    objective: "str | Callable[[tuple[float, ...]], float]" = "aic",
) -> CalibrationResult:
    """Run the GA and return the best-ever genome as a SmootherSpec.

    ``objective`` is one of {"aic", "mae", "combined"} (computed from the
    LOOCV evaluation) or a callable mapping a repaired parameter tuple to a
    fitness value, lower is better (used for surrogate tests).
    """
    method = MethodId(method)
    config = config or GaConfig()
    bounds = search_bounds(method, len(series))
    if not bounds:
        raise NonParametricMethod(f"{method.value} has no parameters to calibrate")
    rng = np.random.default_rng(config.seed)

    if callable(objective):
        raw_objective = objective
    else:
        if objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES} or callable")
        index_of = _index_objective(objective, series, method)
        z_stats: list[tuple[float, float]] | None = None

        def raw_objective(genome: tuple[float, ...]) -> float:
            pi = index_of(genome)
            if objective == "aic":
                return pi.aic
            if objective == "mae":
                return pi.mae
            assert z_stats is not None, "combined objective used before baseline set"
            feats = (pi.mae, pi.var, pi.aic)
            return sum(
                ((_clamp_aic(f) if i == 2 else f) - mu) / sd
                for i, (f, (mu, sd)) in enumerate(zip(feats, z_stats))
            ) / 3.0

    cache = _FitnessCache(raw_objective)

    def evaluate_population(pop: list[Individual]) -> None:
        failures = 0
        for ind in pop:
            ind.fitness, ind.failed = cache(ind.genome)
            failures += ind.failed
        if failures > MAX_FAILURE_FRACTION * config.population_size:
            raise EvaluationFailure(
                f"{failures}/{len(pop)} evaluations failed for {method.value}; "
                "population is not viable"
            )

    population = [
        Individual(repair_genome(method, bounds, _random_genome(bounds, rng)))
        for _ in range(config.population_size)
    ]

    if not callable(objective) and objective == "combined":
        # freeze the z-score baseline on the initial population so the
        # scalarization stays a fixed function for the rest of the run
        triples = []
        for ind in population:
            try:
                pi = index_of(ind.genome)
                triples.append((pi.mae, pi.var, _clamp_aic(pi.aic)))
            except SmoothbenchError:
                continue
        if not triples:
            raise EvaluationFailure(f"no viable individual to baseline {method.value}")
        arr = np.asarray(triples)
        z_stats = [
            (float(arr[:, i].mean()), float(arr[:, i].std()) or 1.0) for i in range(3)
        ]

    evaluate_population(population)
    best = min(population, key=lambda ind: ind.fitness)
    best_genome, best_fitness = best.genome, best.fitness
    history = [best_fitness]
    last_improvement = 0

    for gen in range(config.iterations):
        elite = sorted(population, key=lambda ind: ind.fitness)[: config.elite_count]
        children: list[Individual] = []
        while len(children) < config.population_size - config.elite_count:
            pa = roulette_select(population, rng)
            pb = roulette_select(population, rng)
            if rng.random() < config.crossover_rate:
                ga, gb = two_point_crossover(pa.genome, pb.genome, rng)
            else:
                ga, gb = pa.genome, pb.genome
            for genome in (ga, gb):
                if len(children) >= config.population_size - config.elite_count:
                    break
                mutated = _mutate(genome, bounds, config.mutation_rate, rng)
                children.append(Individual(repair_genome(method, bounds, mutated)))
        evaluate_population(children)
        population = [Individual(e.genome, e.fitness, e.failed) for e in elite] + children
        gen_best = min(population, key=lambda ind: ind.fitness)
        if gen_best.fitness < best_fitness:
            best_genome, best_fitness = gen_best.genome, gen_best.fitness
            last_improvement = gen + 1
        history.append(best_fitness)
        if config.patience is not None and (gen + 1) - last_improvement >= config.patience:
            break

    if not math.isfinite(best_fitness) and best_fitness > 0:
        raise EvaluationFailure(f"no viable parameter vector found for {method.value}")
    return CalibrationResult(
        spec=SmootherSpec(method, best_genome),
        fitness=best_fitness,
        history=tuple(history),
        evaluations=cache.evaluations,
    )


def _clamp_aic(aic: float) -> float:
    # the -inf zero-residual sentinel must not poison z-scores
    return -1e12 if aic == -math.inf else aic
