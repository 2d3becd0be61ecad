import math

import numpy as np
import pytest

from smoothbench.calibration import (
    CalibrationResult,
    GaConfig,
    Individual,
    calibrate,
    desk_config,
    repair_genome,
    roulette_select,
    search_bounds,
    two_point_crossover,
)
from smoothbench.errors import EvaluationFailure, InvalidParams, NonParametricMethod
from smoothbench.evaluation import evaluate_method
from smoothbench.smoothers import PARAM_SPECS, MethodId, SmootherSpec
from smoothbench.timeseries import TimeSeries

from conftest import random_series


def small_config(**kw):
    base = dict(population_size=12, iterations=10, elitism_fraction=0.1, seed=3)
    base.update(kw)
    return GaConfig(**base)


class TestGaConfig:
    def test_table_defaults(self):
        cfg = GaConfig()
        assert (cfg.population_size, cfg.iterations) == (100, 1000)
        assert (cfg.mutation_rate, cfg.crossover_rate, cfg.elitism_fraction) == (
            0.1, 0.8, 0.05,
        )

    def test_desk_budget(self):
        cfg = desk_config()
        assert (cfg.population_size, cfg.iterations) == (30, 100)

    def test_validation(self):
        with pytest.raises(ValueError):
            GaConfig(population_size=1)
        with pytest.raises(ValueError):
            GaConfig(mutation_rate=1.5)
        with pytest.raises(ValueError):
            GaConfig(population_size=10, elitism_fraction=0.05)


class TestRouletteSelect:
    def test_singleton(self):
        pop = [Individual((1.0,), fitness=5.0)]
        assert roulette_select(pop, np.random.default_rng(0)) is pop[0]

    def test_best_dominates_at_small_epsilon(self):
        pop = [Individual((0.0,), fitness=0.0), Individual((1.0,), fitness=100.0)]
        gen = np.random.default_rng(1)
        picks = sum(roulette_select(pop, gen) is pop[0] for _ in range(2000))
        assert picks > 1990  # weight ratio (100+eps):eps

    def test_uniform_when_all_equal(self):
        pop = [Individual((float(i),), fitness=7.0) for i in range(4)]
        gen = np.random.default_rng(2)
        counts = np.zeros(4)
        draws = 10000
        for _ in range(draws):
            idx = pop.index(roulette_select(pop, gen))
            counts[idx] += 1
        expected = draws / 4
        # three-sigma band of a binomial with p = 1/4
        sigma = math.sqrt(draws * 0.25 * 0.75)
        assert np.all(np.abs(counts - expected) < 3 * sigma)

    def test_infinite_fitness_never_selected(self):
        pop = [Individual((0.0,), fitness=1.0), Individual((1.0,), fitness=math.inf)]
        gen = np.random.default_rng(3)
        assert all(roulette_select(pop, gen) is pop[0] for _ in range(200))

    def test_all_infinite_falls_back_to_uniform(self):
        pop = [Individual((float(i),), fitness=math.inf) for i in range(3)]
        gen = np.random.default_rng(4)
        seen = {pop.index(roulette_select(pop, gen)) for _ in range(100)}
        assert seen == {0, 1, 2}


class TestCrossover:
    def test_identical_parents_fixed_point(self):
        gen = np.random.default_rng(0)
        a = (1.0, 2.0, 3.0, 4.0)
        ca, cb = two_point_crossover(a, a, gen)
        assert ca == a and cb == a

    def test_segment_exchange_structure(self):
        gen = np.random.default_rng(1)
        a, b = (1.0, 1.0, 1.0, 1.0), (2.0, 2.0, 2.0, 2.0)
        for _ in range(100):
            ca, cb = two_point_crossover(a, b, gen)
            # children are complementary and the exchanged block is contiguous
            assert tuple(3.0 - g for g in ca) == cb
            flips = [i for i in range(1, 4) if ca[i] != ca[i - 1]]
            assert len(flips) <= 2

    def test_hand_traced_cut_points(self):
        a, b = (1.0, 1.0, 1.0, 1.0), (2.0, 2.0, 2.0, 2.0)
        for seed in range(200):
            gen = np.random.default_rng(seed)
            ca, cb = two_point_crossover(a, b, gen)
            if ca == (1.0, 2.0, 2.0, 1.0):
                assert cb == (2.0, 1.0, 1.0, 2.0)
                return
        pytest.fail("cuts (1, 3) never drawn in 200 seeds")

    def test_length_one_swaps_or_keeps(self):
        gen = np.random.default_rng(5)
        outcomes = {two_point_crossover((1.0,), (2.0,), gen) for _ in range(50)}
        assert outcomes == {((1.0,), (2.0,)), ((2.0,), (1.0,))}

    def test_length_two_one_point(self):
        gen = np.random.default_rng(6)
        ca, cb = two_point_crossover((1.0, 1.0), (2.0, 2.0), gen)
        assert ca == (1.0, 2.0) and cb == (2.0, 1.0)


class TestRepair:
    def test_parity_and_bounds(self):
        bounds = PARAM_SPECS[MethodId.SMA]
        assert repair_genome(MethodId.SMA, bounds, (4.2,)) == (5.0,)
        assert repair_genome(MethodId.SMA, bounds, (100.0,)) == (21.0,)
        assert repair_genome(MethodId.SMA, bounds, (-3.0,)) == (3.0,)

    def test_sgf_cross_constraint(self):
        bounds = PARAM_SPECS[MethodId.SGF]
        assert repair_genome(MethodId.SGF, bounds, (5.0, 6.7)) == (5.0, 4.0)

    def test_adp_cross_constraint(self):
        bounds = PARAM_SPECS[MethodId.ADP]
        w, dmin, dmax = repair_genome(MethodId.ADP, bounds, (5.0, 2.0, 0.0))
        assert dmin <= dmax < w

    def test_search_bounds_shrink_with_series_length(self):
        full = search_bounds(MethodId.SMA, 100)
        assert full[0].hi == 21
        short = search_bounds(MethodId.SMA, 9)
        assert short[0].hi == 9
        gam = search_bounds(MethodId.GAM, 20)
        assert gam[0].hi == 20
        ari = search_bounds(MethodId.ARI, 9)
        assert ari[0].hi == 3


class TestCalibrate:
    def test_surrogate_recovers_grid_optimum(self, noisy_sine):
        result = calibrate(
            MethodId.SMA, noisy_sine, small_config(), objective=lambda g: (g[0] - 7.0) ** 2
        )
        assert result.spec.params == (7.0,)
        assert result.fitness == 0.0

    def test_flat_objective_is_deterministic(self, noisy_sine):
        first = calibrate(MethodId.KER, noisy_sine, small_config(), objective=lambda g: 1.0)
        second = calibrate(MethodId.KER, noisy_sine, small_config(), objective=lambda g: 1.0)
        assert first.spec == second.spec
        assert first.history == second.history

    def test_nonparametric_rejected(self, noisy_sine):
        with pytest.raises(NonParametricMethod):
            calibrate(MethodId.TUK, noisy_sine, small_config())

    def test_history_monotone_and_elitism(self, noisy_sine):
        result = calibrate(
            MethodId.SPL, noisy_sine, small_config(iterations=15), objective="mae"
        )
        hist = np.array(result.history)
        assert len(hist) == 16
        assert np.all(np.diff(hist) <= 0.0)

    def test_every_evaluated_genome_is_feasible(self, noisy_sine):
        seen = []

        def spy(genome):
            seen.append(genome)
            return float(np.sum(np.square(genome)))

        calibrate(MethodId.SGF, noisy_sine, small_config(iterations=6), objective=spy)
        bounds = search_bounds(MethodId.SGF, len(noisy_sine))
        assert seen
        for genome in seen:
            assert all(b.is_valid(g) for b, g in zip(bounds, genome))
            assert genome[1] < genome[0]  # degree < window

    def test_sgf_on_quadratic_prefers_degree_two_or_more(self):
        t = np.arange(30, dtype=float)
        series = TimeSeries.from_values(0.3 * t**2 - 2.0 * t + 5.0)
        result = calibrate(
            MethodId.SGF, series, small_config(iterations=12), objective="mae"
        )
        assert result.spec.params[1] >= 2

    def test_patience_stops_early(self, noisy_sine):
        result = calibrate(
            MethodId.SMA,
            noisy_sine,
            small_config(iterations=50, patience=3),
            objective=lambda g: 0.0,
        )
        assert len(result.history) - 1 < 50

    def test_aic_objective_matches_evaluate_method(self, rng):
        series = random_series(rng, 25)
        result = calibrate(MethodId.SPL, series, small_config(iterations=8))
        check = evaluate_method(SmootherSpec(MethodId.SPL, result.spec.params), series)
        assert result.fitness == pytest.approx(check.aic, rel=1e-12)

    def test_sporadic_failures_penalized_not_fatal(self, noisy_sine):
        # one lattice value raising -> those individuals get +inf fitness and
        # the search still lands on the true optimum
        def flaky(genome):
            if genome[0] == 21.0:
                raise InvalidParams("synthetic failure")
            return (genome[0] - 7.0) ** 2

        result = calibrate(
            MethodId.SMA, noisy_sine, small_config(seed=0, iterations=5), objective=flaky
        )
        assert result.spec.params == (7.0,)

    def test_widespread_failures_abort(self, noisy_sine):
        def broken(genome):
            if genome[0] > 9.0:
                raise InvalidParams("synthetic failure")
            return 0.0

        with pytest.raises(EvaluationFailure):
            calibrate(
                MethodId.SMA, noisy_sine, small_config(seed=0, iterations=5), objective=broken
            )

    def test_combined_objective_runs(self, rng):
        series = random_series(rng, 25)
        result = calibrate(
            MethodId.KER, series, small_config(iterations=5), objective="combined"
        )
        assert isinstance(result, CalibrationResult)
        assert math.isfinite(result.fitness)
