import math
import warnings

import numpy as np
import pytest

from fourieropt.evolution import BoxBounds, DeConfig, de_generation, optimize

BOX6 = BoxBounds(np.full(6, -5.0), np.full(6, 5.0))


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


class TestBounds:
    def test_from_pairs(self):
        b = BoxBounds.from_pairs([(0, 1), (-2, 2)])
        assert b.dim == 2 and b.contains([0.5, 0.0]) and not b.contains([1.5, 0.0])

    def test_inverted(self):
        with pytest.raises(ValueError):
            BoxBounds([1.0], [0.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            BoxBounds([0.0, 0.0], [1.0])


class TestConfig:
    def test_population_floor(self):
        with pytest.raises(ValueError):
            DeConfig(population_size=3)

    def test_default_population(self):
        assert DeConfig().pop_size(2) == 30
        assert DeConfig().pop_size(10) == 90

    def test_bad_strategy(self):
        with pytest.raises(ValueError):
            DeConfig(strategy="best2exp")

    def test_bad_rates(self):
        with pytest.raises(ValueError):
            DeConfig(crossover=1.5)
        with pytest.raises(ValueError):
            DeConfig(mutation=(0.5, 2.5))

    def test_round_trip(self):
        cfg = DeConfig(population_size=20, seed=4, strategy="best1bin")
        assert DeConfig.from_dict(cfg.to_dict()) == cfg


class TestOptimize:
    @pytest.mark.parametrize("strategy", ["rand1bin", "best1bin"])
    def test_sphere(self, strategy):
        cfg = DeConfig(population_size=30, max_generations=200, seed=1, strategy=strategy,
                       stagnation_generations=0)
        res = optimize(sphere, BOX6, cfg)
        assert res.best_cost < 1e-6
        assert res.evaluation_count == 30 * 201

    def test_seed_with_optimum(self):
        res = optimize(sphere, BOX6, DeConfig(population_size=20, max_generations=5, seed=0),
                       seed_members=[np.zeros(6)])
        assert res.best_cost <= sphere(np.zeros(6)) == 0.0

    def test_constant_objective(self):
        res = optimize(lambda x: 3.25, BOX6, DeConfig(population_size=10, max_generations=10,
                                                      seed=0))
        assert res.best_cost == 3.25

    def test_history_non_increasing(self):
        res = optimize(sphere, BOX6, DeConfig(population_size=12, max_generations=60, seed=3))
        h = np.array(res.cost_history)
        assert np.all(np.diff(h) <= 0)
        assert res.best_cost == h[-1] == sphere(res.best_vector)

    def test_deterministic(self):
        cfg = DeConfig(population_size=12, max_generations=30, seed=7)
        r1, r2 = optimize(sphere, BOX6, cfg), optimize(sphere, BOX6, cfg)
        assert np.array_equal(r1.best_vector, r2.best_vector)
        assert r1.cost_history == r2.cost_history

    def test_parallel_matches_serial(self):
        cfg = DeConfig(population_size=12, max_generations=20, seed=7)
        r1 = optimize(sphere, BOX6, cfg)
        r2 = optimize(sphere, BOX6, DeConfig(population_size=12, max_generations=20, seed=7,
                                             jobs=3))
        assert np.array_equal(r1.best_vector, r2.best_vector)
        assert r1.cost_history == r2.cost_history

    def test_candidates_within_bounds(self):
        box = BoxBounds([0.0, -1.0, 10.0], [1.0, 0.0, 10.5])
        seen = []

        def f(x):
            seen.append(np.array(x))
            return float(np.sum(x))

        optimize(f, box, DeConfig(population_size=8, max_generations=25, seed=2,
                                  mutation=2.0))
        assert all(box.contains(x) for x in seen)

    def test_non_finite_is_inf(self):
        def f(x):
            return math.nan if x[0] > 0 else float(x[0] ** 2)

        res = optimize(f, BOX6, DeConfig(population_size=10, max_generations=15, seed=0))
        assert math.isfinite(res.best_cost) and res.best_vector[0] <= 0
        assert np.all((res.population_costs == np.inf) | np.isfinite(res.population_costs))

    def test_seed_dimension_mismatch(self):
        with pytest.raises(ValueError):
            optimize(sphere, BOX6, DeConfig(population_size=8, max_generations=1),
                     seed_members=[np.zeros(5)])

    def test_seed_far_outside(self):
        with pytest.raises(ValueError):
            optimize(sphere, BOX6, DeConfig(population_size=8, max_generations=1),
                     seed_members=[np.full(6, 6.0)])

    def test_seed_marginally_outside_is_clipped(self):
        s = np.full(6, 5.0 + 5e-13)
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            res = optimize(sphere, BOX6, DeConfig(population_size=8, max_generations=0, seed=0),
                           seed_members=[s])
        assert any("clipped" in str(x.message) for x in w)
        assert BOX6.contains(res.population[0])

    def test_too_many_seeds(self):
        with pytest.raises(ValueError):
            optimize(sphere, BOX6, DeConfig(population_size=4, max_generations=1),
                     seed_members=[np.zeros(6)] * 5)

    def test_stagnation_stop(self):
        res = optimize(lambda x: 1.0, BOX6, DeConfig(population_size=8, max_generations=100,
                                                     seed=0, stagnation_generations=5))
        assert res.stop_reason == "stagnation" and res.generations == 5

    def test_warm_start_dominance(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            c = rng.uniform(-4, 4, 6)
            f = lambda x, c=c: float(np.sum((np.asarray(x) - c) ** 2))
            s = rng.uniform(-5, 5, 6)
            res = optimize(f, BOX6, DeConfig(population_size=10, max_generations=5,
                                             seed=int(rng.integers(1000))), seed_members=[s])
            assert res.best_cost <= f(s)

    def test_json(self):
        res = optimize(sphere, BOX6, DeConfig(population_size=8, max_generations=3, seed=5))
        d = res.to_dict()
        assert set(d) >= {"vector", "cost", "history", "seed", "evaluation_count"}
        assert d["seed"] == 5 and len(d["vector"]) == 6


class TestGeneration:
    def test_forced_component_from_r1(self):
        rng = np.random.default_rng(0)
        pop = rng.uniform(-5, 5, (6, 4))
        costs = np.full(6, np.inf)  # every trial is accepted
        cfg = DeConfig(mutation=0.0, crossover=0.0)
        new, _ = de_generation(pop, costs, sphere, cfg, BoxBounds(np.full(4, -5.0),
                                                                  np.full(4, 5.0)), rng)
        for i in range(6):
            diff = np.flatnonzero(new[i] != pop[i])
            assert diff.size <= 1
            if diff.size:
                j = diff[0]
                others = [pop[r, j] for r in range(6) if r != i]
                assert new[i, j] in others

    def test_ties_replace(self):
        rng = np.random.default_rng(1)
        pop = rng.uniform(-5, 5, (8, 3))
        costs = np.zeros(8)
        new, new_costs = de_generation(pop, costs, lambda x: 0.0, DeConfig(), BoxBounds(
            np.full(3, -5.0), np.full(3, 5.0)), rng)
        assert not np.array_equal(new, pop) and np.all(new_costs == 0.0)

    def test_one_generation_non_increasing(self):
        rng = np.random.default_rng(2)
        pop = rng.uniform(-5, 5, (10, 6))
        costs = np.array([sphere(x) for x in pop])
        _, new_costs = de_generation(pop, costs, sphere, DeConfig(), BOX6, rng)
        assert new_costs.min() <= costs.min()
        assert np.all(new_costs <= costs)
