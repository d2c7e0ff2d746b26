import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cascadeopt.diffusion import FIELDS, LOWER, UPPER, CascadeObjective, MessageStyle, PreferenceTable
from cascadeopt.errors import ConfigError
from cascadeopt.ga import (
    TRACE_COLUMNS,
    GaConfig,
    Individual,
    crossover,
    evaluate,
    mutate,
    next_generation,
    random_genome,
    run_ga,
    tournament_select,
    write_trace_csv,
)
from cascadeopt.netgen import NetworkConfig, generate_network, reachable_set

A = MessageStyle(-0.75, 0.25, 12, 0, 1, 9)
B = MessageStyle(0.5, -0.5, 130, 2, 8, 3)


def in_domain(style):
    v = style.to_array()
    return bool(np.all(v >= LOWER) and np.all(v <= UPPER))


def polarity_objective(styles):
    # deterministic toy objective: higher polarity and more hashtags score more
    return [int(round(50 * (s.polarity + 1))) + s.hashtag_count for s in styles]


@pytest.fixture(scope="module")
def medium_objective():
    g = generate_network(NetworkConfig(node_count=120, seed=8))
    prefs = PreferenceTable.random(g.node_count, np.random.default_rng(9))
    sender = int(np.argmin(np.abs(g.out_degrees() - 6)))
    return CascadeObjective(g, prefs, sender, 0.25)


class TestConfig:
    def test_default_composition(self):
        cfg = GaConfig()
        assert (cfg.elite_count, cfg.reseed_count, cfg.offspring_count) == (3, 5, 42)

    def test_reseed_rounding(self):
        assert GaConfig(population_size=30, reseed_fraction=0.1).reseed_count == 3
        assert GaConfig(population_size=49, reseed_fraction=0.1).reseed_count == 4

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(elite_count=45),
            dict(population_size=10, elite_count=9, reseed_fraction=0.1),
            dict(tournament_size=51),
            dict(tournament_size=0),
            dict(mutation_probability=1.5),
            dict(generations=0),
            dict(reseed_fraction=-0.1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            GaConfig(**kwargs)


class TestRandomGenome:
    def test_within_domain(self):
        rng = np.random.default_rng(0)
        assert all(in_domain(random_genome(rng)) for _ in range(2000))

    def test_polarity_mean(self):
        rng = np.random.default_rng(1)
        pol = [random_genome(rng).polarity for _ in range(10_000)]
        # SE of the mean is 1/sqrt(3 * 10_000) ~ 0.0058
        assert abs(np.mean(pol)) < 0.05

    def test_time_frequencies(self):
        rng = np.random.default_rng(2)
        counts = np.bincount([random_genome(rng).time for _ in range(10_000)], minlength=3) / 10_000
        assert np.all(np.abs(counts - 1 / 3) < 0.03)

    def test_integer_extremes_reachable(self):
        rng = np.random.default_rng(3)
        g = [random_genome(rng) for _ in range(5000)]
        assert {s.length for s in g} >= {1, 140}
        assert {s.url_count for s in g} >= {0, 10}


class TestTournament:
    def test_single(self):
        ind = Individual(A, 3)
        assert tournament_select([ind], np.random.default_rng(0), 5) is ind

    def test_full_tournament_picks_best(self):
        pop = [Individual(A, f) for f in (1, 9, 4, 7)]
        rng = np.random.default_rng(0)
        # 50 draws from 4 miss the best with probability (3/4)**50
        assert all(tournament_select(pop, rng, 50) is pop[1] for _ in range(50))

    def test_tie_goes_to_first_drawn(self):
        pop = [Individual(A, 5), Individual(B, 5)]
        for seed in range(20):
            rng = np.random.default_rng(seed)
            first = int(np.random.default_rng(seed).integers(0, 2, size=3)[0])
            assert tournament_select(pop, rng, 3) is pop[first]

    def test_uniform_under_equal_fitness(self):
        pop = [Individual(A, 1) for _ in range(20)]
        rng = np.random.default_rng(4)
        ids = {id(p): i for i, p in enumerate(pop)}
        counts = np.bincount([ids[id(tournament_select(pop, rng, 5))] for _ in range(10_000)], minlength=20)
        assert stats.chisquare(counts).pvalue > 0.01


class TestCrossover:
    def test_identical_parents(self):
        assert crossover(A, A, np.random.default_rng(0)) == A

    @given(st.integers(0, 2**32))
    def test_genes_come_from_parents(self, seed):
        child = crossover(A, B, np.random.default_rng(seed))
        for c, a, b in zip(child.as_tuple(), A.as_tuple(), B.as_tuple()):
            assert c in (a, b)

    def test_half_and_half(self):
        rng = np.random.default_rng(5)
        hits = np.zeros(6)
        for _ in range(10_000):
            child = crossover(A, B, rng)
            hits += [c == a for c, a in zip(child.as_tuple(), A.as_tuple())]
        assert np.all(np.abs(hits / 10_000 - 0.5) < 0.02)


class TestMutate:
    def test_zero_probability(self):
        rng = np.random.default_rng(0)
        assert all(mutate(A, 0.0, rng) == A for _ in range(500))

    def test_certain_mutation_changes_at_most_one_gene(self):
        rng = np.random.default_rng(1)
        changed_any = 0
        for _ in range(2000):
            child = mutate(A, 1.0, rng)
            diff = sum(x != y for x, y in zip(child.as_tuple(), A.as_tuple()))
            assert diff <= 1 and in_domain(child)
            changed_any += diff
        # discrete genes coincide with at most 1/3 chance, so most draws differ
        assert changed_any > 1500

    def test_rate(self):
        rng = np.random.default_rng(2)
        mutated = sum(mutate(A, 0.05, rng) != A for _ in range(10_000))
        # a resampled discrete gene can land on its old value: length 1/140,
        # time 1/3, counts 1/11 each
        p_visible = (1 + 1 + 139 / 140 + 2 / 3 + 10 / 11 + 10 / 11) / 6
        assert mutated / 10_000 == pytest.approx(0.05 * p_visible, abs=0.01)

    def test_each_gene_targeted(self):
        rng = np.random.default_rng(3)
        seen = set()
        for _ in range(3000):
            child = mutate(A, 1.0, rng)
            seen |= {FIELDS[i] for i, (x, y) in enumerate(zip(child.as_tuple(), A.as_tuple())) if x != y}
        assert seen == set(FIELDS)


class TestEvaluate:
    def test_cache_avoids_rescoring(self):
        calls = []

        def objective(styles):
            calls.append(len(styles))
            return [1] * len(styles)

        cache = {}
        pop = [Individual(A), Individual(A), Individual(B)]
        evaluate(pop, objective, cache)
        assert calls == [2] and [p.fitness for p in pop] == [1, 1, 1]
        evaluate([Individual(A), Individual(B)], objective, cache)
        assert calls == [2]


class TestNextGeneration:
    def make_population(self, cfg, seed=0):
        rng = np.random.default_rng(seed)
        pop = [Individual(random_genome(rng)) for _ in range(cfg.population_size)]
        evaluate(pop, polarity_objective)
        return pop, rng

    def test_composition_and_elites(self):
        cfg = GaConfig()
        pop, rng = self.make_population(cfg)
        ranked = sorted(pop, key=Individual.sort_key)
        replay = np.random.default_rng()
        replay.bit_generator.state = rng.bit_generator.state
        new = next_generation(pop, polarity_objective, cfg, rng)
        assert len(new) == 50
        # reseeds are the first draws after cloning elites
        assert [i.genome for i in new[3:8]] == [random_genome(replay) for _ in range(5)]
        assert len(new[8:]) == 42
        assert [i.genome for i in new[:3]] == [i.genome for i in ranked[:3]]
        assert max(i.fitness for i in new) >= max(i.fitness for i in pop)
        assert all(i.fitness is not None for i in new)

    def test_elite_ties_by_genome_order(self):
        cfg = GaConfig(population_size=10, elite_count=2, reseed_fraction=0.1, tournament_size=2)
        genomes = [MessageStyle(0.1 * i - 0.5, 0.0, 10, 0, 0, 0) for i in range(10)]
        pop = [Individual(g, 7) for g in genomes]
        new = next_generation(pop, lambda s: [0] * len(s), cfg, np.random.default_rng(0))
        assert [i.genome for i in new[:2]] == genomes[:2]

    def test_size_mismatch(self):
        cfg = GaConfig()
        pop, rng = self.make_population(GaConfig(population_size=20, elite_count=1))
        with pytest.raises(ConfigError):
            next_generation(pop, polarity_objective, cfg, rng)

    def test_unevaluated(self):
        cfg = GaConfig(population_size=10, elite_count=1, tournament_size=3)
        pop = [Individual(A) for _ in range(10)]
        with pytest.raises(ConfigError):
            next_generation(pop, polarity_objective, cfg, np.random.default_rng(0))


class TestRunGa:
    def test_single_generation(self):
        res = run_ga(polarity_objective, GaConfig(generations=1, seed=1))
        assert len(res.records) == 1
        assert in_domain(res.records[0].best_genome)
        assert res.best.fitness == res.records[0].best_fitness

    def test_determinism(self, medium_objective):
        cfg = GaConfig(generations=40, seed=99)
        a, b = run_ga(medium_objective, cfg), run_ga(medium_objective, cfg)
        assert a.records == b.records
        fa, fb = io.StringIO(), io.StringIO()
        write_trace_csv(a.records, fa)
        write_trace_csv(b.records, fb)
        assert fa.getvalue() == fb.getvalue()

    def test_seed_matters(self, medium_objective):
        a = run_ga(medium_objective, GaConfig(generations=5, seed=1))
        b = run_ga(medium_objective, GaConfig(generations=5, seed=2))
        assert a.records != b.records

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**64 - 1))
    def test_elitism_and_closure(self, seed):
        g = generate_network(NetworkConfig(node_count=40, seed=seed % 1000))
        prefs = PreferenceTable.random(g.node_count, np.random.default_rng(seed))
        objective = CascadeObjective(g, prefs, int(np.argmax(g.out_degrees())), 0.25)
        res = run_ga(objective, GaConfig(generations=30, seed=seed))
        best = [r.best_fitness for r in res.records]
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
        assert all(in_domain(i.genome) for i in res.final_population)
        assert len(res.final_population) == 50
        assert best[-1] <= objective.upper_bound()
        scores = objective([i.genome for i in res.final_population])
        assert [i.fitness for i in res.final_population] == scores.tolist()

    def test_record_fields(self):
        res = run_ga(polarity_objective, GaConfig(generations=3, seed=4))
        for idx, r in enumerate(res.records):
            assert r.generation_index == idx
            assert r.best_fitness == polarity_objective([r.best_genome])[0]
            assert r.best_fitness >= r.mean_fitness

    def test_planted_optimum(self):
        g = generate_network(NetworkConfig(node_count=12, seed=21))
        sender = max(g.node_ids, key=lambda s: len(reachable_set(g, s)))
        target = len(reachable_set(g, sender))
        assert target >= 3
        point = MessageStyle(0.3, -0.6, 88, 2, 3, 7)
        objective = CascadeObjective(g, PreferenceTable.uniform(g.node_count, point), sender, 0.25)
        hits = sum(run_ga(objective, GaConfig(generations=50, seed=s)).best.fitness == target for s in range(20))
        assert hits >= 19

    def test_trace_csv(self):
        res = run_ga(polarity_objective, GaConfig(generations=2, seed=4))
        fh = io.StringIO()
        write_trace_csv(res.records, fh)
        lines = fh.getvalue().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert TRACE_COLUMNS == ("generation", "best_fitness", "mean_fitness") + FIELDS
        assert len(lines) == 3 and lines[1].startswith("0,")
