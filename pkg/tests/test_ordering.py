import itertools
import math
from collections import deque

import numpy as np
import pytest

from boosting.l2boost import BoostConfig
from core.Dag import Dag
from core.Dataset import Dataset
from ordering.permutations import (Permutation, distance_to_ordering_set, enumerate_topological_orderings,
                                   graph_from_ordering, transposition_distance)
from ordering.score import (ScoreCache, best_ordering, fill_score_cache, node_residual_variance,
                            score_ordering)
from semgen.generators import cosine_pair_config, generate_dataset
from utils.errors import DegenerateVariableError, DimensionError, SearchLimitError

CFG = BoostConfig()


def _adjacent_swap_bfs(p):
    """Distances from every permutation to every other over the adjacent-swap graph"""
    perms = list(itertools.permutations(range(p)))
    table = {}
    for start in perms:
        dist = {start: 0}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for i in range(p - 1):
                nxt = list(cur)
                nxt[i], nxt[i + 1] = nxt[i + 1], nxt[i]
                nxt = tuple(nxt)
                if nxt not in dist:
                    dist[nxt] = dist[cur] + 1
                    queue.append(nxt)
        table[start] = dist
    return table


class TestPermutation:
    def test_positions_inverse(self):
        pi = Permutation((2, 0, 1))
        assert pi.positions == (1, 2, 0)
        assert Permutation.from_positions(pi.positions) == pi
        assert pi.predecessors(1) == frozenset({2, 0})

    def test_one_based_round_trip(self):
        assert Permutation.from_one_based((2, 3, 1)).one_based() == (2, 3, 1)

    def test_not_a_bijection(self):
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))


class TestTranspositionDistance:
    def test_identity(self):
        assert transposition_distance(Permutation((1, 0, 2)), Permutation((1, 0, 2))) == 0

    def test_one_adjacent_swap(self):
        a, b = Permutation.from_one_based((1, 2, 3)), Permutation.from_one_based((2, 1, 3))
        assert transposition_distance(a, b) == 1

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_matches_swap_graph_bfs(self, p):
        table = _adjacent_swap_bfs(p)
        for a, dist in table.items():
            for b, expected in dist.items():
                assert transposition_distance(Permutation(a), Permutation(b)) == expected

    def test_metric_properties(self):
        perms = [Permutation(s) for s in itertools.permutations(range(4))]
        for a, b, c in itertools.product(perms[::3], perms[::2], perms[::5]):
            ab = transposition_distance(a, b)
            assert ab == transposition_distance(b, a)
            assert ab <= transposition_distance(a, c) + transposition_distance(c, b)
            assert (ab == 0) == (a == b)

    def test_cayley_variant(self):
        a, b = Permutation((0, 1, 2)), Permutation((2, 1, 0))
        assert transposition_distance(a, b, kind="cayley") == 1
        assert transposition_distance(a, b) == 3
        assert transposition_distance(Permutation((1, 2, 0)), a, kind="cayley") == 2

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            transposition_distance(Permutation((0, 1)), Permutation((0, 1, 2)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            transposition_distance(Permutation((0, 1)), Permutation((1, 0)), kind="hamming")


class TestTopologicalOrderings:
    def test_empty_graph(self):
        assert len(enumerate_topological_orderings(Dag(3))) == 6

    def test_fork(self):
        g = Dag(3, [(1, 0), (1, 2)])
        expected = {Permutation.from_one_based((2, 1, 3)), Permutation.from_one_based((2, 3, 1))}
        assert enumerate_topological_orderings(g) == expected

    def test_chain(self):
        assert enumerate_topological_orderings(Dag(3, [(0, 1), (1, 2)])) == {Permutation((0, 1, 2))}

    def test_guard(self):
        with pytest.raises(SearchLimitError):
            enumerate_topological_orderings(Dag(11))


class TestDistanceToOrderingSet:
    def test_member_has_distance_zero(self):
        g = Dag(3, [(1, 0), (1, 2)])
        assert distance_to_ordering_set(Permutation((1, 2, 0)), g) == 0

    def test_fork_identity(self):
        assert distance_to_ordering_set(Permutation.identity(3), Dag(3, [(1, 0), (1, 2)])) == 1

    def test_empty_graph(self):
        for seq in itertools.permutations(range(4)):
            assert distance_to_ordering_set(Permutation(seq), Dag(4)) == 0

    def test_graph_from_ordering_is_complete(self):
        g = graph_from_ordering(Permutation((2, 0, 1)))
        assert g.edges == {(2, 0), (2, 1), (0, 1)}
        assert enumerate_topological_orderings(g) == {Permutation((2, 0, 1))}


class TestNodeResidualVariance:
    def test_degenerate_column(self):
        data = Dataset(np.column_stack([np.full(6, 2.0), np.arange(6.0)]))
        with pytest.raises(DegenerateVariableError):
            node_residual_variance(data, 0, (), CFG)

    def test_empty_set_is_mean_square(self):
        data = Dataset(np.array([[1.0], [-1.0]]))
        assert node_residual_variance(data, 0, (), CFG) == pytest.approx(1.0)

    def test_own_index_rejected(self, cosine_pair):
        with pytest.raises(ValueError):
            node_residual_variance(cosine_pair, 1, (1,), CFG)

    def test_cosine_effect_halves_variance(self, cosine_pair):
        cache = ScoreCache()
        marginal = node_residual_variance(cosine_pair, 1, (), CFG, cache)
        conditional = node_residual_variance(cosine_pair, 1, (0,), CFG, cache)
        assert conditional * 2 < marginal
        assert cache.regressions == 2

    def test_memoized(self, cosine_pair):
        cache = ScoreCache()
        first = node_residual_variance(cosine_pair, 1, (0,), CFG, cache)
        assert node_residual_variance(cosine_pair, 1, [0], CFG, cache) == first
        assert cache.regressions == 1


class TestScoreOrdering:
    def test_single_node(self):
        values = np.random.default_rng(4).standard_normal((30, 1))
        data = Dataset(values).prepare()
        assert score_ordering(data, Permutation.identity(1), CFG) == pytest.approx(
            math.log(np.mean(data.values[:, 0] ** 2)))

    def test_cosine_pair_prefers_causal_order(self, cosine_pair):
        cache = ScoreCache()
        causal = score_ordering(cosine_pair, Permutation((0, 1)), CFG, cache)
        anticausal = score_ordering(cosine_pair, Permutation((1, 0)), CFG, cache)
        assert causal < anticausal

    def test_cache_reproduces_fresh_scores(self, chain3):
        data, _ = chain3
        shared = ScoreCache()
        for seq in itertools.permutations(range(3)):
            pi = Permutation(seq)
            assert score_ordering(data, pi, CFG, shared) == score_ordering(data, pi, CFG, ScoreCache())

    def test_regression_count_bound(self, chain3):
        data, _ = chain3
        cache = ScoreCache()
        for seq in itertools.permutations(range(3)):
            score_ordering(data, Permutation(seq), CFG, cache)
        assert cache.regressions <= 3 * 2 ** 2

    def test_length_mismatch(self, chain3):
        data, _ = chain3
        with pytest.raises(DimensionError):
            score_ordering(data, Permutation.identity(2), CFG)

    @pytest.mark.slow
    def test_cosine_pair_over_seeds(self):
        wins = 0
        for seed in range(20):
            data = generate_dataset(cosine_pair_config(500, seed)).data.prepare()
            cache = ScoreCache()
            wins += score_ordering(data, Permutation((0, 1)), CFG, cache) < \
                score_ordering(data, Permutation((1, 0)), CFG, cache)
        assert wins >= 19


class TestBestOrdering:
    def test_single_variable(self):
        data = Dataset(np.random.default_rng(1).standard_normal((20, 1)))
        pi, _ = best_ordering(data, CFG)
        assert pi == Permutation.identity(1)

    def test_cosine_pair(self, cosine_pair):
        pi, score = best_ordering(cosine_pair, CFG)
        assert pi.one_based() == (1, 2)
        assert score == pytest.approx(score_ordering(cosine_pair, pi, CFG))

    def test_chain(self, chain3):
        data, truth = chain3
        pi, _ = best_ordering(data, CFG)
        assert distance_to_ordering_set(pi, truth) == 0

    def test_parallel_fill_gives_same_answer(self, chain3):
        data, _ = chain3
        cache = ScoreCache()
        fill_score_cache(data, CFG, cache, workers=4)
        assert len(cache) == 3 * 2 ** 2
        assert cache.regressions == len(cache)
        assert best_ordering(data, CFG, cache=cache) == best_ordering(data, CFG, workers=2)

    def test_ties_keep_lexicographically_smallest(self):
        # with zero boosting steps both orders score the same
        x = np.random.default_rng(2).standard_normal(40)
        data = Dataset(np.column_stack([x, x[::-1]]))
        pi, _ = best_ordering(data, BoostConfig(stopping="fixed_count", fixed_count=0))
        assert pi == Permutation((0, 1))

    def test_limit(self):
        data = Dataset(np.random.default_rng(3).standard_normal((20, 9)))
        with pytest.raises(SearchLimitError, match="dagboost"):
            best_ordering(data, CFG)

    @pytest.mark.slow
    def test_chain_over_seeds(self):
        hits = 0
        truth = Dag(3, [(0, 1), (1, 2)])
        for seed in range(20):
            gen = np.random.default_rng(100 + seed)
            x1 = gen.standard_normal(200)
            x2 = 2 * np.sin(2 * x1) + 0.3 * gen.standard_normal(200)
            x3 = x2 ** 2 + 0.3 * gen.standard_normal(200)
            pi, _ = best_ordering(Dataset(np.column_stack([x1, x2, x3])), CFG)
            hits += distance_to_ordering_set(pi, truth) == 0
        assert hits >= 18
