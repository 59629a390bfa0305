"""
Ordering score S(pi) = sum_k log sigma^2_k, where sigma^2_k is the residual
variance of boosting node k on its predecessors under pi, and the exhaustive
search over all p! orderings.

S(pi) depends on pi only through the pairs (k, predecessors of k), so every
regression is memoized under (k, predecessor bitmask): all p! orderings cost
at most p * 2^(p-1) regressions.
"""

import math
import itertools
import threading
import concurrent.futures
from dataclasses import dataclass

import numpy as np

from boosting.l2boost import boost
from kernels.kernel import GramCache
from ordering.permutations import Permutation
from utils.errors import DimensionError, NumericalBreakdownError, SearchLimitError
from utils.logger import log_debug, log_info
from utils.params import params

EXHAUSTIVE_LIMIT = params["search"]["exhaustive_limit"]


@dataclass(frozen=True)
class NodeScore:
    variance: float
    iterations: int
    converged: bool


class ScoreCache(object):
    """Memo of (node, predecessor bitmask) -> NodeScore.

    Concurrent callers asking for the same key block on a per-key lock, so each
    key is computed at most once.
    """
    def __init__(self):
        self._scores = {}
        self._lock = threading.Lock()
        self._key_locks = {}
        self._grams = None
        self.regressions = 0

    @staticmethod
    def key(k, predecessors):
        mask = 0
        for j in predecessors:
            mask |= 1 << int(j)
        return int(k), mask

    def grams(self, data, cfg):
        with self._lock:
            if self._grams is None or self._grams.data is not data:
                self._grams = GramCache(data, cfg.kernel_spec)
            return self._grams

    def get(self, key):
        return self._scores.get(key)

    def get_or_compute(self, key, compute):
        cached = self._scores.get(key)
        if cached is not None:
            return cached
        with self._lock:
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            cached = self._scores.get(key)
            if cached is None:
                cached = compute()
                with self._lock:
                    self._scores[key] = cached
                    self.regressions += 1
        return cached

    def __contains__(self, key):
        return key in self._scores

    def __len__(self):
        return len(self._scores)


def _regress(data, k, predecessors, cfg, cache):
    data.check_column(k)
    y = data.column(k)
    if not predecessors:
        variance = float(np.mean(y ** 2))
        score = NodeScore(variance, 0, True)
    else:
        eg = cache.grams(data, cfg).get(sorted(predecessors))
        fit = boost(eg, y, cfg)
        score = NodeScore(fit.residual_ss, fit.iterations, fit.converged)
    if not score.variance > 0:
        raise NumericalBreakdownError(
            f"residual variance {score.variance} of node {k} on {sorted(predecessors)} is not positive")
    log_debug("node ", k, " on ", sorted(predecessors), ": sigma2=", score.variance, " m=", score.iterations)
    return score


def node_residual_variance(data, k, predecessors, cfg, cache=None):
    """Residual variance of node k given a predecessor set
    :params:
        + data          - Dataset; centered here if it is not already
        + k             - node index
        + predecessors  - index set not containing k
        + cfg           - BoostConfig
        + cache         - ScoreCache, a private one if None
    Returns
        (1/N) sum x_k^2 for an empty set, else the residual_ss of boosting x_k on the predecessors
    """
    predecessors = frozenset(int(j) for j in predecessors)
    if k in predecessors:
        raise ValueError(f"node {k} cannot be its own predecessor")
    if not data.centered:
        data = data.prepare()
    cache = cache if cache is not None else ScoreCache()
    key = ScoreCache.key(k, predecessors)
    return cache.get_or_compute(key, lambda: _regress(data, k, predecessors, cfg, cache)).variance


def score_ordering(data, pi, cfg, cache=None):
    """S(pi) = sum_k log node_residual_variance(k, predecessors of k under pi)"""
    if pi.p != data.p:
        raise DimensionError(f"ordering of {pi.p} nodes for {data.p} columns")
    if not data.centered:
        data = data.prepare()
    cache = cache if cache is not None else ScoreCache()
    total = 0.0
    for position, k in enumerate(pi.sequence):
        total += math.log(node_residual_variance(data, k, pi.sequence[:position], cfg, cache))
    return total


def fill_score_cache(data, cfg, cache, workers=1):
    """Compute every (node, predecessor set) regression, fanning out over threads"""
    if not data.centered:
        data = data.prepare()
    p = data.p
    jobs = []
    for k in range(p):
        others = [j for j in range(p) if j != k]
        for size in range(p):
            for subset in itertools.combinations(others, size):
                jobs.append((k, subset))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(node_residual_variance, data, k, subset, cfg, cache) for k, subset in jobs]
        for future in concurrent.futures.as_completed(futures):
            future.result()
    return cache


def best_ordering(data, cfg, cache=None, limit=EXHAUSTIVE_LIMIT, workers=1):
    """Exhaustive argmin of S(pi) over all p! orderings
    :params:
        + data     - Dataset with p <= limit
        + cfg      - BoostConfig
        + cache    - ScoreCache to reuse, a private one if None
        + limit    - largest p accepted
        + workers  - threads used to fill the cache before the scan
    Returns
        (Permutation, score); ties go to the lexicographically smallest sequence
    """
    if data.p > limit:
        raise SearchLimitError(
            f"exhaustive search over {data.p}! orderings exceeds the limit p <= {limit}; use dagboost")
    data = data.prepare() if not data.centered else data
    cache = cache if cache is not None else ScoreCache()
    if workers > 1:
        fill_score_cache(data, cfg, cache, workers)

    best, best_score = None, math.inf
    # itertools.permutations yields lexicographic order, so strict < keeps the smallest tie
    for sequence in itertools.permutations(range(data.p)):
        pi = Permutation(sequence)
        score = score_ordering(data, pi, cfg, cache)
        if score < best_score:
            best, best_score = pi, score
    log_info("best ordering ", best.one_based(), " score=", round(best_score, 6),
             " regressions=", cache.regressions)
    return best, best_score
