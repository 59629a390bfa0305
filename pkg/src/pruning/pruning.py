"""
Post-hoc pruning of weak parents.

Each node is refit on its estimated parents with an additive-kernel ridge
regression, once on the full parent set and once without the parent under
test. The two fits are compared with an approximate F-test whose degrees of
freedom are the traces of the ridge hat matrices; a parent is kept when its
p-value is below alpha. Every parent is tested against the full parent set in a
single pass.
"""

import concurrent.futures
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from boosting.l2boost import base_spectrum
from core.Dag import Dag
from kernels.kernel import GramCache, KernelSpec, ridge_solve
from utils.errors import InsufficientDofError
from utils.logger import log_debug, log_info
from utils.parameter_validation import check_positive, check_probability


@dataclass(frozen=True)
class PruneConfig:
    alpha: float = 0.001
    penalty: float = 0.01
    bandwidth: float = 1.0

    def __post_init__(self):
        check_probability(self.alpha, "alpha")
        check_positive(self.penalty, "penalty")
        check_positive(self.bandwidth, "bandwidth")

    @classmethod
    def from_params(cls, section):
        return cls(alpha=float(section["alpha"]), penalty=float(section["penalty"]),
                   bandwidth=float(section.get("bandwidth", 1.0)))


@dataclass(frozen=True)
class ParentTest:
    node: int
    parent: int
    f_statistic: float
    p_value: float
    df_effect: float
    df_residual: float


def f_cdf(f, d1, d2):
    """CDF of the F(d1, d2) distribution via the regularized incomplete beta function"""
    if f <= 0:
        return 0.0
    return float(betainc(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2)))


def f_sf(f, d1, d2):
    """Upper tail 1 - CDF, computed directly to keep precision for tiny p-values"""
    if f <= 0:
        return 1.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


def f_test(rss_reduced, rss_full, df_reduced, df_full, n):
    """Approximate F-test of a nested pair of smoother fits
    Returns
        (F, p_value, df_effect, df_residual); a non-positive improvement clamps F to 0 and p to 1
    """
    df_residual = n - df_full
    if df_residual <= 0:
        raise InsufficientDofError(
            f"insufficient residual degrees of freedom: N={n}, df_full={df_full:.3f}")
    df_effect = df_full - df_reduced
    numerator = rss_reduced - rss_full
    if numerator <= 0 or df_effect <= 0 or rss_full <= 0:
        return 0.0, 1.0, max(df_effect, 0.0), df_residual
    statistic = (numerator / df_effect) / (rss_full / df_residual)
    return statistic, f_sf(statistic, df_effect, df_residual), df_effect, df_residual


def _fit_rss_df(data, k, columns, cfg, grams):
    y = data.column(k)
    if not columns:
        return float(np.sum(y ** 2)), 0.0
    eg = grams.get(columns)
    fit = ridge_solve(eg, cfg.penalty, y)
    return float(np.sum((y - fit.fitted) ** 2)), float(np.sum(base_spectrum(eg, cfg.penalty)))


def parent_pvalue(data, k, parents, j, cfg, grams=None):
    """F-test of parent j of node k against the full parent set
    :params:
        + data     - Dataset, centered here if needed
        + k        - node
        + parents  - full parent set of k, containing j
        + j        - parent under test
        + cfg      - PruneConfig
        + grams    - GramCache to share factorizations between tests
    Returns
        ParentTest
    """
    parents = tuple(sorted(int(v) for v in parents))
    if j not in parents:
        raise ValueError(f"{j} is not among the parents {parents}")
    if k in parents:
        raise ValueError(f"node {k} cannot be its own parent")
    if not data.centered:
        data = data.prepare()
    if grams is None or grams.data is not data:
        grams = GramCache(data, KernelSpec(cfg.bandwidth))
    rss_full, df_full = _fit_rss_df(data, k, parents, cfg, grams)
    reduced = tuple(v for v in parents if v != j)
    rss_reduced, df_reduced = _fit_rss_df(data, k, reduced, cfg, grams)
    statistic, p_value, df_effect, df_residual = f_test(rss_reduced, rss_full, df_reduced, df_full, data.n)
    log_debug("parent ", j, " of ", k, ": F=", statistic, " p=", p_value)
    return ParentTest(k, j, statistic, p_value, df_effect, df_residual)


def run_parent_tests(sem, data, cfg, workers=1):
    """ParentTest for every edge of the graph, nodes processed independently"""
    graph = getattr(sem, "graph", sem)
    if not data.centered:
        data = data.prepare()
    grams = GramCache(data, KernelSpec(cfg.bandwidth))

    def node_tests(k):
        parents = graph.parents(k)
        return [parent_pvalue(data, k, parents, j, cfg, grams) for j in parents]

    nodes = [k for k in range(graph.p) if graph.parents(k)]
    if workers > 1 and len(nodes) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            per_node = list(executor.map(node_tests, nodes))
    else:
        per_node = [node_tests(k) for k in nodes]
    return [test for tests in per_node for test in tests]


def prune_graph(sem, data, cfg, workers=1):
    """Keep edge j -> k iff its p-value against the full parent set of k is below alpha
    :params:
        + sem      - FittedSem or Dag
        + data     - Dataset the graph was estimated on
        + cfg      - PruneConfig
    Returns
        Dag whose edges are a subset of the input edges
    """
    graph = getattr(sem, "graph", sem)
    tests = run_parent_tests(graph, data, cfg, workers)
    kept = [(t.parent, t.node) for t in tests if t.p_value < cfg.alpha]
    log_info("pruning kept ", len(kept), " of ", len(graph), " edges at alpha=", cfg.alpha)
    return Dag(graph.p, kept)
