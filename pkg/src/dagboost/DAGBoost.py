import math
import copy
import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from boosting.l2boost import DagCriterion, EdgeSelection, base_spectrum
from core.Dag import Dag
from kernels.kernel import RidgeFit, build_eigen_gram, kernel_row, ridge_solve
from utils.errors import DimensionError, NumericalBreakdownError
from utils.logger import log_debug, log_info, log_warning


@dataclass(eq=False)
class EdgeCandidate:
    source: int
    target: int
    fit: RidgeFit
    score: float


@dataclass(eq=False)
class NodeFitState:
    """Boosting state of one structural equation f_k
    :params:
        + node               - k
        + fitted             - f_k at the training rows
        + hat                - B_k with fitted = B_k x_k; None until an incoming edge is selected
        + trace              - tr(B_k)
        + edge_coefficients  - source j -> accumulated kernel coefficients of f_kj
    """
    node: int
    fitted: np.ndarray
    hat: Optional[np.ndarray] = None
    trace: float = 0.0
    edge_coefficients: dict = field(default_factory=dict)


@dataclass(eq=False)
class DagBoostState:
    data: object
    learners: list
    graph: Dag
    nodes: list
    candidates: dict
    forbidden: frozenset
    aic: float
    iteration: int = 0
    terminal: bool = False
    smoothers: dict = field(default_factory=dict)

    def residual(self, k):
        return self.data.column(k) - self.nodes[k].fitted

    def rss(self, k):
        return float(np.sum(self.residual(k) ** 2))

    def smoother(self, j, cfg):
        """Dense base learner S_j = U diag(d) U^T of column j, built on first use"""
        smoother = self.smoothers.get(j)
        if smoother is None:
            eg = self.learners[j]
            d = base_spectrum(eg, cfg.penalty)
            smoother = (eg.eigenvectors * d) @ eg.eigenvectors.T
            smoother.setflags(write=False)
            self.smoothers[j] = smoother
        return smoother

    def snapshot(self):
        """Copy of the mutable parts; learners, smoothers and data are shared"""
        clone = copy.copy(self)
        clone.nodes = [copy.deepcopy(node) for node in self.nodes]
        clone.candidates = dict(self.candidates)
        return clone


@dataclass(frozen=True, eq=False)
class FittedSem:
    graph: Dag
    nodes: list
    config: object
    iterations: int
    converged: bool
    aic_path: tuple
    training: np.ndarray = field(repr=False)
    bandwidths: tuple = ()


def precompute_column_learners(data, cfg):
    """Single-column Gaussian EigenGram for every column, factorized once
    :params:
        + data - centered Dataset with p >= 2, N >= 2
        + cfg  - BoostConfig (bandwidth)
    Returns
        list of p EigenGrams; a degenerate column raises DegenerateVariableError naming it
    """
    if data.p < 2 or data.n < 2:
        raise DimensionError(f"DAGBoost needs p >= 2 and N >= 2, got p={data.p}, N={data.n}")
    learners = []
    for j in range(data.p):
        data.check_column(j)
        learners.append(build_eigen_gram(data, (j,), cfg.kernel_spec))
    return learners


def edge_score(j, k, residual_k, learner_j, cfg):
    """Ridge fit of node k's current residual on column j and its score log sum (fit - residual)^2"""
    if j == k:
        raise ValueError(f"self-loop candidate ({j}, {k})")
    fit = ridge_solve(learner_j, cfg.penalty, residual_k)
    sse = float(np.sum((fit.fitted - residual_k) ** 2))
    if not sse > 0:
        raise NumericalBreakdownError(f"candidate ({j}, {k}) interpolates the residual (sum of squares {sse})")
    return EdgeCandidate(j, k, fit, math.log(sse))


def forbidden_edges(g):
    """Pairs (j, k) whose addition would close a cycle: k already reaches j"""
    rows, cols = np.nonzero(g.closure)
    return frozenset((int(j), int(k)) for k, j in zip(rows, cols) if j != k)


def node_criterion(rss, trace, n, cfg):
    """Contribution of one node to the stopping criterion
    LOGLIK: N log(RSS / N) + w tr(B), w = cfg.trace_weight or log N
    RAW:    RSS + tr(B)
    """
    if cfg.dag_criterion is DagCriterion.RAW:
        return rss + trace
    if not rss > 0:
        raise NumericalBreakdownError(f"residual sum of squares {rss} leaves the log-likelihood undefined")
    weight = cfg.trace_weight if cfg.trace_weight is not None else math.log(n)
    return n * math.log(rss / n) + weight * trace


def global_aic(state, cfg):
    """Stopping criterion of the whole SEM, summed over nodes"""
    return sum(node_criterion(state.rss(k), state.nodes[k].trace, state.data.n, cfg) for k in range(state.data.p))


def refresh_candidates(state, k, cfg, workers=1):
    """Recompute the candidates into node k against its current residual"""
    residual = state.residual(k)
    sources = [j for j in range(state.data.p) if j != k and (j, k) not in state.forbidden]
    for j in range(state.data.p):
        if (j, k) in state.forbidden:
            state.candidates.pop((j, k), None)
    if workers > 1 and len(sources) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            fresh = list(executor.map(lambda j: edge_score(j, k, residual, state.learners[j], cfg), sources))
    else:
        fresh = [edge_score(j, k, residual, state.learners[j], cfg) for j in sources]
    for candidate in fresh:
        state.candidates[(candidate.source, candidate.target)] = candidate


def recompute_candidates(state, cfg):
    """All allowed candidates from scratch; reference for the incrementally maintained ones"""
    p = state.data.p
    return {(j, k): edge_score(j, k, state.residual(k), state.learners[j], cfg)
            for k in range(p) for j in range(p) if j != k and (j, k) not in state.forbidden}


def init_state(data, cfg):
    """F(1) = 0: empty graph, zero fits, candidates from the raw columns"""
    data = data.prepare() if not data.centered else data
    learners = precompute_column_learners(data, cfg)
    nodes = [NodeFitState(k, np.zeros(data.n)) for k in range(data.p)]
    state = DagBoostState(data, learners, Dag(data.p), nodes, {}, frozenset(), 0.0)
    for k in range(data.p):
        refresh_candidates(state, k, cfg)
    state.aic = global_aic(state, cfg)
    return state


def select_candidate(state, cfg):
    """Allowed candidate ranked first; ties go to the smallest (j, k)

    LOSS ranks by score - log RSS_k, the change of sum_k log RSS_k if f_k took the
    whole candidate fit. SCORE ranks by the raw score, which mixes targets on
    different scales.
    """
    relative = cfg.edge_selection is EdgeSelection.LOSS
    log_rss = {}
    best, best_rank = None, None
    for key in sorted(state.candidates):
        if key in state.forbidden:
            continue
        candidate = state.candidates[key]
        rank = candidate.score
        if relative:
            k = candidate.target
            if k not in log_rss:
                log_rss[k] = math.log(state.rss(k))
            rank -= log_rss[k]
        if best is None or rank < best_rank:
            best, best_rank = candidate, rank
    return best


def propose_step(state, cfg):
    """Evaluate the next boosting step without committing it
    Returns
        (candidate, updated NodeFitState of the target, AIC after the step), or None if nothing is allowed
    """
    candidate = select_candidate(state, cfg)
    if candidate is None:
        return None
    j, k = candidate.source, candidate.target
    node = state.nodes[k]
    smoother = state.smoother(j, cfg)
    step = cfg.step_size
    if node.hat is None:
        hat = step * smoother
        trace = step * float(np.sum(base_spectrum(state.learners[j], cfg.penalty)))
    else:
        hat = node.hat + step * (smoother - smoother @ node.hat)
        # tr(S_j B) = sum_ab S_ab B_ba, S symmetric
        trace = node.trace + step * (float(np.sum(base_spectrum(state.learners[j], cfg.penalty)))
                                     - float(np.sum(smoother * node.hat)))
    coefficients = dict(node.edge_coefficients)
    coefficients[j] = coefficients.get(j, 0.0) + step * candidate.fit.coefficients
    updated = NodeFitState(k, node.fitted + step * candidate.fit.fitted, hat, trace, coefficients)
    new_rss = float(np.sum((state.data.column(k) - updated.fitted) ** 2))
    n = state.data.n
    aic = state.aic - node_criterion(state.rss(k), node.trace, n, cfg) + node_criterion(new_rss, trace, n, cfg)
    return candidate, updated, aic


def commit_step(state, candidate, updated, aic, cfg, workers=1):
    """Apply a proposed step: record the edge, swap in the node state, refresh candidates into the target"""
    j, k = candidate.source, candidate.target
    if (j, k) not in state.graph.edges:
        state.graph = state.graph.with_edge(j, k)
        state.forbidden = forbidden_edges(state.graph)
    state.nodes[k] = updated
    state.aic = aic
    state.iteration += 1
    refresh_candidates(state, k, cfg, workers)
    log_debug("step ", state.iteration, ": edge ", (j + 1, k + 1), " score=", candidate.score, " aic=", aic)
    return state


def dagboost_step(state, cfg, workers=1):
    """One component-wise boosting step; sets state.terminal when no candidate is allowed"""
    proposal = propose_step(state, cfg)
    if proposal is None:
        state.terminal = True
        return state
    return commit_step(state, *proposal, cfg, workers=workers)


def check_state(state):
    """Structural invariants of a state; used by tests and debug runs"""
    if np.any(np.diag(state.graph.closure)):
        raise AssertionError("graph is cyclic")
    for node in state.nodes:
        if node.hat is None:
            if np.any(node.fitted != 0) or node.trace != 0:
                raise AssertionError(f"node {node.node} has a fit without selected edges")
            continue
        if not np.allclose(node.hat @ state.data.column(node.node), node.fitted, atol=1e-8):
            raise AssertionError(f"fitted values of node {node.node} disagree with its hat matrix")
        if abs(np.trace(node.hat) - node.trace) > 1e-8:
            raise AssertionError(f"trace of node {node.node} drifted")


def dagboost_run(data, cfg, workers=1, debug_checks=False):
    """Component-wise L2-boosting over additive SEMs restricted to DAGs
    :params:
        + data          - Dataset, centered here if needed
        + cfg           - BoostConfig (step size, penalty, max_iterations, patience, edge_selection,
                          dag_criterion, trace_weight)
        + workers       - threads for candidate refreshes
        + debug_checks  - verify check_state after every committed step
    Returns
        FittedSem at the state before the first AIC increase (after patience extra increases,
        the lowest-AIC state seen)
    """
    state = init_state(data, cfg)
    aic_path = [state.aic]
    best, best_aic = None, state.aic
    streak = 0
    converged = False
    for _ in range(cfg.max_iterations):
        proposal = propose_step(state, cfg)
        if proposal is None:
            state.terminal = True
            converged = True
            break
        new_aic = proposal[2]
        aic_path.append(new_aic)
        if new_aic > state.aic:
            streak += 1
            if streak > cfg.patience:
                converged = True
                break
            if state.aic <= best_aic:
                best, best_aic = state.snapshot(), state.aic
        else:
            streak = 0
        commit_step(state, *proposal, cfg, workers=workers)
        if debug_checks:
            check_state(state)

    if best is not None and best_aic < state.aic:
        state = best
    if not converged:
        log_warning("DAGBoost reached max_iterations=", cfg.max_iterations, " without an AIC increase")
    log_info("DAGBoost finished: iterations=", state.iteration, " edges=", len(state.graph),
             " aic=", round(state.aic, 6))
    return FittedSem(state.graph, state.nodes, cfg, state.iteration, converged, tuple(aic_path),
                     state.data.values, tuple(eg.bandwidths[0] for eg in state.learners))


def evaluate_sem(sem, query):
    """Evaluate every f_k = sum_j f_kj at a query point given in the training (centered) coordinates"""
    query = np.asarray(query, dtype=float).ravel()
    p = sem.training.shape[1]
    if query.size != p:
        raise DimensionError(f"query has {query.size} values for a SEM over {p} variables")
    n = sem.training.shape[0]
    out = np.zeros(p)
    for node in sem.nodes:
        for j, coefficients in node.edge_coefficients.items():
            row = kernel_row(sem.training[:, [j]], query[[j]], (sem.bandwidths[j],))
            out[node.node] += row @ coefficients / n
    return out
