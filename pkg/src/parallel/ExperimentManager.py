"""
Simulation-study runner.

Each replication draws its own dataset from a seed derived from (master seed,
replication), runs discovery (exhaustive ordering search or DAGBoost), optionally
prunes, and compares the estimate with the true graph. Replications are
submitted to a ProcessPoolExecutor; a replication that raises is logged and
recorded as an error row while the rest of the run continues. Rows are sorted
by (scenario, replication) after the join, so the result table does not depend
on the number of workers or on completion order.
"""

import math
import itertools
import concurrent.futures
from enum import Enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd

from boosting.l2boost import BoostConfig
from dagboost.DAGBoost import dagboost_run
from metrics.graph_metrics import ReversalPolicy, compare_graphs
from ordering.permutations import distance_to_ordering_set, graph_from_ordering
from ordering.score import EXHAUSTIVE_LIMIT, best_ordering
from pruning.pruning import PruneConfig, prune_graph
from semgen.generators import GenConfig, generate_dataset
from semgen.rng import SEED_BOUND, replication_seed
from utils.data_io import timing_frame
from utils.errors import ConfigError, InsufficientDofError
from utils.logger import log_error, log_info, log_warning
from utils.parameter_validation import check_choice, validate_integer
from utils.timer import Timer


class Mode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    DAGBOOST = "dagboost"


@dataclass(frozen=True)
class Scenario:
    label: str
    gen: GenConfig
    boost: BoostConfig
    prune: PruneConfig


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulation study
    :params:
        + gen, boost, prune  - base configurations; gen.seed is replaced per replication
        + mode               - Mode.EXHAUSTIVE (p <= 8) or Mode.DAGBOOST
        + replications       - datasets per scenario
        + parallelism        - worker processes, 1 runs inline
        + seed               - master seed
        + sample_sizes       - grid over N, empty keeps gen.n
        + step_sizes         - grid over the boosting step size, empty keeps boost.step_size
        + penalties          - grid over the boosting penalty, empty keeps boost.penalty
    """
    gen: GenConfig
    boost: BoostConfig = field(default_factory=BoostConfig)
    prune: PruneConfig = field(default_factory=PruneConfig)
    mode: Mode = Mode.DAGBOOST
    replications: int = 10
    parallelism: int = 1
    seed: int = 0
    output: Optional[str] = None
    do_prune: bool = True
    standardize: bool = False
    reversal_policy: ReversalPolicy = ReversalPolicy.ONE
    distance_kind: str = "adjacent"
    sample_sizes: tuple = ()
    step_sizes: tuple = ()
    penalties: tuple = ()

    def __post_init__(self):
        validate_integer(self.replications, 1, None, "replications")
        validate_integer(self.parallelism, 1, None, "parallelism")
        validate_integer(self.seed, 0, SEED_BOUND - 1, "seed")
        object.__setattr__(self, "mode", Mode(check_choice(str(getattr(self.mode, "value", self.mode)),
                                                           {m.value for m in Mode}, "mode")))
        object.__setattr__(self, "reversal_policy", ReversalPolicy(check_choice(
            str(getattr(self.reversal_policy, "value", self.reversal_policy)),
            {r.value for r in ReversalPolicy}, "reversal_policy")))
        check_choice(self.distance_kind, {"adjacent", "cayley"}, "distance_kind")
        if self.mode is Mode.EXHAUSTIVE and self.gen.p > EXHAUSTIVE_LIMIT:
            raise ConfigError(f"exhaustive mode needs p <= {EXHAUSTIVE_LIMIT}, got p={self.gen.p}")
        for n in self.sample_sizes:
            validate_integer(n, 1, None, "sample size")
        # building the grid validates every step size and penalty up front
        self.scenarios()

    def scenarios(self):
        """Cartesian grid over (N, step size, penalty), in the order the values were given"""
        sizes = self.sample_sizes or (self.gen.n,)
        steps = self.step_sizes or (self.boost.step_size,)
        penalties = self.penalties or (self.boost.penalty,)
        grid = []
        for n, step, penalty in itertools.product(sizes, steps, penalties):
            label = f"n={n};step={step:g};penalty={penalty:g}"
            grid.append(Scenario(label, replace(self.gen, n=int(n)),
                                 replace(self.boost, step_size=float(step), penalty=float(penalty)),
                                 self.prune))
        return grid


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    replication: object
    seed: Optional[int]
    metric: str
    value: float
    wall_time: float = math.nan
    note: str = ""


@dataclass(frozen=True)
class ExperimentResult:
    rows: list
    replications: int
    failed: int

    @property
    def all_failed(self):
        return self.failed == self.replications

    def frame(self):
        return pd.DataFrame([vars(row) for row in self.rows])


def run_replication(cfg, scenario, replication):
    """generate -> discover -> (prune) -> evaluate for one seeded dataset
    Returns
        list of ResultRow, metrics in a fixed order
    """
    seed = replication_seed(cfg.seed, replication)
    timer = Timer()
    metrics = {}
    with timer:
        truth = generate_dataset(replace(scenario.gen, seed=seed))
        data = truth.data.prepare(scale=cfg.standardize)
        if cfg.mode is Mode.EXHAUSTIVE:
            pi, score = best_ordering(data, scenario.boost)
            metrics["d_trans"] = distance_to_ordering_set(pi, truth.graph, cfg.distance_kind)
            metrics["score"] = score
            estimate = graph_from_ordering(pi)
        else:
            sem = dagboost_run(data, scenario.boost)
            metrics["iterations"] = sem.iterations
            metrics["converged"] = float(sem.converged)
            estimate = sem.graph
        metrics["true_edges"] = len(truth.graph)
        unpruned = compare_graphs(truth.graph, estimate, cfg.reversal_policy)
        metrics["shd_unpruned"] = unpruned.shd
        metrics["precision_unpruned"] = unpruned.precision
        metrics["recall_unpruned"] = unpruned.recall
        metrics["n_edges_unpruned"] = len(estimate)
        if cfg.do_prune and len(estimate):
            try:
                estimate = prune_graph(estimate, data, scenario.prune)
                metrics["pruned"] = 1.0
            except InsufficientDofError as err:
                log_warning("replication ", replication, ": pruning skipped, ", err)
                metrics["pruned"] = 0.0
        diff = compare_graphs(truth.graph, estimate, cfg.reversal_policy)
        metrics["shd"] = diff.shd
        metrics["precision"] = diff.precision
        metrics["recall"] = diff.recall
        metrics["n_edges"] = len(estimate)
    return [ResultRow(scenario.label, replication, seed, name, float(value), timer.diff)
            for name, value in metrics.items()]


def _error_rows(cfg, scenario, replication, exc):
    seed = replication_seed(cfg.seed, replication)
    return [ResultRow(scenario.label, replication, seed, "error", math.nan, math.nan,
                      f"{type(exc).__name__}: {exc}")]


def _aggregate(label, rows):
    """mean and sample SD per metric over the successful replications, NaN values skipped"""
    values = {}
    for row in rows:
        if row.metric != "error":
            values.setdefault(row.metric, []).append(row.value)
    out = []
    for stat in ("mean", "sd"):
        for metric, vals in values.items():
            series = pd.Series(vals, dtype=float)
            value = series.mean() if stat == "mean" else series.std(ddof=1)
            out.append(ResultRow(label, stat, None, metric, float(value)))
    return out


def run_experiment(cfg):
    """Run every scenario and replication of the study
    Returns
        ExperimentResult whose rows are the per-replication rows of each scenario followed by
        its mean and SD rows
    """
    scenarios = cfg.scenarios()
    jobs = [(s_idx, r) for s_idx in range(len(scenarios)) for r in range(cfg.replications)]
    per_job = {}

    def record(job, outcome=None, exc=None):
        s_idx, r = job
        if exc is not None:
            log_error("replication ", r, " of ", scenarios[s_idx].label, " failed: ", repr(exc))
            per_job[job] = _error_rows(cfg, scenarios[s_idx], r, exc)
        else:
            per_job[job] = outcome
            log_info("replication ", r, " of ", scenarios[s_idx].label, " done (",
                     round(outcome[0].wall_time, 3), " s)")

    if cfg.parallelism == 1:
        for job in jobs:
            try:
                record(job, run_replication(cfg, scenarios[job[0]], job[1]))
            except Exception as exc:
                record(job, exc=exc)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.parallelism) as executor:
            futures = {executor.submit(run_replication, cfg, scenarios[s_idx], r): (s_idx, r)
                       for s_idx, r in jobs}
            for future in concurrent.futures.as_completed(futures):
                if future.exception() is not None:
                    record(futures[future], exc=future.exception())
                else:
                    record(futures[future], future.result())

    rows, failed = [], 0
    for s_idx, scenario in enumerate(scenarios):
        scenario_rows = []
        for r in range(cfg.replications):
            job_rows = per_job[(s_idx, r)]
            failed += int(job_rows[0].metric == "error")
            scenario_rows.extend(job_rows)
        rows.extend(scenario_rows)
        rows.extend(_aggregate(scenario.label, scenario_rows))
    log_info("experiment finished: ", len(jobs) - failed, "/", len(jobs), " replications succeeded")
    return ExperimentResult(rows, len(jobs), failed)


def summarize(result, metric):
    """Mean of a metric per scenario, i.e. summarize(result, "d_trans")"""
    return {row.scenario: row.value for row in result.rows
            if row.replication == "mean" and row.metric == metric}


def runtime_summary(result):
    """Mean and SD of the replication wall times per scenario, as written to the timing CSV"""
    frame = timing_frame(result.rows)
    stats = frame[frame["replication"].isin(["mean", "sd"])]
    return stats.pivot(index="scenario", columns="replication", values="wall_time").astype(float)


def metric_values(result, scenario, metric):
    return np.array([row.value for row in result.rows if row.scenario == scenario
                     and row.metric == metric and isinstance(row.replication, int)])
