"""
Synthetic ground truth: random DAGs (Erdos-Renyi, scale-free), Gaussian-process
structural equations (additive or joint over the parents) and recursive data
generation along a topological order.
"""

from enum import Enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from core.Dag import Dag
from core.Dataset import Dataset
from semgen.rng import SEED_BOUND, SeededStreams
from utils.constants import GP_JITTER_MAX, GP_JITTER_START
from utils.errors import ConfigError, NumericalBreakdownError
from utils.logger import log_debug
from utils.parameter_validation import check_choice, check_positive, validate_integer
from utils.params import params

_GEN = params["generation"]


class GraphKind(str, Enum):
    ER = "er"
    SF = "sf"


class Equations(str, Enum):
    ADDITIVE = "additive"
    NONADDITIVE = "nonadditive"


@dataclass(frozen=True)
class GenConfig:
    """Data-generating process
    :params:
        + p, n            - nodes and samples
        + graph_kind      - GraphKind.ER (expected_edges) or GraphKind.SF (attachment_m)
        + equations       - Equations.ADDITIVE: one GP per edge; NONADDITIVE: one GP over all parents
        + noise_low/high  - bounds of the uniform noise standard deviations
        + seed            - dataset seed, 0 <= seed < 2^64
        + graph           - fixed graph, replaces sampling
        + sigmas          - fixed noise standard deviations
        + functions       - fixed structural functions: (j, k) -> f(x_j) in additive mode,
                            k -> f(x_pa) in non-additive mode
    """
    p: int
    n: int
    graph_kind: GraphKind = GraphKind.ER
    expected_edges: float = _GEN["expected_edges"]
    attachment_m: int = _GEN["attachment_m"]
    equations: Equations = Equations.ADDITIVE
    noise_low: float = _GEN["noise_low"]
    noise_high: float = _GEN["noise_high"]
    seed: int = 0
    graph: Optional[Dag] = None
    sigmas: Optional[tuple] = None
    functions: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        validate_integer(self.p, 1, None, "p")
        validate_integer(self.n, 1, None, "n")
        validate_integer(self.seed, 0, SEED_BOUND - 1, "seed")
        kind = self.graph_kind
        if not isinstance(kind, GraphKind):
            object.__setattr__(self, "graph_kind", GraphKind(check_choice(kind, {"er", "sf"}, "graph")))
        equations = self.equations
        if not isinstance(equations, Equations):
            object.__setattr__(self, "equations", Equations(
                check_choice(equations, {"additive", "nonadditive"}, "equations")))
        max_edges = self.p * (self.p - 1) / 2
        if self.graph is None:
            if self.graph_kind is GraphKind.ER and not (0 <= self.expected_edges <= max_edges):
                raise ConfigError(f"expected_edges={self.expected_edges} not in [0, {max_edges}]")
            if self.graph_kind is GraphKind.SF and self.p > 1:
                validate_integer(self.attachment_m, 1, self.p - 1, "attachment_m")
        elif self.graph.p != self.p:
            raise ConfigError(f"fixed graph has {self.graph.p} nodes, config has p={self.p}")
        check_positive(self.noise_low, "noise_low")
        if self.noise_high < self.noise_low:
            raise ConfigError(f"noise_high={self.noise_high} below noise_low={self.noise_low}")
        if self.sigmas is not None:
            if len(self.sigmas) != self.p:
                raise ConfigError(f"{len(self.sigmas)} sigmas for p={self.p}")
            for sigma in self.sigmas:
                check_positive(sigma, "sigma")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    graph: Dag
    data: Dataset
    sigmas: np.ndarray
    config: GenConfig


def sample_er_dag(p, expected_edges, rng):
    """Erdos-Renyi DAG: complete DAG along a uniform random order, each edge kept with
    probability expected_edges / (p(p-1)/2)"""
    max_edges = p * (p - 1) // 2
    if not (0 <= expected_edges <= max_edges):
        raise ConfigError(f"expected_edges={expected_edges} not in [0, {max_edges}]")
    if max_edges == 0:
        return Dag(p)
    keep = expected_edges / max_edges
    order = rng.permutation(p)
    draws = rng.random(max_edges)
    edges = []
    idx = 0
    for a in range(p):
        for b in range(a + 1, p):
            if draws[idx] < keep:
                edges.append((int(order[a]), int(order[b])))
            idx += 1
    return Dag(p, edges)


def sample_sf_dag(p, attachment_m, rng):
    """Scale-free DAG by preferential attachment.

    Node t attaches to min(t, m) distinct earlier nodes drawn with probability
    proportional to 1 + the number of nodes already attached to them; edges point
    from the earlier to the later node. With m = 1 this is the Barabasi-Albert tree.
    """
    validate_integer(p, 1, None, "p")
    if p == 1:
        return Dag(1)
    validate_integer(attachment_m, 1, p - 1, "attachment_m")
    attached = np.zeros(p)
    edges = []
    for t in range(1, p):
        weights = attached[:t] + 1.0
        targets = rng.choice(t, size=min(t, attachment_m), replace=False, p=weights / weights.sum())
        for s in sorted(int(v) for v in targets):
            edges.append((s, t))
            attached[s] += 1
    return Dag(p, edges)


def sample_gp(inputs, rng, jitter=GP_JITTER_START, max_jitter=GP_JITTER_MAX):
    """One draw of a zero-mean GP with covariance exp(-||x - x'||^2 / 2) at the given inputs
    :params:
        + inputs      - (N, d) or (N,) finite reals
        + rng         - numpy Generator
        + jitter      - first diagonal jitter, multiplied by 10 after each failed Cholesky
        + max_jitter  - largest jitter tried
    Returns
        length-N array
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if not np.all(np.isfinite(x)):
        raise ValueError("GP inputs must be finite")
    covariance = np.exp(-cdist(x, x, "sqeuclidean") / 2.0)
    z = rng.standard_normal(x.shape[0])
    identity = np.eye(x.shape[0])
    while True:
        try:
            factor = scipy.linalg.cholesky(covariance + jitter * identity, lower=True)
            return factor @ z
        except scipy.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > max_jitter * (1 + 1e-9):
                raise NumericalBreakdownError(
                    f"GP covariance not positive definite with jitter up to {max_jitter}") from None
            log_debug("GP Cholesky failed, jitter raised to ", jitter)


def negative_three_cosine(x):
    """f(x) = -3 cos(x), the fixed two-variable benchmark function"""
    return -3.0 * np.cos(x)


def cosine_pair_config(n, seed, noise_std=1.0):
    """X1 = e1, X2 = -3 cos(X1) + e2 with both noise standard deviations equal to noise_std"""
    return GenConfig(p=2, n=n, seed=seed, graph=Dag(2, [(0, 1)]), sigmas=(noise_std, noise_std),
                     functions={(0, 1): negative_three_cosine})


def generate_dataset(cfg):
    """Sample a graph, noise scales and structural equations, then the data along a topological order"""
    streams = SeededStreams(cfg.seed)
    graph = cfg.graph
    if graph is None:
        if cfg.graph_kind is GraphKind.ER:
            graph = sample_er_dag(cfg.p, cfg.expected_edges, streams.graph())
        else:
            graph = sample_sf_dag(cfg.p, cfg.attachment_m, streams.graph())
    if cfg.sigmas is not None:
        sigmas = np.array(cfg.sigmas, dtype=float)
    else:
        sigmas = streams.sigmas().uniform(cfg.noise_low, cfg.noise_high, size=cfg.p)
    functions = cfg.functions or {}

    x = np.zeros((cfg.n, cfg.p))
    for k in graph.topological_order():
        parents = graph.parents(k)
        noise = sigmas[k] * streams.noise(k).standard_normal(cfg.n)
        if not parents:
            x[:, k] = noise
            continue
        if cfg.equations is Equations.ADDITIVE:
            signal = np.zeros(cfg.n)
            for j in parents:
                f = functions.get((j, k))
                signal += f(x[:, j]) if f is not None else sample_gp(x[:, [j]], streams.edge(j, k))
        else:
            f = functions.get(k)
            inputs = x[:, list(parents)]
            signal = f(inputs) if f is not None else sample_gp(inputs, streams.joint(k))
        x[:, k] = signal + noise
    log_debug("generated p=", cfg.p, " n=", cfg.n, " edges=", len(graph), " seed=", cfg.seed)
    return GroundTruth(graph, Dataset(x), sigmas, cfg)
