"""Graph comparison metrics: structural Hamming distance, precision and recall"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from utils.errors import DimensionError

UNDEFINED = float("nan")


class ReversalPolicy(str, Enum):
    ONE = "one"
    TWO = "two"


@dataclass(frozen=True)
class GraphDiff:
    missing: frozenset
    extra: frozenset
    reversed: frozenset
    shd: int
    precision: float
    recall: float


def _adjacency_pair(truth, estimate):
    if truth.p != estimate.p:
        raise DimensionError(f"graphs over {truth.p} and {estimate.p} nodes cannot be compared")
    return truth.adjacency().astype(int), estimate.adjacency().astype(int)


def shd(truth, estimate, reversal_policy=ReversalPolicy.ONE):
    """Structural Hamming distance. A pair adjacent in both graphs with opposite
    orientation costs 1 under ReversalPolicy.ONE and 2 under ReversalPolicy.TWO."""
    policy = ReversalPolicy(reversal_policy)
    a, b = _adjacency_pair(truth, estimate)
    diff = np.abs(a - b)
    if policy is ReversalPolicy.TWO:
        return int(np.sum(diff))
    # collapse each unordered pair to a single mismatch
    pair_diff = np.triu(diff + diff.T) > 0
    return int(np.sum(pair_diff))


def precision_recall(truth, estimate):
    """(correct / |estimate|, correct / |truth|), NaN where the denominator is zero"""
    a, b = _adjacency_pair(truth, estimate)
    correct = int(np.sum(a & b))
    n_est, n_true = int(b.sum()), int(a.sum())
    precision = correct / n_est if n_est else UNDEFINED
    recall = correct / n_true if n_true else UNDEFINED
    return precision, recall


def compare_graphs(truth, estimate, reversal_policy=ReversalPolicy.ONE):
    """Full GraphDiff of an estimate against the truth"""
    _adjacency_pair(truth, estimate)
    true_edges, est_edges = truth.edges, estimate.edges
    flipped = frozenset(frozenset(e) for e in true_edges if (e[1], e[0]) in est_edges)
    missing = frozenset(e for e in true_edges - est_edges if frozenset(e) not in flipped)
    extra = frozenset(e for e in est_edges - true_edges if frozenset(e) not in flipped)
    precision, recall = precision_recall(truth, estimate)
    return GraphDiff(missing, extra, flipped, shd(truth, estimate, reversal_policy), precision, recall)
