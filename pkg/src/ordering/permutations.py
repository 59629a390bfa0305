"""Topological orderings as permutations, their enumeration and distances"""

from dataclasses import dataclass

import networkx as nx

from core.Dag import Dag
from utils.errors import DimensionError, SearchLimitError
from utils.params import params

ENUMERATION_LIMIT = params["search"]["enumeration_limit"]


@dataclass(frozen=True)
class Permutation:
    """Ordering of nodes 0..p-1; sequence[i] is the node placed at position i"""
    sequence: tuple

    def __post_init__(self):
        sequence = tuple(int(v) for v in self.sequence)
        if sorted(sequence) != list(range(len(sequence))):
            raise ValueError(f"{sequence} is not a permutation of 0..{len(sequence) - 1}")
        object.__setattr__(self, "sequence", sequence)

    @classmethod
    def identity(cls, p):
        return cls(tuple(range(p)))

    @classmethod
    def from_one_based(cls, sequence):
        return cls(tuple(int(v) - 1 for v in sequence))

    @classmethod
    def from_positions(cls, positions):
        """Inverse construction: positions[i] is the position of node i"""
        sequence = [0] * len(positions)
        for node, position in enumerate(positions):
            sequence[int(position)] = node
        return cls(tuple(sequence))

    @property
    def p(self):
        return len(self.sequence)

    @property
    def positions(self):
        positions = [0] * len(self.sequence)
        for position, node in enumerate(self.sequence):
            positions[node] = position
        return tuple(positions)

    def predecessors(self, k):
        """Nodes placed before k"""
        return frozenset(self.sequence[:self.positions[k]])

    def one_based(self):
        return tuple(v + 1 for v in self.sequence)

    def __len__(self):
        return len(self.sequence)

    def __iter__(self):
        return iter(self.sequence)


def _check_lengths(a, b):
    if len(a) != len(b):
        raise DimensionError(f"permutations of different length: {len(a)} vs {len(b)}")


def transposition_distance(a, b, kind="adjacent"):
    """Distance between two orderings
    :params:
        + a, b  - Permutation of equal length
        + kind  - "adjacent": minimal number of adjacent swaps (pairs ordered differently)
                  "cayley": minimal number of arbitrary transpositions
    Returns
        non-negative integer, 0 iff a == b
    """
    _check_lengths(a, b)
    position_b = b.positions
    mapped = [position_b[node] for node in a.sequence]
    if kind == "adjacent":
        p = len(mapped)
        return sum(1 for i in range(p) for j in range(i + 1, p) if mapped[i] > mapped[j])
    if kind == "cayley":
        seen = [False] * len(mapped)
        cycles = 0
        for start in range(len(mapped)):
            if seen[start]:
                continue
            cycles += 1
            node = start
            while not seen[node]:
                seen[node] = True
                node = mapped[node]
        return len(mapped) - cycles
    raise ValueError(f"unknown distance kind {kind!r}")


def enumerate_topological_orderings(g, limit=ENUMERATION_LIMIT):
    """All linear extensions of g as a set of Permutations (p <= limit)"""
    if g.p > limit:
        raise SearchLimitError(f"refusing to enumerate orderings of {g.p} > {limit} nodes")
    return {Permutation(tuple(order)) for order in nx.all_topological_sorts(g.to_networkx())}


def distance_to_ordering_set(pi_hat, g0, kind="adjacent", limit=ENUMERATION_LIMIT):
    """min over the topological orderings pi0 of g0 of d(pi_hat, pi0)"""
    if pi_hat.p != g0.p:
        raise DimensionError(f"ordering of {pi_hat.p} nodes against a graph of {g0.p}")
    return min(transposition_distance(pi_hat, pi0, kind)
               for pi0 in enumerate_topological_orderings(g0, limit))


def graph_from_ordering(pi):
    """Complete DAG consistent with pi: every earlier node points to every later one"""
    seq = pi.sequence
    return Dag(len(seq), [(seq[a], seq[b]) for a in range(len(seq)) for b in range(a + 1, len(seq))])
