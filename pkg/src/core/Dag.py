from collections import deque

import numpy as np
import networkx as nx

from utils.errors import CycleError, DimensionError


def _closure(p, children):
    """Reachability matrix by BFS from every node: closure[a, b] iff a path a -> ... -> b exists"""
    closure = np.zeros((p, p), dtype=bool)
    for source in range(p):
        queue = deque(children[source])
        while queue:
            node = queue.popleft()
            if closure[source, node]:
                continue
            closure[source, node] = True
            queue.extend(children[node])
    return closure


class Dag(object):
    """Directed acyclic graph over nodes 0..p-1 with its transitive closure.

    Instances are immutable; with_edge() returns a new graph.
    """
    def __init__(self, p, edges=()):
        if int(p) != p or p < 1:
            raise DimensionError(f"node count must be a positive integer, got {p}")
        p = int(p)
        edge_set = set()
        for j, k in edges:
            j, k = int(j), int(k)
            if not (0 <= j < p and 0 <= k < p):
                raise DimensionError(f"edge ({j}, {k}) outside nodes 0..{p - 1}")
            if j == k:
                raise CycleError([j, j])
            edge_set.add((j, k))
        children = [[] for _ in range(p)]
        for j, k in sorted(edge_set):
            children[j].append(k)
        closure = _closure(p, children)
        if np.any(np.diag(closure)):
            graph = nx.DiGraph(list(edge_set))
            raise CycleError([u for u, _ in nx.find_cycle(graph)])
        closure.setflags(write=False)
        self._p = p
        self._edges = frozenset(edge_set)
        self._closure = closure

    @classmethod
    def from_adjacency(cls, adjacency):
        adjacency = np.asarray(adjacency)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise DimensionError(f"adjacency must be square, got shape {adjacency.shape}")
        rows, cols = np.nonzero(adjacency)
        return cls(adjacency.shape[0], zip(rows.tolist(), cols.tolist()))

    @property
    def p(self):
        return self._p

    @property
    def edges(self):
        return self._edges

    @property
    def closure(self):
        return self._closure

    def reaches(self, a, b):
        return bool(self._closure[a, b])

    def parents(self, k):
        return tuple(sorted(j for j, target in self._edges if target == k))

    def children(self, j):
        return tuple(sorted(k for source, k in self._edges if source == j))

    def with_edge(self, j, k):
        """New graph with j -> k added; raises CycleError if k already reaches j"""
        if (j, k) in self._edges:
            return self
        if j == k or self._closure[k, j]:
            path = [k] if j == k else nx.shortest_path(self.to_networkx(), k, j)
            raise CycleError(list(path) + [k])
        return Dag(self._p, self._edges | {(j, k)})

    def without_edges(self, removed):
        return Dag(self._p, self._edges - set(removed))

    def adjacency(self):
        adjacency = np.zeros((self._p, self._p), dtype=int)
        for j, k in self._edges:
            adjacency[j, k] = 1
        return adjacency

    def to_networkx(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self._p))
        graph.add_edges_from(self._edges)
        return graph

    def topological_order(self):
        """Smallest topological ordering in lexicographic order (deterministic)"""
        return list(nx.lexicographical_topological_sort(self.to_networkx()))

    def __len__(self):
        return len(self._edges)

    def __eq__(self, other):
        return isinstance(other, Dag) and self._p == other._p and self._edges == other._edges

    def __hash__(self):
        return hash((self._p, self._edges))

    def __repr__(self):
        return f"Dag(p={self._p}, edges={sorted(self._edges)})"
