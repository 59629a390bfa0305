"""Seeded, splittable random streams for reproducible simulations.

Every random quantity of a generated dataset comes from its own stream, named
by a key under the dataset seed: (GRAPH,), (SIGMA,), (NOISE, k), (EDGE, j, k),
(JOINT, k). Replication seeds are derived from (master seed, replication), so
results do not depend on the order or the process in which replications run.
"""
import numpy as np

REPLICATION = 0
GRAPH = 1
SIGMA = 2
NOISE = 3
EDGE = 4
JOINT = 5

SEED_BOUND = 2 ** 64


def stream(seed, *key):
    """Independent numpy Generator for (seed, key)"""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(v) for v in key)))


def replication_seed(master_seed, replication):
    """64-bit seed of replication r derived from the master seed"""
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(REPLICATION, int(replication)))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class SeededStreams(object):
    """Named streams of one generated dataset"""
    def __init__(self, seed):
        self._seed = int(seed)

    @property
    def seed(self):
        return self._seed

    def graph(self):
        return stream(self._seed, GRAPH)

    def sigmas(self):
        return stream(self._seed, SIGMA)

    def noise(self, k):
        return stream(self._seed, NOISE, k)

    def edge(self, j, k):
        return stream(self._seed, EDGE, j, k)

    def joint(self, k):
        return stream(self._seed, JOINT, k)

    def fork(self, replication):
        """Streams of a child dataset, i.e. one benchmark replication"""
        return SeededStreams(replication_seed(self._seed, replication))
