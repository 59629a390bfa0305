"""
File formats of the command-line tools:
    datasets    - CSV, header x1..xp, round-trippable float text
    graphs      - edge list ("j k" per line, 1-based) or adjacency JSON
    results     - CSV with one row per (scenario, replication, metric)
    timings     - CSV with one wall-clock row per (scenario, replication)
"""

import os
import json

import numpy as np
import pandas as pd

from core.Dag import Dag
from core.Dataset import Dataset
from utils.errors import DimensionError

RESULT_COLUMNS = ["scenario", "replication", "seed", "metric", "value", "note"]
TIMING_COLUMNS = ["scenario", "replication", "seed", "wall_time"]


def write_dataset(path, dataset):
    frame = pd.DataFrame(dataset.values, columns=list(dataset.names))
    frame.to_csv(path, index=False)


def read_dataset(path):
    """Read a CSV written by write_dataset (or any numeric CSV with a header row)"""
    frame = pd.read_csv(path, float_precision="round_trip")
    if frame.shape[1] == 0 or frame.shape[0] == 0:
        raise DimensionError(f"{path} holds no data")
    non_numeric = [c for c in frame.columns if not pd.api.types.is_numeric_dtype(frame[c])]
    if non_numeric:
        raise DimensionError(f"non-numeric columns in {path}: {non_numeric}")
    return Dataset(frame.to_numpy(dtype=float), names=[str(c) for c in frame.columns])


def write_edge_list(path, dag):
    with open(path, "w") as f:
        for j, k in sorted(dag.edges):
            f.write(f"{j + 1} {k + 1}\n")


def read_edge_list(path, p):
    edges = []
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            fields = line.split()
            if not fields or fields[0].startswith("#"):
                continue
            if len(fields) != 2:
                raise DimensionError(f"{path}:{line_no}: expected 'j k', got {line.strip()!r}")
            edges.append((int(fields[0]) - 1, int(fields[1]) - 1))
    return Dag(p, edges)


def write_adjacency_json(path, dag, names=None):
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(dag.p)]
    payload = {"p": dag.p, "nodes": names, "adjacency": dag.adjacency().tolist()}
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_adjacency_json(path):
    with open(path) as f:
        payload = json.load(f)
    adjacency = np.asarray(payload["adjacency"], dtype=int)
    if adjacency.shape != (payload["p"], payload["p"]):
        raise DimensionError(f"{path}: adjacency shape {adjacency.shape} for p={payload['p']}")
    return Dag.from_adjacency(adjacency)


def write_graph(path, dag, names=None):
    """Edge list, or adjacency JSON when the path ends in .json"""
    if path.endswith(".json"):
        write_adjacency_json(path, dag, names)
    else:
        write_edge_list(path, dag)


def read_graph(path, p):
    """Inverse of write_graph; p is needed by edge lists (an empty list has no nodes to count)"""
    if path.endswith(".json"):
        dag = read_adjacency_json(path)
        if p is not None and dag.p != p:
            raise DimensionError(f"{path} describes {dag.p} nodes, expected {p}")
        return dag
    if p is None:
        raise DimensionError(f"node count required to read the edge list {path}")
    return read_edge_list(path, p)


def timing_path(results_path):
    root, _ = os.path.splitext(results_path)
    return root + ".timing.csv"


def results_frame(rows):
    return pd.DataFrame([[row.scenario, row.replication, "" if row.seed is None else row.seed,
                          row.metric, row.value, row.note] for row in rows],
                        columns=RESULT_COLUMNS, dtype=object)


def timing_frame(rows):
    """One wall time per replication, each scenario followed by its mean and SD rows"""
    timings, seen = [], set()
    for row in rows:
        key = (row.scenario, row.replication)
        if row.seed is None or key in seen:
            continue
        seen.add(key)
        timings.append([row.scenario, row.replication, row.seed, row.wall_time])
    frame = pd.DataFrame(timings, columns=TIMING_COLUMNS, dtype=object)
    blocks = []
    for scenario, group in frame.groupby("scenario", sort=False):
        times = group["wall_time"].astype(float)
        summary = pd.DataFrame([[scenario, "mean", "", times.mean()], [scenario, "sd", "", times.std(ddof=1)]],
                               columns=TIMING_COLUMNS, dtype=object)
        blocks.extend([group, summary])
    return pd.concat(blocks, ignore_index=True) if blocks else frame


def write_results(path, rows):
    """Results CSV plus the wall-clock timings in a sibling <name>.timing.csv"""
    results_frame(rows).to_csv(path, index=False, na_rep="nan")
    timing_frame(rows).to_csv(timing_path(path), index=False)


def read_results(path):
    return pd.read_csv(path, keep_default_na=False, dtype=str)
