import os
import math


def validate_paths():
    """define paths to the source tree and the bundled config. Check if they exist"""
    SRC_PATH = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    PROJECT_DIR = os.path.dirname(SRC_PATH)
    DEFAULT_CONF = os.path.join(SRC_PATH, "config", "boostdag.conf")

    paths = {
        "SRC_PATH": SRC_PATH,
        "PROJECT_DIR": PROJECT_DIR,
        "DEFAULT_CONF": DEFAULT_CONF,
    }
    for k, p in paths.items():
        if not os.path.exists(p):
            raise FileNotFoundError("No such path: {}={}".format(k, p))
    return paths


paths = validate_paths()

# Defaults for every stage of the pipeline, grouped the way the INI file is.
# Boosting and pruning values follow the simulation study (step size 0.3,
# penalty 0.01, pruning level 0.001).
params = {
    "boosting": {
        "step_size": 0.3,
        "penalty": 0.01,
        "max_iterations": 1000,
        "stopping": "aic",
        "fixed_count": 100,
        "patience": 0,
        "bandwidth": 1.0,
        "edge_selection": "loss",
        "dag_criterion": "loglik",
        "trace_weight": None,
    },
    "pruning": {
        "alpha": 0.001,
        "penalty": 0.01,
        "bandwidth": 1.0,
    },
    "generation": {
        "p": 5,
        "n": 200,
        "graph": "er",
        "expected_edges": 5,
        "attachment_m": 1,
        "equations": "additive",
        "noise_low": math.sqrt(2) / 5,
        "noise_high": math.sqrt(2),
    },
    "search": {
        "exhaustive_limit": 8,
        "enumeration_limit": 10,
    },
    "experiment": {
        "mode": "dagboost",
        "replications": 10,
        "parallelism": None,
        "prune": True,
        "standardize": False,
        "reversal_policy": "one",
    },
}
