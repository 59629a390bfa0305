"""
Command-line entry point.

    python main.py generate --p 5 --n 200 --seed 1 --out data.csv --graph-out truth.edges
    python main.py discover --data data.csv --mode dagboost --out estimate.edges
    python main.py prune --data data.csv --graph estimate.edges --out pruned.edges
    python main.py evaluate --truth truth.edges --estimate pruned.edges --p 5 --out metrics.csv
    python main.py bench --seed 7 --replications 30 --sample-sizes 20 200 --mode exhaustive --out table.csv

Every subcommand reads defaults from --config (INI) and lets flags override them.
Progress goes to stderr; data goes to the files named on the command line.
Exit codes: 0 success, 1 failure, 2 configuration error.
"""

import sys
import logging
import argparse

import pandas as pd

from boosting.l2boost import BoostConfig
from dagboost.DAGBoost import dagboost_run
from metrics.graph_metrics import compare_graphs
from ordering.permutations import Permutation, distance_to_ordering_set, graph_from_ordering
from ordering.score import best_ordering
from parallel.ExperimentManager import ExperimentConfig, Mode, run_experiment, runtime_summary
from pruning.pruning import PruneConfig, prune_graph, run_parent_tests
from semgen.generators import GenConfig, cosine_pair_config, generate_dataset
from utils.config_parser import default_parallelism, load_config
from utils.constants import EXIT_CONFIG_ERROR, EXIT_FAILED, EXIT_SUCCESS
from utils.data_io import read_dataset, read_graph, timing_path, write_dataset, write_graph, write_results
from utils.errors import BoostDagError, ConfigError
from utils.logger import init_logging, log_error, log_info
from utils.parameter_validation import check_choice
from utils.timer import Timer

# flag dest -> (config section, key)
_OVERRIDES = {
    "step_size": ("boosting", "step_size"),
    "penalty": ("boosting", "penalty"),
    "max_iterations": ("boosting", "max_iterations"),
    "stopping": ("boosting", "stopping"),
    "fixed_count": ("boosting", "fixed_count"),
    "patience": ("boosting", "patience"),
    "bandwidth": ("boosting", "bandwidth"),
    "edge_selection": ("boosting", "edge_selection"),
    "dag_criterion": ("boosting", "dag_criterion"),
    "trace_weight": ("boosting", "trace_weight"),
    "alpha": ("pruning", "alpha"),
    "prune_penalty": ("pruning", "penalty"),
    "p": ("generation", "p"),
    "n": ("generation", "n"),
    "graph_kind": ("generation", "graph"),
    "expected_edges": ("generation", "expected_edges"),
    "attachment_m": ("generation", "attachment_m"),
    "equations": ("generation", "equations"),
    "noise_low": ("generation", "noise_low"),
    "noise_high": ("generation", "noise_high"),
    "mode": ("experiment", "mode"),
    "replications": ("experiment", "replications"),
    "workers": ("experiment", "parallelism"),
    "reversal_policy": ("experiment", "reversal_policy"),
    "standardize": ("experiment", "standardize"),
    "prune": ("experiment", "prune"),
}


def _add_common(parser):
    parser.add_argument("--config", type=str, default=None, help="INI file with default settings")
    parser.add_argument("--log-level", type=str, default="INFO", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-file", type=str, default=None, help="Copy of the log written to this file")


def _add_boosting(parser):
    group = parser.add_argument_group("boosting")
    group.add_argument("--step-size", dest="step_size", type=float, help="Boosting step size in (0, 1]")
    group.add_argument("--penalty", type=float, help="Ridge penalty of the base learner")
    group.add_argument("--max-iterations", dest="max_iterations", type=int)
    group.add_argument("--stopping", choices=["aic", "fixed_rate", "fixed_count"])
    group.add_argument("--fixed-count", dest="fixed_count", type=int)
    group.add_argument("--patience", type=int, help="AIC increases tolerated by DAGBoost")
    group.add_argument("--bandwidth", type=float, help="Gaussian kernel bandwidth")
    group.add_argument("--edge-selection", dest="edge_selection", choices=["loss", "score"],
                       help="DAGBoost edge ranking")
    group.add_argument("--dag-criterion", dest="dag_criterion", choices=["loglik", "raw"],
                       help="DAGBoost stopping criterion")
    group.add_argument("--trace-weight", dest="trace_weight", type=float,
                       help="Weight of tr(B_k) in the loglik criterion (default log N)")


def _add_pruning(parser):
    group = parser.add_argument_group("pruning")
    group.add_argument("--alpha", type=float, help="Significance level of the parent F-tests")
    group.add_argument("--prune-penalty", dest="prune_penalty", type=float, help="Ridge penalty of the pruning fits")


def _add_generation(parser):
    group = parser.add_argument_group("generation")
    group.add_argument("--p", type=int, help="Number of variables")
    group.add_argument("--n", type=int, help="Number of samples")
    group.add_argument("--graph", dest="graph_kind", choices=["er", "sf"])
    group.add_argument("--expected-edges", dest="expected_edges", type=float)
    group.add_argument("--attachment-m", dest="attachment_m", type=int)
    group.add_argument("--equations", choices=["additive", "nonadditive"])
    group.add_argument("--noise-low", dest="noise_low", type=float)
    group.add_argument("--noise-high", dest="noise_high", type=float)


def build_parser():
    parser = argparse.ArgumentParser(description="Causal discovery by boosting additive kernel regressions")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Sample a random SEM and write its data and graph")
    _add_common(gen)
    _add_generation(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, required=True, help="Data CSV")
    gen.add_argument("--graph-out", dest="graph_out", type=str, help="True graph (.json for adjacency JSON)")

    disc = sub.add_parser("discover", help="Estimate a causal graph from data")
    _add_common(disc)
    _add_boosting(disc)
    _add_pruning(disc)
    disc.add_argument("--data", type=str, required=True)
    disc.add_argument("--mode", choices=[m.value for m in Mode])
    disc.add_argument("--no-prune", dest="prune", action="store_false", default=None,
                      help="Write the unpruned estimate")
    disc.add_argument("--standardize", action="store_true", default=None, help="Scale columns to unit variance")
    disc.add_argument("--workers", type=int)
    disc.add_argument("--out", type=str, required=True, help="Estimated graph")
    disc.add_argument("--ordering-out", dest="ordering_out", type=str, help="Best ordering (exhaustive mode)")

    prune = sub.add_parser("prune", help="Remove parents that fail the F-test")
    _add_common(prune)
    _add_pruning(prune)
    prune.add_argument("--data", type=str, required=True)
    prune.add_argument("--graph", dest="graph_in", type=str, required=True)
    prune.add_argument("--standardize", action="store_true", default=None)
    prune.add_argument("--workers", type=int)
    prune.add_argument("--out", type=str, required=True)
    prune.add_argument("--pvalues-out", dest="pvalues_out", type=str, help="CSV of every parent test")

    ev = sub.add_parser("evaluate", help="Compare an estimated graph with the truth")
    _add_common(ev)
    ev.add_argument("--truth", type=str, required=True)
    ev.add_argument("--estimate", type=str, required=True)
    ev.add_argument("--p", type=int, help="Node count, needed for edge-list files")
    ev.add_argument("--ordering", type=str, help="Estimated ordering file, adds the transposition distance")
    ev.add_argument("--distance", choices=["adjacent", "cayley"], default="adjacent")
    ev.add_argument("--reversal-policy", dest="reversal_policy", choices=["one", "two"])
    ev.add_argument("--out", type=str, required=True, help="Metrics CSV")

    bench = sub.add_parser("bench", help="Seeded simulation study with parallel replications")
    _add_common(bench)
    _add_generation(bench)
    _add_boosting(bench)
    _add_pruning(bench)
    bench.add_argument("--seed", type=int, required=True, help="Master seed")
    bench.add_argument("--mode", choices=[m.value for m in Mode])
    bench.add_argument("--regime", choices=["random", "cosine"], default="random",
                       help="random: sampled SEMs; cosine: X2 = -3cos(X1) + e")
    bench.add_argument("--replications", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--no-prune", dest="prune", action="store_false", default=None)
    bench.add_argument("--standardize", action="store_true", default=None)
    bench.add_argument("--reversal-policy", dest="reversal_policy", choices=["one", "two"])
    bench.add_argument("--distance", choices=["adjacent", "cayley"], default="adjacent")
    bench.add_argument("--sample-sizes", dest="sample_sizes", type=int, nargs="+", default=())
    bench.add_argument("--step-sizes", dest="step_sizes", type=float, nargs="+", default=())
    bench.add_argument("--penalties", type=float, nargs="+", default=())
    bench.add_argument("--out", type=str, required=True, help="Results CSV; timings go to <name>.timing.csv")
    return parser


def merged_config(args):
    """INI defaults (or built-in ones) with the command-line flags applied on top"""
    conf = load_config(args.config)
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            conf[section][key] = value
    return conf


def gen_config(conf, seed):
    g = conf["generation"]
    return GenConfig(p=int(g["p"]), n=int(g["n"]), graph_kind=g["graph"], expected_edges=float(g["expected_edges"]),
                     attachment_m=int(g["attachment_m"]), equations=g["equations"],
                     noise_low=float(g["noise_low"]), noise_high=float(g["noise_high"]), seed=seed)


def _workers(conf):
    workers = conf["experiment"]["parallelism"]
    return int(workers) if workers is not None else default_parallelism()


def _write_ordering(path, pi):
    with open(path, "w") as f:
        f.write(" ".join(str(v) for v in pi.one_based()) + "\n")


def _read_ordering(path):
    with open(path) as f:
        return Permutation.from_one_based(f.read().split())


def cmd_generate(args, conf):
    truth = generate_dataset(gen_config(conf, args.seed))
    write_dataset(args.out, truth.data)
    if args.graph_out:
        write_graph(args.graph_out, truth.graph, truth.data.names)
    log_info("wrote ", truth.data.n, " samples of ", truth.data.p, " variables to ", args.out)
    return EXIT_SUCCESS


def cmd_discover(args, conf):
    boost_cfg = BoostConfig.from_params(conf["boosting"])
    data = read_dataset(args.data).prepare(scale=conf["experiment"]["standardize"])
    workers = _workers(conf)
    mode = Mode(check_choice(conf["experiment"]["mode"], {m.value for m in Mode}, "mode"))
    timer = Timer()
    with timer:
        if mode is Mode.EXHAUSTIVE:
            limit = int(conf["search"]["exhaustive_limit"])
            pi, score = best_ordering(data, boost_cfg, limit=limit, workers=workers)
            if args.ordering_out:
                _write_ordering(args.ordering_out, pi)
            estimate = graph_from_ordering(pi)
        else:
            estimate = dagboost_run(data, boost_cfg, workers=workers).graph
        if conf["experiment"]["prune"] and len(estimate):
            estimate = prune_graph(estimate, data, PruneConfig.from_params(conf["pruning"]), workers)
    write_graph(args.out, estimate, data.names)
    log_info(mode.value, " discovery: ", len(estimate), " edges in ", round(timer.diff, 3), " s")
    return EXIT_SUCCESS


def cmd_prune(args, conf):
    data = read_dataset(args.data).prepare(scale=conf["experiment"]["standardize"])
    graph = read_graph(args.graph_in, data.p)
    prune_cfg = PruneConfig.from_params(conf["pruning"])
    workers = _workers(conf)
    if args.pvalues_out:
        tests = run_parent_tests(graph, data, prune_cfg, workers)
        frame = pd.DataFrame([[t.parent + 1, t.node + 1, t.f_statistic, t.p_value, t.df_effect, t.df_residual]
                              for t in tests],
                             columns=["parent", "node", "f_statistic", "p_value", "df_effect", "df_residual"])
        frame.to_csv(args.pvalues_out, index=False)
    write_graph(args.out, prune_graph(graph, data, prune_cfg, workers), data.names)
    return EXIT_SUCCESS


def cmd_evaluate(args, conf):
    truth = read_graph(args.truth, args.p)
    estimate = read_graph(args.estimate, truth.p)
    diff = compare_graphs(truth, estimate, conf["experiment"]["reversal_policy"])
    rows = [("shd", diff.shd), ("precision", diff.precision), ("recall", diff.recall),
            ("n_edges", len(estimate)), ("missing", len(diff.missing)), ("extra", len(diff.extra)),
            ("reversed", len(diff.reversed))]
    if args.ordering:
        rows.append(("d_trans", distance_to_ordering_set(_read_ordering(args.ordering), truth, args.distance,
                                                         int(conf["search"]["enumeration_limit"]))))
    frame = pd.DataFrame([[name, float(value)] for name, value in rows], columns=["metric", "value"], dtype=object)
    frame.to_csv(args.out, index=False, na_rep="nan")
    return EXIT_SUCCESS


def cmd_bench(args, conf):
    if args.regime == "cosine":
        gen = cosine_pair_config(int(conf["generation"]["n"]), seed=0)
    else:
        gen = gen_config(conf, seed=0)
    exp = ExperimentConfig(
        gen=gen,
        boost=BoostConfig.from_params(conf["boosting"]),
        prune=PruneConfig.from_params(conf["pruning"]),
        mode=conf["experiment"]["mode"],
        replications=int(conf["experiment"]["replications"]),
        parallelism=_workers(conf),
        seed=args.seed,
        output=args.out,
        do_prune=conf["experiment"]["prune"],
        standardize=conf["experiment"]["standardize"],
        reversal_policy=conf["experiment"]["reversal_policy"],
        distance_kind=args.distance,
        sample_sizes=tuple(args.sample_sizes),
        step_sizes=tuple(args.step_sizes),
        penalties=tuple(args.penalties),
    )
    result = run_experiment(exp)
    write_results(args.out, result.rows)
    log_info("results written to ", args.out, ", timings to ", timing_path(args.out))
    for scenario, stats in runtime_summary(result).iterrows():
        log_info(scenario, ": wall time mean=", round(stats["mean"], 3), " s, sd=", round(stats["sd"], 3), " s")
    return EXIT_FAILED if result.all_failed else EXIT_SUCCESS


COMMANDS = {
    "generate": cmd_generate,
    "discover": cmd_discover,
    "prune": cmd_prune,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    init_logging(getattr(logging, args.log_level.upper(), logging.INFO), args.log_file)
    try:
        conf = merged_config(args)
        return COMMANDS[args.command](args, conf)
    except ConfigError as err:
        log_error("configuration error: ", err)
        return EXIT_CONFIG_ERROR
    except (BoostDagError, OSError, ValueError) as err:
        log_error(args.command, " failed: ", err)
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
