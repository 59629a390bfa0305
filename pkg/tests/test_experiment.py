import filecmp
import math

import numpy as np
import pandas as pd
import pytest

from boosting.l2boost import BoostConfig
from main import main
from parallel.ExperimentManager import (ExperimentConfig, Mode, metric_values, run_experiment, runtime_summary,
                                        summarize)
from semgen.generators import GenConfig, cosine_pair_config
from utils import data_io
from utils.constants import EXIT_CONFIG_ERROR, EXIT_FAILED, EXIT_SUCCESS
from utils.errors import ConfigError

FAST = BoostConfig(max_iterations=200)


def _smoke_config(**overrides):
    kwargs = dict(gen=cosine_pair_config(80, seed=0), boost=FAST, replications=1, parallelism=1, seed=11)
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


class TestExperimentConfig:
    def test_exhaustive_limit(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(gen=GenConfig(p=9, n=20), mode="exhaustive")

    @pytest.mark.parametrize("kwargs", [{"replications": 0}, {"parallelism": 0}, {"mode": "greedy"},
                                        {"reversal_policy": "three"}, {"step_sizes": (0.3, 2.0)},
                                        {"penalties": (-1.0,)}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            _smoke_config(**kwargs)

    def test_scenario_grid(self):
        cfg = _smoke_config(sample_sizes=(20, 200), step_sizes=(0.1, 0.3))
        scenarios = cfg.scenarios()
        assert [s.label for s in scenarios] == ["n=20;step=0.1;penalty=0.01", "n=20;step=0.3;penalty=0.01",
                                                "n=200;step=0.1;penalty=0.01", "n=200;step=0.3;penalty=0.01"]
        assert scenarios[2].gen.n == 200
        assert scenarios[2].boost.step_size == 0.1


class TestRunExperiment:
    def test_smoke_dagboost(self):
        result = run_experiment(_smoke_config())
        assert result.failed == 0
        metrics = {row.metric for row in result.rows if row.replication == 0}
        assert {"shd", "precision", "recall", "n_edges", "iterations", "true_edges"} <= metrics
        assert {"shd_unpruned", "precision_unpruned", "recall_unpruned", "n_edges_unpruned"} <= metrics
        assert {row.replication for row in result.rows} == {0, "mean", "sd"}
        assert all(row.seed is None for row in result.rows if row.replication in ("mean", "sd"))

    def test_exhaustive_metrics(self):
        cfg = _smoke_config(gen=GenConfig(p=3, n=40, expected_edges=2), mode=Mode.EXHAUSTIVE, replications=2)
        result = run_experiment(cfg)
        assert result.failed == 0
        d_trans = [row.value for row in result.rows if row.metric == "d_trans" and isinstance(row.replication, int)]
        assert len(d_trans) == 2
        assert all(v >= 0 and float(v).is_integer() for v in d_trans)
        assert "n=40;step=0.3;penalty=0.01" in summarize(result, "d_trans")

    def test_failures_become_error_rows(self):
        result = run_experiment(_smoke_config(gen=GenConfig(p=3, n=1, expected_edges=1), replications=2))
        assert result.all_failed
        errors = [row for row in result.rows if row.metric == "error"]
        assert len(errors) == 2
        assert all(math.isnan(row.value) and row.note for row in errors)

    def test_independent_of_parallelism(self):
        serial = run_experiment(_smoke_config(replications=3))
        parallel = run_experiment(_smoke_config(replications=3, parallelism=2))
        pd.testing.assert_frame_equal(serial.frame().drop(columns="wall_time"),
                                      parallel.frame().drop(columns="wall_time"))

    def test_identical_runs_write_identical_files(self, tmp_path):
        paths = []
        for name in ("a.csv", "b.csv"):
            path = str(tmp_path / name)
            data_io.write_results(path, run_experiment(_smoke_config(replications=2)).rows)
            paths.append(path)
        assert filecmp.cmp(paths[0], paths[1], shallow=False)

    def test_result_schema(self, tmp_path):
        path = str(tmp_path / "results.csv")
        data_io.write_results(path, run_experiment(_smoke_config()).rows)
        frame = data_io.read_results(path)
        assert list(frame.columns) == data_io.RESULT_COLUMNS
        timing = pd.read_csv(data_io.timing_path(path))
        assert list(timing.columns) == data_io.TIMING_COLUMNS
        assert list(timing["replication"].astype(str)) == ["0", "mean", "sd"]
        assert timing["wall_time"].iloc[0] >= 0
        assert timing["wall_time"].iloc[1] == pytest.approx(timing["wall_time"].iloc[0])

    def test_pruning_only_removes_edges(self):
        result = run_experiment(_smoke_config(gen=GenConfig(p=4, n=60, expected_edges=3), replications=3))
        label = result.rows[0].scenario
        assert all(metric_values(result, label, "n_edges") <= metric_values(result, label, "n_edges_unpruned"))
        unpruned = run_experiment(_smoke_config(gen=GenConfig(p=4, n=60, expected_edges=3), replications=3,
                                                do_prune=False))
        for name in ("shd", "precision", "recall", "n_edges"):
            after = metric_values(unpruned, label, name)
            before = metric_values(unpruned, label, name + "_unpruned")
            assert ((after == before) | (np.isnan(after) & np.isnan(before))).all()

    def test_runtime_is_aggregated(self):
        result = run_experiment(_smoke_config(replications=3))
        label = result.rows[0].scenario
        times = pd.Series({row.replication: row.wall_time for row in result.rows
                           if isinstance(row.replication, int)}, dtype=float)
        summary = runtime_summary(result)
        assert summary.loc[label, "mean"] == pytest.approx(times.mean())
        assert summary.loc[label, "sd"] == pytest.approx(times.std(ddof=1))

    @pytest.mark.slow
    @pytest.mark.parametrize("equations, ceiling", [("additive", 0.5), ("nonadditive", 0.8)])
    def test_ordering_error_shrinks_with_sample_size(self, equations, ceiling):
        cfg = ExperimentConfig(gen=GenConfig(p=5, n=20, expected_edges=5, equations=equations),
                               mode=Mode.EXHAUSTIVE, replications=30, parallelism=1, seed=2024,
                               do_prune=False, sample_sizes=(20, 50, 200))
        means = summarize(run_experiment(cfg), "d_trans")
        trend = [means[f"n={n};step=0.3;penalty=0.01"] for n in (20, 50, 200)]
        assert trend[0] > trend[1] > trend[2]
        assert trend[2] <= ceiling


    @pytest.mark.slow
    def test_desk_scale_dagboost(self):
        cfg = ExperimentConfig(gen=GenConfig(p=20, n=200, expected_edges=20), mode=Mode.DAGBOOST,
                               replications=10, parallelism=1, seed=31)
        result = run_experiment(cfg)
        assert result.failed == 0
        label = cfg.scenarios()[0].label
        assert summarize(result, "precision")[label] >= 0.75
        assert summarize(result, "shd")[label] <= 0.8 * summarize(result, "true_edges")[label]
        assert runtime_summary(result).loc[label, "mean"] < 60.0


class TestCommandLine:
    def test_pipeline(self, tmp_path):
        data = str(tmp_path / "data.csv")
        truth = str(tmp_path / "truth.json")
        estimate = str(tmp_path / "estimate.edges")
        pruned = str(tmp_path / "pruned.edges")
        metrics = str(tmp_path / "metrics.csv")
        pvalues = str(tmp_path / "pvalues.csv")
        assert main(["generate", "--p", "3", "--n", "60", "--expected-edges", "2", "--seed", "4",
                     "--out", data, "--graph-out", truth]) == EXIT_SUCCESS
        assert main(["discover", "--data", data, "--mode", "dagboost", "--max-iterations", "100",
                     "--no-prune", "--workers", "1", "--out", estimate]) == EXIT_SUCCESS
        assert main(["prune", "--data", data, "--graph", estimate, "--workers", "1", "--out", pruned,
                     "--pvalues-out", pvalues]) == EXIT_SUCCESS
        assert main(["evaluate", "--truth", truth, "--estimate", pruned, "--out", metrics]) == EXIT_SUCCESS
        frame = pd.read_csv(metrics)
        assert {"shd", "precision", "recall"} <= set(frame["metric"])
        assert list(pd.read_csv(pvalues).columns) == ["parent", "node", "f_statistic", "p_value",
                                                      "df_effect", "df_residual"]

    def test_dagboost_criterion_flags(self, tmp_path):
        data = str(tmp_path / "data.csv")
        out = str(tmp_path / "g.edges")
        assert main(["generate", "--p", "3", "--n", "50", "--expected-edges", "2", "--seed", "2",
                     "--out", data]) == EXIT_SUCCESS
        for flags in (["--edge-selection", "score", "--dag-criterion", "raw"], ["--trace-weight", "3.5"]):
            assert main(["discover", "--data", data, "--no-prune", "--max-iterations", "50", "--workers", "1",
                         "--out", out] + flags) == EXIT_SUCCESS
        assert main(["discover", "--data", data, "--trace-weight", "-1", "--out", out]) == EXIT_CONFIG_ERROR

    def test_exhaustive_discover_writes_ordering(self, tmp_path):
        data = str(tmp_path / "data.csv")
        ordering = tmp_path / "ordering.txt"
        assert main(["generate", "--p", "3", "--n", "40", "--expected-edges", "2", "--seed", "1",
                     "--out", data]) == EXIT_SUCCESS
        assert main(["discover", "--data", data, "--mode", "exhaustive", "--workers", "2", "--no-prune",
                     "--out", str(tmp_path / "g.edges"), "--ordering-out", str(ordering)]) == EXIT_SUCCESS
        assert sorted(int(v) for v in ordering.read_text().split()) == [1, 2, 3]

    def test_bench(self, tmp_path):
        out = str(tmp_path / "bench.csv")
        code = main(["bench", "--seed", "3", "--regime", "cosine", "--n", "60", "--replications", "2",
                     "--workers", "1", "--max-iterations", "100", "--out", out])
        assert code == EXIT_SUCCESS
        frame = data_io.read_results(out)
        assert set(frame["replication"]) == {"0", "1", "mean", "sd"}

    def test_bench_requires_seed(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["bench", "--out", str(tmp_path / "x.csv")])
        assert info.value.code == 2

    def test_config_error_exit_code(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("[boosting]\nstep_size = 3.0\n")
        code = main(["bench", "--seed", "1", "--config", str(conf), "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_CONFIG_ERROR

    def test_total_failure_exit_code(self, tmp_path):
        code = main(["bench", "--seed", "1", "--p", "3", "--n", "1", "--expected-edges", "1",
                     "--replications", "2", "--workers", "1", "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_FAILED
