import dataclasses
import json

import numpy as np
import pytest

import fixtures as F
from forestdsh import bench, model, solver
from forestdsh import tree as tree_mod
from forestdsh.errors import AllBuildsFailed


DIMS = model.ProblemDims(n=400, m=400, s=150)


@pytest.fixture(scope="module")
def setup():
    jd = F.jd_example1()
    params = solver.solve_params(jd, DIMS)
    tree = tree_mod.build_tree(jd, params, DIMS, c1=0.5, c2=0.5, c3=0.5)
    return jd, params, tree


class TestMeasure:
    def test_record_fields(self, setup):
        jd, _params, tree = setup
        rec = bench.measure_recall_and_work(tree, jd, DIMS, n_bands=8, seed=31)
        assert rec.n == DIMS.n and rec.s == DIMS.s
        assert rec.n_bands == 8
        assert 0.0 <= rec.recall <= 1.0
        assert rec.raw_positives >= 0
        assert rec.distinct_candidates <= rec.raw_positives
        assert rec.tree_nodes == len(tree.nodes)

    def test_reproducible_except_walltime(self, setup):
        jd, _params, tree = setup
        a = bench.measure_recall_and_work(tree, jd, DIMS, n_bands=4, seed=32)
        b = bench.measure_recall_and_work(tree, jd, DIMS, n_bands=4, seed=32)
        da, db = dataclasses.asdict(a), dataclasses.asdict(b)
        da.pop("wall_time_s"), db.pop("wall_time_s")
        assert da == db

    def test_more_bands_never_hurts_recall_much(self, setup):
        jd, _params, tree = setup
        few = bench.measure_recall_and_work(tree, jd, DIMS, n_bands=2, seed=33)
        many = bench.measure_recall_and_work(tree, jd, DIMS, n_bands=16, seed=33)
        assert many.recall >= few.recall
        assert many.insertions > few.insertions


class TestScalingSweep:
    def test_rows_and_slopes(self, setup):
        jd, params, _tree = setup
        rows, slopes = bench.scaling_sweep(jd, params, [128, 256, 512], s=100, c1=0.2, c2=0.2, c3=0.4)
        assert len(rows) == 3
        assert set(slopes) == {"nodes", "alpha_over_beta", "alpha_over_gamma_a", "alpha_over_gamma_b"}
        assert slopes["nodes"] > 0


class TestThresholdSweep:
    def test_single_point_grid(self, setup):
        jd, params, _tree = setup
        best, table = bench.threshold_sweep(jd, params, DIMS, [(0.5, 0.5, 0.5)], 0.9)
        assert best == (0.5, 0.5, 0.5)
        assert table[0]["nodes"] > 0

    def test_empty_grid(self, setup):
        jd, params, _tree = setup
        with pytest.raises(AllBuildsFailed):
            bench.threshold_sweep(jd, params, DIMS, [], 0.9)

    def test_all_builds_fail(self, setup):
        jd, params, _tree = setup
        with pytest.raises(AllBuildsFailed):
            bench.threshold_sweep(jd, params, DIMS, [(1e9, 1e6, 1e6)], 0.9)
        # The failing point is still recorded in the table on mixed grids.
        best, table = bench.threshold_sweep(
            jd, params, DIMS, [(1e9, 1e6, 1e6), (0.5, 0.5, 0.5)], 0.9
        )
        assert best == (0.5, 0.5, 0.5)
        assert table[0]["error"] == "EmptyBucketSet"


class TestRunExperiment:
    def _config(self, tmp_path, **kw):
        from forestdsh.model import dump_model

        model_path = tmp_path / "model.json"
        dump_model(F.jd_example1(), model_path)
        base = dict(
            kind="recall-curve", model_path=str(model_path),
            n=200, m=200, s=100, c1=0.5, c2=0.5, c3=0.5,
            tp_target=0.9, seed=41, out_dir=str(tmp_path / "out"),
        )
        base.update(kw)
        return bench.ExperimentConfig(**base)

    def test_recall_curve_writes_csv(self, tmp_path):
        config = self._config(tmp_path)
        records = bench.run_experiment(config)
        assert len(records) >= 2
        assert (tmp_path / "out" / "recall-curve.csv").exists()
        assert records[-1].recall >= records[0].recall

    def test_bands_sweep(self, tmp_path):
        config = self._config(tmp_path, kind="bands-sweep", band_counts=[1, 4])
        records = bench.run_experiment(config)
        assert [r.n_bands for r in records] == [1, 4]

    def test_scaling_writes_slopes(self, tmp_path):
        config = self._config(tmp_path, kind="scaling", n_values=[128, 256], c1=0.2, c2=0.2, c3=0.4)
        bench.run_experiment(config)
        slopes = json.loads((tmp_path / "out" / "slopes.json").read_text())
        assert "nodes" in slopes
