import json

import numpy as np
import pytest

import fixtures as F
from forestdsh import cli, data as data_mod, model


@pytest.fixture()
def model_path(tmp_path):
    path = tmp_path / "model.json"
    model.dump_model(F.jd_example1(), path)
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestSolveParams:
    def test_success(self, capsys, model_path):
        code, out = run(
            capsys, "solve-params", "--model", model_path, "--n", "10000", "--m", "10000"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["lambda"] == pytest.approx(F.LAMBDA_EXAMPLE1_ORACLE, abs=5e-4)
        assert np.asarray(doc["r_star"]).sum() == pytest.approx(1.0, abs=1e-6)

    def test_missing_model_file(self, capsys, tmp_path):
        code, _ = run(
            capsys, "solve-params", "--model", str(tmp_path / "nope.json"), "--n", "10", "--m", "10"
        )
        assert code == 2

    def test_invalid_model(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"alphabet_a": [0], "alphabet_b": [0], "p": [[0.5]]}')
        code, _ = run(capsys, "solve-params", "--model", str(path), "--n", "10", "--m", "10")
        assert code == 2


class TestBuildTree:
    def test_success_and_budget(self, capsys, model_path, tmp_path):
        tree_path = str(tmp_path / "tree.json")
        code, out = run(
            capsys, "build-tree", "--model", model_path, "--n", "512", "--m", "512",
            "--c1", "0.5", "--c2", "0.5", "--c3", "0.5", "--out", tree_path,
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["buckets"] > 0
        code, _ = run(
            capsys, "build-tree", "--model", model_path, "--n", "512", "--m", "512",
            "--c1", "0.5", "--c2", "0.5", "--c3", "0.5", "--max-nodes", "5",
        )
        assert code == 3


class TestPipeline:
    def test_gen_index_query(self, capsys, model_path, tmp_path):
        tree_path = str(tmp_path / "tree.json")
        code, _ = run(
            capsys, "build-tree", "--model", model_path, "--n", "200", "--m", "200",
            "--s", "150", "--c1", "0.5", "--c2", "0.5", "--c3", "0.5", "--out", tree_path,
        )
        assert code == 0

        x_path, y_path = str(tmp_path / "x.txt"), str(tmp_path / "y.txt")
        code, _ = run(
            capsys, "gen", "--model", model_path, "--n", "200", "--m", "200",
            "--s", "150", "--seed", "3", "--out-x", x_path, "--out-y", y_path,
        )
        assert code == 0

        index_path = str(tmp_path / "index.pkl")
        code, out = run(
            capsys, "index", "--tree", tree_path, "--data", x_path,
            "--bands", "16", "--seed", "4", "--out", index_path,
        )
        assert code == 0
        assert json.loads(out)["points"] == 200

        hits_path = str(tmp_path / "hits.jsonl")
        code, _ = run(
            capsys, "query", "--index", index_path, "--tree", tree_path,
            "--model", model_path, "--queries", y_path, "--out", hits_path,
        )
        assert code == 0
        lines = [json.loads(line) for line in open(hits_path)]
        assert len(lines) == 200
        # Most queries should recover their planted partner at 16 bands.
        recovered = sum(
            any(cid == rec["query"] for cid, _ in rec["hits"]) for rec in lines
        )
        assert recovered > 100


class TestBaselineCommands:
    def test_exponents(self, capsys, tmp_path):
        path = tmp_path / "p1.json"
        model.dump_model(F.jd_p1(), path)
        code, out = run(capsys, "baseline", "--method", "minhash", "--model", str(path))
        assert code == 0
        assert json.loads(out)["exponent"] == pytest.approx(F.MINHASH_EXPONENT_P1, abs=5e-4)

    def test_dubiner(self, capsys):
        code, out = run(
            capsys, "baseline", "--method", "dubiner", "--p", "0.85",
            "--n", "10000", "--s", "500", "--trials", "20000",
        )
        assert code == 0
        assert 1.0 < json.loads(out)["exponent"] < 2.0

    def test_mips_check(self, capsys, model_path):
        code, out = run(capsys, "baseline", "--method", "mips-check", "--model", model_path)
        assert code == 0
        assert json.loads(out)["abs_error"] < 1e-9


class TestIngest:
    def test_rank_file(self, capsys, tmp_path):
        ranks = tmp_path / "ranks.txt"
        ranks.write_text("1,4,,64\n2,16,3,\n")
        out_path = str(tmp_path / "seqs.txt")
        code, out = run(capsys, "ingest", "--ranks", str(ranks), "--out", out_path)
        assert code == 0
        seqs = data_mod.read_sequences(out_path)
        np.testing.assert_array_equal(seqs, [[0, 1, 3, 3], [0, 2, 0, 3]])


class TestSeedEnv:
    def test_env_seed_default(self, capsys, model_path, tmp_path, monkeypatch):
        monkeypatch.setenv("FOREST_DSH_SEED", "77")
        outs = []
        for tag in ("a", "b"):
            x = str(tmp_path / f"x{tag}.txt")
            y = str(tmp_path / f"y{tag}.txt")
            code, _ = run(
                capsys, "gen", "--model", model_path, "--n", "10", "--m", "10",
                "--s", "20", "--out-x", x, "--out-y", y,
            )
            assert code == 0
            outs.append(open(x).read())
        assert outs[0] == outs[1]


class TestBench:
    def test_config_json(self, capsys, model_path, tmp_path):
        config = {
            "kind": "recall-curve", "model_path": model_path,
            "n": 150, "m": 150, "s": 100,
            "c1": 0.5, "c2": 0.5, "c3": 0.5,
            "tp_target": 0.9, "seed": 2, "out_dir": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        code, out = run(capsys, "bench", "--config", str(cfg_path))
        assert code == 0
        assert len(json.loads(out)) >= 2

    def test_config_toml(self, capsys, model_path, tmp_path):
        cfg_path = tmp_path / "cfg.toml"
        cfg_path.write_text(
            'kind = "recall-curve"\n'
            f'model_path = "{model_path}"\n'
            "n = 150\nm = 150\ns = 100\nc1 = 0.5\nc2 = 0.5\nc3 = 0.5\n"
            "tp_target = 0.9\nseed = 2\n"
        )
        code, _ = run(capsys, "bench", "--config", str(cfg_path))
        assert code == 0
