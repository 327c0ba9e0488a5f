"""End-to-end tests of the command-line surface, run in process through
main(argv) so exit codes and emitted files are checked directly."""

import json

import numpy as np
import pytest

from semibn.cli import main
from semibn.dataset import ContinuousData, read_csv, write_csv


def _write_training_csv(path, seed=110, n=300):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(n, 3))
    values[:, 1] += 0.8 * values[:, 0]
    values[:, 2] += 0.5 * values[:, 1]
    write_csv(ContinuousData(("x", "y", "z"), values), path)


class TestExitCodes:
    def test_missing_data_file_is_io(self, tmp_path, capsys):
        code = main(
            [
                "learn",
                "--data",
                str(tmp_path / "absent.csv"),
                "--algorithm",
                "hc-gbn-bic",
                "--out-dir",
                str(tmp_path / "out"),
            ]
        )
        assert code == 3
        record = json.loads(capsys.readouterr().err)
        assert record["exit_code"] == 3

    def test_bad_fold_count_is_config(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        code = main(
            [
                "learn",
                "--data",
                str(data),
                "--algorithm",
                "hc-spbn",
                "--folds",
                "1",
                "--out-dir",
                str(tmp_path / "out"),
            ]
        )
        assert code == 2
        record = json.loads(capsys.readouterr().err)
        assert record["exit_code"] == 2

    def test_unknown_config_key_is_config(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        cfg = tmp_path / "run.json"
        cfg.write_text(
            json.dumps(
                {
                    "data": str(data),
                    "algorithm": "hc-gbn-bic",
                    "out_dir": str(tmp_path / "out"),
                    "fold_count": 5,
                }
            )
        )
        code = main(["learn", "--config", str(cfg)])
        assert code == 2
        assert "fold_count" in capsys.readouterr().err

    def test_malformed_csv_is_io(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1.0,oops\n")
        code = main(
            [
                "learn",
                "--data",
                str(bad),
                "--algorithm",
                "hc-gbn-bic",
                "--out-dir",
                str(tmp_path / "out"),
            ]
        )
        assert code == 3

    def test_model_data_mismatch_is_config(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        out = tmp_path / "out"
        assert main(
            [
                "learn",
                "--data",
                str(data),
                "--algorithm",
                "hc-gbn-bic",
                "--out-dir",
                str(out),
            ]
        ) == 0
        other = tmp_path / "other.csv"
        rng = np.random.default_rng(111)
        write_csv(ContinuousData(("p", "q"), rng.normal(size=(20, 2))), other)
        code = main(
            ["score", "--model", str(out / "model.json"), "--data", str(other)]
        )
        assert code == 2


class TestLearnOutputs:
    def test_hc_run_writes_model_report_and_trace(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        out = tmp_path / "out"
        code = main(
            [
                "learn",
                "--data",
                str(data),
                "--algorithm",
                "hc-spbn",
                "--folds",
                "5",
                "--seed",
                "7",
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        assert (out / "model.json").exists()
        assert (out / "report.txt").exists()
        assert (out / "trace.jsonl").exists()
        record = json.loads((out / "report.jsonl").read_text())
        assert record["record"] == "run"
        assert record["algorithm"] == "hc-spbn"
        assert set(record["timings"]) == {
            "ingest_s",
            "learn_s",
            "serialize_s",
            "evaluate_s",
        }
        # every trace line parses and reports recognizable fields
        for line in (out / "trace.jsonl").read_text().splitlines():
            entry = json.loads(line)
            assert {"iteration", "validation", "improved"} <= set(entry)

    def test_pc_run_writes_sepset_log(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data, n=600)
        out = tmp_path / "out"
        code = main(
            [
                "learn",
                "--data",
                str(data),
                "--algorithm",
                "pc-plc-gbn",
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        assert (out / "sepsets.jsonl").exists()
        assert not (out / "trace.jsonl").exists()

    def test_same_config_twice_is_byte_identical(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        args = [
            "learn",
            "--data",
            str(data),
            "--algorithm",
            "hc-spbn",
            "--folds",
            "5",
            "--seed",
            "3",
        ]
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        assert main(args + ["--out-dir", str(out1)]) == 0
        assert main(args + ["--out-dir", str(out2)]) == 0
        assert (out1 / "model.json").read_bytes() == (out2 / "model.json").read_bytes()

    def test_flags_override_config_file(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        cfg = tmp_path / "run.json"
        cfg.write_text(
            json.dumps(
                {
                    "data": str(data),
                    "algorithm": "hc-spbn",
                    "out_dir": str(tmp_path / "from-config"),
                    "folds": 5,
                }
            )
        )
        out = tmp_path / "from-flag"
        code = main(["learn", "--config", str(cfg), "--out-dir", str(out)])
        assert code == 0
        assert (out / "model.json").exists()
        assert not (tmp_path / "from-config").exists()

    def test_reference_model_distances_reported(self, tmp_path, capsys):
        csv = tmp_path / "synth.csv"
        truth = tmp_path / "truth.json"
        assert main(
            [
                "gen-synthetic",
                "--rows",
                "400",
                "--seed",
                "5",
                "--out",
                str(csv),
                "--ground-truth-model",
                str(truth),
            ]
        ) == 0
        out = tmp_path / "out"
        code = main(
            [
                "learn",
                "--data",
                str(csv),
                "--algorithm",
                "hc-gbn-bic",
                "--out-dir",
                str(out),
                "--reference-model",
                str(truth),
            ]
        )
        assert code == 0
        record = json.loads((out / "report.jsonl").read_text())
        assert set(record["distances"]) == {"hmd", "shd", "thmd"}


class TestScoreSampleCompare:
    def _learned_model(self, tmp_path):
        data = tmp_path / "train.csv"
        _write_training_csv(data)
        out = tmp_path / "out"
        assert main(
            [
                "learn",
                "--data",
                str(data),
                "--algorithm",
                "hc-gbn-bic",
                "--out-dir",
                str(out),
            ]
        ) == 0
        return data, out / "model.json", out

    def test_score_attributions_sum_to_total(self, tmp_path, capsys):
        data, model, _ = self._learned_model(tmp_path)
        score_out = tmp_path / "score.jsonl"
        code = main(
            ["score", "--model", str(model), "--data", str(data), "--out", str(score_out)]
        )
        assert code == 0
        record = json.loads(score_out.read_text())
        assert record["record"] == "score"
        assert record["total"] == pytest.approx(
            sum(record["by_node"].values()), abs=1e-12
        )

    def test_score_on_training_data_matches_learn_report(self, tmp_path, capsys):
        """The train + validation attributions from the learn report must
        re-add to the score of the full training table."""
        data, model, out = self._learned_model(tmp_path)
        run = json.loads((out / "report.jsonl").read_text())
        score_out = tmp_path / "score.jsonl"
        assert main(
            ["score", "--model", str(model), "--data", str(data), "--out", str(score_out)]
        ) == 0
        score = json.loads(score_out.read_text())
        assert score["total"] == pytest.approx(
            run["train_loglik"] + run["validation_loglik"], rel=1e-9
        )

    def test_sample_round_trips_through_ingestion(self, tmp_path, capsys):
        _, model, _ = self._learned_model(tmp_path)
        sample_path = tmp_path / "sample.csv"
        code = main(
            [
                "sample",
                "--model",
                str(model),
                "--rows",
                "50",
                "--seed",
                "9",
                "--out",
                str(sample_path),
            ]
        )
        assert code == 0
        first = read_csv(sample_path)
        assert first.values.shape == (50, 3)
        again = tmp_path / "again.csv"
        write_csv(first, again)
        np.testing.assert_array_equal(read_csv(again).values, first.values)

    def test_sampling_is_seed_deterministic(self, tmp_path, capsys):
        _, model, _ = self._learned_model(tmp_path)
        p1, p2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        for p in (p1, p2):
            assert main(
                ["sample", "--model", str(model), "--rows", "40", "--seed", "2", "--out", str(p)]
            ) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_compare_model_with_itself(self, tmp_path, capsys):
        _, model, _ = self._learned_model(tmp_path)
        out = tmp_path / "cmp.jsonl"
        code = main(
            ["compare", "--model", str(model), "--reference", str(model), "--out", str(out)]
        )
        assert code == 0
        record = json.loads(out.read_text())
        assert (record["hmd"], record["shd"], record["thmd"]) == (0, 0, 0)


class TestGenSynthetic:
    def test_round_trip_and_determinism(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (p1, p2):
            assert main(["gen-synthetic", "--rows", "120", "--seed", "4", "--out", str(p)]) == 0
        assert p1.read_bytes() == p2.read_bytes()
        data = read_csv(p1)
        assert data.names == ("A", "B", "C", "D", "E")
        assert data.n_rows == 120


class TestBench:
    def test_small_grid_reports_all_cells(self, tmp_path, capsys):
        out = tmp_path / "bench.jsonl"
        code = main(
            [
                "bench",
                "--rows",
                "200",
                "--algorithms",
                "hc-gbn-bic,hc-spbn-lg",
                "--repeats",
                "2",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert {r["algorithm"] for r in records} == {"hc-gbn-bic", "hc-spbn-lg"}
        for r in records:
            assert r["rows"] == 200
            assert r["repeats"] == 2
            assert r["mean_s"] > 0
            assert r["workers"] == 1
