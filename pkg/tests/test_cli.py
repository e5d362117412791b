import json
import os
from pathlib import Path

import pytest

from kanhope.cli import main

from conftest import synthetic_rows, write_dataset_csv


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_dataset_csv(tmp_path / "data.csv", synthetic_rows(150, not_kannada=20))
    return tmp_path


def run(*argv):
    return main(list(argv))


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, workdir, capsys):
        assert run("frobnicate") == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_is_usage_error(self, workdir, capsys):
        assert run("stats", "--wat") == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_no_subcommand_prints_usage(self, workdir, capsys):
        assert run() == 1

    def test_missing_file_is_validation_error(self, workdir, capsys):
        assert run("stats", "--in", "absent.csv") == 1
        assert "error" in capsys.readouterr().err

    def test_success_is_zero(self, workdir):
        assert run("stats", "--in", "data.csv") == 0

    def test_runtime_failure_is_two(self, workdir, capsys):
        # valid JSON with the right kind but a missing payload field
        (workdir / "broken.model").write_text(
            json.dumps({"version": 1, "model_kind": "decision_tree"}),
            encoding="utf-8",
        )
        assert run("split", "--in", "data.csv") == 0
        assert run("featurize", "--train", "out/splits/train.csv", "--ngram-max", "1") == 0
        code = run("eval", "--model", "broken.model", "--data", "out/splits/test.csv")
        assert code == 2
        assert "runtime failure" in capsys.readouterr().err


class TestPipeline:
    def test_end_to_end(self, workdir, capsys):
        assert run("--seed", "0", "split", "--in", "data.csv") == 0
        for part, size in (("train", 120), ("dev", 15), ("test", 15)):
            assert (workdir / "out" / "splits" / f"{part}.csv").exists()
        assert run("featurize", "--train", "out/splits/train.csv", "--ngram-max", "2") == 0
        assert run("train", "nb", "--train", "out/splits/train.csv") == 0
        assert (
            run(
                "eval",
                "--model",
                "out/models/nb.model",
                "--data",
                "out/splits/test.csv",
            )
            == 0
        )
        report = json.loads((workdir / "out" / "reports" / "nb.json").read_text("utf-8"))
        assert report["model"] == "nb"
        assert set(report["per_class"]) == {"Not-Hope", "Hope"}
        assert (
            run("report", "--inputs", "out/reports/nb.json") == 0
        )
        out = capsys.readouterr().out
        assert "W(F1)" in out
        reports = workdir / "out" / "reports"
        assert (reports / "benchmark.txt").exists()
        assert (reports / "benchmark.csv").exists()
        assert (reports / "comparison.png").stat().st_size > 0
        assert (reports / "confusion_nb.png").stat().st_size > 0

    def test_split_sizes_and_label_filter_first(self, workdir):
        # 150 usable rows after the Not-Kannada filter, 20 dropped before splitting
        assert run("--seed", "1", "split", "--in", "data.csv") == 0
        total = 0
        for part in ("train", "dev", "test"):
            text = (workdir / "out" / "splits" / f"{part}.csv").read_text("utf-8")
            rows = text.strip().splitlines()[1:]
            assert not any("Not-Kannada" in r for r in rows)
            total += len(rows)
        assert total == 150

    def test_keep_all_labels(self, workdir):
        assert run("split", "--in", "data.csv", "--keep-all-labels") == 0
        combined = "".join(
            (workdir / "out" / "splits" / f"{p}.csv").read_text("utf-8")
            for p in ("train", "dev", "test")
        )
        assert "Not-Kannada" in combined

    def test_clean_file_and_text(self, workdir, capsys):
        assert run("clean", "--text", "see https://x.io/1 now") == 0
        assert capsys.readouterr().out.strip() == "see URL now"
        assert run("clean", "--in", "data.csv", "--out-file", "cleaned.csv") == 0
        assert (workdir / "cleaned.csv").exists()

    def test_clean_requires_target(self, workdir):
        assert run("clean") == 1

    def test_codemix_jsonl(self, workdir):
        assert run("codemix", "--in", "data.csv", "--jsonl-out", "mix.jsonl") == 0
        lines = (workdir / "mix.jsonl").read_text("utf-8").strip().splitlines()
        assert len(lines) == 170
        first = json.loads(lines[0])
        assert set(first) == {"id", "mix_type", "token_tags"}

    def test_agreement_output(self, workdir, capsys):
        write_dataset_csv(
            workdir / "ann.csv",
            [("u1", "a", "Hope"), ("u1", "b", "Hope"), ("u2", "a", "Hope"), ("u2", "b", "Not-Hope")],
            header=("unit_id", "annotator_id", "label"),
        )
        assert run("agreement", "--annotations", "ann.csv") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["alpha"] == pytest.approx(0.0)
        assert payload["coincidence"]["n"] == 4

    def test_stats_json_schema(self, workdir, capsys):
        assert run("stats", "--in", "data.csv", "--json-out", "stats.json") == 0
        payload = json.loads((workdir / "stats.json").read_text("utf-8"))
        assert set(payload) == {
            "posts",
            "tokens",
            "vocab",
            "sentences",
            "tokens_per_post",
            "sentences_per_post",
        }
        assert payload["posts"] == 170

    def test_gradcheck(self, workdir, capsys):
        assert run("gradcheck", "--dim", "4", "--vocab", "8") == 0
        assert "max relative error" in capsys.readouterr().out

    def test_dc_training_and_eval(self, workdir):
        assert run("--seed", "0", "split", "--in", "data.csv") == 0
        assert (
            run(
                "--seed",
                "0",
                "train",
                "dc",
                "--train",
                "out/splits/train.csv",
                "--dev",
                "out/splits/dev.csv",
                "--dim",
                "8",
                "--vocab-bits",
                "8",
                "--epochs",
                "2",
                "--history-out",
                "hist.csv",
            )
            == 0
        )
        history = (workdir / "hist.csv").read_text("utf-8").splitlines()
        assert history[0] == "epoch,train_loss,dev_weighted_f1"
        assert len(history) == 3
        assert run("eval", "--model", "out/models/dc.model", "--data", "out/splits/test.csv") == 0

    def test_dc_with_translation_cache(self, workdir):
        from kanhope.dualchannel import save_cache

        assert run("--seed", "0", "split", "--in", "data.csv") == 0
        import csv as _csv

        with open(workdir / "out/splits/train.csv", encoding="utf-8") as fh:
            texts = [row["text"] for row in _csv.DictReader(fh)]
        save_cache({t: f"english {i}" for i, t in enumerate(texts[:40])}, workdir / "cache.tsv")
        assert (
            run(
                "--seed",
                "0",
                "train",
                "dc",
                "--train",
                "out/splits/train.csv",
                "--dim",
                "8",
                "--vocab-bits",
                "8",
                "--epochs",
                "1",
                "--translate-mode",
                "file-cache",
                "--translate-cache",
                "cache.tsv",
            )
            == 0
        )
        assert (workdir / "out" / "models" / "dc.model").exists()


class TestManifests:
    def test_manifest_written_and_replayable(self, workdir):
        assert run("--seed", "5", "split", "--in", "data.csv") == 0
        manifest = workdir / "out" / "manifests" / "split-000.json"
        payload = json.loads(manifest.read_text("utf-8"))
        assert payload["command"] == "split"
        assert payload["resolved"]["seed"] == 5
        before = {
            p.name: p.read_bytes() for p in (workdir / "out" / "splits").glob("*.csv")
        }
        assert run("replay", str(manifest)) == 0
        after = {
            p.name: p.read_bytes() for p in (workdir / "out" / "splits").glob("*.csv")
        }
        assert before == after

    def test_rerun_same_command_is_idempotent(self, workdir):
        args = ("--seed", "2", "split", "--in", "data.csv")
        assert run(*args) == 0
        first = (workdir / "out" / "splits" / "train.csv").read_bytes()
        assert run(*args) == 0
        assert (workdir / "out" / "splits" / "train.csv").read_bytes() == first

    def test_replay_forest_training(self, workdir):
        assert run("--seed", "0", "split", "--in", "data.csv") == 0
        assert run("featurize", "--train", "out/splits/train.csv", "--ngram-max", "1") == 0
        assert run("--seed", "3", "train", "forest", "--train", "out/splits/train.csv", "--n-trees", "5") == 0
        model_bytes = (workdir / "out" / "models" / "forest.model").read_bytes()
        manifest = sorted((workdir / "out" / "manifests").glob("train-*.json"))[-1]
        assert run("replay", str(manifest)) == 0
        assert (workdir / "out" / "models" / "forest.model").read_bytes() == model_bytes


class TestConfigPrecedence:
    def test_config_file_supplies_defaults(self, workdir):
        (workdir / "run.cfg").write_text("seed = 9\nngram_max = 1\n", encoding="utf-8")
        assert run("--config", "run.cfg", "split", "--in", "data.csv") == 0
        manifest = json.loads(
            (workdir / "out" / "manifests" / "split-000.json").read_text("utf-8")
        )
        assert manifest["resolved"]["seed"] == 9

    def test_env_overrides_config(self, workdir, monkeypatch):
        (workdir / "run.cfg").write_text("seed = 9\n", encoding="utf-8")
        monkeypatch.setenv("KANHOPE_SEED", "4")
        assert run("--config", "run.cfg", "split", "--in", "data.csv") == 0
        manifest = json.loads(
            (workdir / "out" / "manifests" / "split-000.json").read_text("utf-8")
        )
        assert manifest["resolved"]["seed"] == 4

    def test_flag_overrides_env(self, workdir, monkeypatch):
        monkeypatch.setenv("KANHOPE_SEED", "4")
        assert run("--seed", "13", "split", "--in", "data.csv") == 0
        manifest = json.loads(
            (workdir / "out" / "manifests" / "split-000.json").read_text("utf-8")
        )
        assert manifest["resolved"]["seed"] == 13

    def test_trailing_global_flags(self, workdir):
        assert run("split", "--in", "data.csv", "--fractions", "0.8,0.1,0.1", "--seed", "7") == 0
        manifest = json.loads(
            (workdir / "out" / "manifests" / "split-000.json").read_text("utf-8")
        )
        assert manifest["resolved"]["seed"] == 7

    def test_leading_global_survives_subcommand(self, workdir):
        assert run("--seed", "21", "split", "--in", "data.csv") == 0
        manifest = json.loads(
            (workdir / "out" / "manifests" / "split-000.json").read_text("utf-8")
        )
        assert manifest["resolved"]["seed"] == 21

    def test_malformed_config_rejected(self, workdir):
        (workdir / "bad.cfg").write_text("not a key value line\n", encoding="utf-8")
        assert run("--config", "bad.cfg", "stats", "--in", "data.csv") == 1
