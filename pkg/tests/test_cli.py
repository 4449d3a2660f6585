import json

import pytest

from pressclaims.cli import main

FIX = "tests/fixtures"


def run(*argv):
    return main(list(argv))


class TestUsage:
    def test_no_arguments_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as err:
            main(["stats", "--frobnicate"])
        assert err.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
        assert "pressclaims" in capsys.readouterr().out


class TestIngestAndStats:
    def test_ingest_summary(self, capsys):
        assert run("ingest", "--in", f"{FIX}/briefings") == 0
        out = capsys.readouterr().out
        assert "id=pb-001" in out and "sentences=20" in out

    def test_ingest_rejects_bad_transcript(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"id": "x"')
        assert run("ingest", "--in", str(bad)) == 1
        assert "error" in capsys.readouterr().err

    def test_stats_output(self, capsys):
        assert run("stats", "--in", f"{FIX}/briefings") == 0
        out = capsys.readouterr().out
        assert "sentences: 60" in out
        assert "mean_tokens: " in out

    def test_stats_empty_corpus(self, tmp_path, capsys):
        doc = {"id": "e", "title": "", "intro": "", "date": None, "turns": []}
        (tmp_path / "e.json").write_text(json.dumps(doc))
        assert run("stats", "--in", str(tmp_path)) == 0
        assert "mean_tokens: undefined" in capsys.readouterr().out


class TestSegmentCommand:
    def test_segment_exact(self, tmp_path):
        out = tmp_path / "seg.json"
        code = run(
            "segment",
            "--in", f"{FIX}/briefings/pb-001.json",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--mode", "exact",
            "--segments", "4",
            "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        segments = payload["segments"]
        assert len(segments) == 4
        assert segments[0]["start"] == 0 and segments[-1]["end"] == 19
        for left, right in zip(segments, segments[1:]):
            assert right["start"] == left["end"] + 1


class TestTrainBaseline:
    def test_reproduces_fixture_model(self, tmp_path):
        out = tmp_path / "model.json"
        code = run(
            "train-baseline",
            "--briefings", f"{FIX}/briefings",
            "--gold", f"{FIX}/gold/labels.jsonl",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--epochs", "400",
            "--learning-rate", "0.5",
            "--seed", "13",
            "--out", str(out),
        )
        assert code == 0
        trained = json.loads(out.read_text())
        checked_in = json.loads(open(f"{FIX}/models/baseline.json").read())
        assert trained == checked_in  # bitwise-identical training


class TestScoreCommand:
    def test_scores_every_sentence(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        code = run(
            "score",
            "--in", f"{FIX}/briefings/pb-001.json",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--model", f"{FIX}/models/baseline.json",
            "--out", str(out),
        )
        assert code == 0
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(lines) == 20
        assert all(0.0 <= l["confidence"] <= 1.0 for l in lines)
        assert [l["sentence_index"] for l in lines] == list(range(20))


class TestExtract:
    def extract(self, out_path, *extra):
        return run(
            "extract",
            "--config", f"{FIX}/configs/default.json",
            "--in", f"{FIX}/briefings/pb-001.json",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--model", f"{FIX}/models/baseline.json",
            "--out", str(out_path),
            *extra,
        )

    def test_matches_golden_bytes(self, tmp_path):
        out = tmp_path / "stmts.jsonl"
        assert self.extract(out) == 0
        golden = open(f"{FIX}/golden/pb-001.statements.jsonl", "rb").read()
        assert out.read_bytes() == golden

    def test_rerun_is_byte_identical(self, tmp_path):
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        assert self.extract(first) == 0
        assert self.extract(second) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_manifest_sidecar(self, tmp_path):
        out = tmp_path / "stmts.jsonl"
        assert self.extract(out) == 0
        manifest = json.loads((tmp_path / "stmts.jsonl.manifest.json").read_text())
        assert set(manifest) >= {
            "config_hash",
            "model_id",
            "input_digests",
            "manifest_id",
            "tool_version",
            "timestamp",
        }
        assert any(path.endswith("pb-001.json") for path in manifest["input_digests"])

    def test_offline_cache_miss_fails_cleanly(self, tmp_path, capsys):
        config = tmp_path / "wiki.json"
        config.write_text(json.dumps({"filter_method": "wikify_title"}))
        code = run(
            "extract",
            "--config", str(config),
            "--in", f"{FIX}/briefings/pb-001.json",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--model", f"{FIX}/models/baseline.json",
            "--wiki-cache", str(tmp_path / "empty_cache"),
            "--offline",
            "--out", str(tmp_path / "x.jsonl"),
        )
        assert code == 1
        assert "cache" in capsys.readouterr().err.lower()

    def test_wikify_filter_with_fixture_cache(self, tmp_path):
        config = tmp_path / "wiki.json"
        config.write_text(json.dumps({"filter_method": "wikify_title"}))
        out = tmp_path / "stmts.jsonl"
        code = run(
            "extract",
            "--config", str(config),
            "--in", f"{FIX}/briefings/pb-001.json",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--model", f"{FIX}/models/baseline.json",
            "--wiki-cache", f"{FIX}/wiki_cache",
            "--offline",
            "--out", str(out),
        )
        assert code == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert records
        assert all(r["method_provenance"]["filter_method"] == "wikify_title" for r in records)

    def test_flag_overrides_config(self, tmp_path):
        out = tmp_path / "stmts.jsonl"
        assert self.extract(out, "--claim-threshold", "0.99") == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["method_provenance"]["claim_threshold"] == 0.99 for r in records)


class TestEvaluate:
    def test_reports_and_manifest(self, tmp_path, capsys):
        csv_out = tmp_path / "report.csv"
        json_out = tmp_path / "report.json"
        code = run(
            "evaluate",
            "--statements", f"{FIX}/golden/pb-001.statements.jsonl",
            "--gold", f"{FIX}/gold/labels.jsonl",
            "--positive-class", "complete_claim",
            "--complete-ratio",
            "--out-csv", str(csv_out),
            "--out-json", str(json_out),
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.startswith("config_label,precision,recall,f1")
        assert csv_out.exists()
        payload = json.loads(json_out.read_text())
        assert payload["rows"][0]["config_label"] == "0.8 embedding"
        assert payload["complete_ratio"] is not None
        assert (tmp_path / "report.csv.manifest.json").exists()


class TestSweep:
    def test_six_rows(self, tmp_path, capsys):
        csv_out = tmp_path / "sweep.csv"
        code = run(
            "sweep",
            "--configs", f"{FIX}/configs/sweep6.json",
            "--in", f"{FIX}/briefings",
            "--gold", f"{FIX}/gold/labels.jsonl",
            "--vectors", f"{FIX}/vectors/mini_de.vec",
            "--model", f"{FIX}/models/baseline.json",
            "--wiki-cache", f"{FIX}/wiki_cache",
            "--offline",
            "--out-csv", str(csv_out),
        )
        assert code == 0
        lines = csv_out.read_text().splitlines()
        assert len(lines) == 7  # header + six configs
        assert lines[1].startswith("0.9,") and lines[4].startswith("0.8 embedding,")
