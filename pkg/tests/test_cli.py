import json

import pytest
from fastapi.testclient import TestClient

import _fixtures
import _synth
from modcoach.cli import main as cli_main


@pytest.fixture(scope="module")
def fixture_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("clicorpus")
    return _fixtures.build_corpus(root)


class TestCorpusBuild:
    def test_build_prints_ground_truth_stats(self, tmp_path, capsys):
        transcripts = _fixtures.write_transcripts(tmp_path)
        out = tmp_path / "corpus.jsonl"
        rc = cli_main(["corpus", "build", str(transcripts), "-o", str(out)])
        captured = capsys.readouterr()
        assert rc == 0
        stats = json.loads(captured.out)
        assert stats["talk_count"] == 20
        assert stats["sentence_count"] == 20
        expected_words = sum(
            len(t.split()) for t in _fixtures.PLANTED_TEXTS + _fixtures.FILLER_TEXTS)
        assert stats["word_count"] == expected_words
        assert out.exists()
        assert out.with_name("corpus.jsonl.labels.jsonl").exists()

    def test_empty_dir_zero_stats(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        out = tmp_path / "corpus.jsonl"
        rc = cli_main(["corpus", "build", str(empty), "-o", str(out)])
        captured = capsys.readouterr()
        assert rc == 0
        assert json.loads(captured.out)["sentence_count"] == 0

    def test_malformed_json_names_file(self, tmp_path, capsys):
        bad_dir = tmp_path / "bad"
        bad_dir.mkdir()
        (bad_dir / "broken.json").write_text("{oops")
        rc = cli_main(["corpus", "build", str(bad_dir), "-o",
                       str(tmp_path / "c.jsonl")])
        captured = capsys.readouterr()
        assert rc == 1
        assert "broken.json" in captured.err

    def test_overwrite_guard(self, tmp_path, capsys):
        transcripts = _fixtures.write_transcripts(tmp_path)
        out = tmp_path / "corpus.jsonl"
        assert cli_main(["corpus", "build", str(transcripts), "-o", str(out)]) == 0
        capsys.readouterr()
        assert cli_main(["corpus", "build", str(transcripts), "-o", str(out)]) == 1
        assert "--force" in capsys.readouterr().err
        assert cli_main(["corpus", "build", str(transcripts), "-o", str(out),
                         "--force"]) == 0

    def test_reindex_idempotent(self, fixture_paths, tmp_path, capsys):
        corpus_path, _ = fixture_paths
        out = tmp_path / "idx.json"
        assert cli_main(["reindex", "--corpus", str(corpus_path),
                         "-o", str(out)]) == 0
        first = out.read_bytes()
        capsys.readouterr()
        assert cli_main(["reindex", "--corpus", str(corpus_path),
                         "-o", str(out)]) == 0
        assert out.read_bytes() == first


class TestAnalyze:
    def test_silence_fixture_all_none(self, tmp_path, capsys):
        import numpy as np
        wav = tmp_path / "silence.wav"
        wav.write_bytes(_synth.wav_bytes(np.zeros(_synth.SR)))
        timings = tmp_path / "t.json"
        timings.write_text(json.dumps([
            {"text": "so", "start": 0.0, "end": 0.4},
            {"text": "quiet", "start": 0.45, "end": 0.9}]))
        rc = cli_main(["analyze", str(wav), "--timings", str(timings),
                       "--format", "json"])
        captured = capsys.readouterr()
        assert rc == 0
        sentences = json.loads(captured.out)["sentences"]
        for label in sentences[0]["labels"]:
            assert set(label.values()) == {"none"}

    def test_loud_middle_word(self, tmp_path, capsys):
        samples, words = _synth.render_words([
            ("one", 0.5, -1.0, 0.18, 0.05),
            ("two", 0.5, -1.0, 0.45, 0.05),
            ("three", 0.5, -1.0, 0.18, 0.0),
        ])
        wav = tmp_path / "loud.wav"
        wav.write_bytes(_synth.wav_bytes(samples))
        timings = tmp_path / "t.json"
        timings.write_text(json.dumps([w.to_dict() for w in words]))
        rc = cli_main(["analyze", str(wav), "--timings", str(timings),
                       "--format", "json"])
        captured = capsys.readouterr()
        assert rc == 0
        labels = json.loads(captured.out)["sentences"][0]["labels"]
        assert labels[1]["volume"] == "louder"

    def test_missing_timings_usage_error(self, tmp_path):
        wav = tmp_path / "x.wav"
        with pytest.raises(SystemExit) as excinfo:
            cli_main(["analyze", str(wav)])
        assert excinfo.value.code == 2


class TestRecommend:
    def test_planted_duplicate_rank_one(self, fixture_paths, capsys):
        corpus_path, index_path = fixture_paths
        rc = cli_main(["recommend", _fixtures.QUERY_TEXT,
                       "--corpus", str(corpus_path), "--index", str(index_path),
                       "-k", "50"])
        captured = capsys.readouterr()
        assert rc == 0
        payload = json.loads(captured.out)
        assert payload["examples"][0]["id"] == "talk00:0"
        assert payload["examples"][0]["cosine"] == pytest.approx(1.0, abs=1e-6)

    def test_k_exceeding_corpus_ok(self, fixture_paths, capsys):
        corpus_path, index_path = fixture_paths
        rc = cli_main(["recommend", "Tact is art.",
                       "--corpus", str(corpus_path), "--index", str(index_path),
                       "-k", "999"])
        captured = capsys.readouterr()
        assert rc == 0
        assert json.loads(captured.out)["params"]["retrieved"] == 20

    def test_no_index_exit_1_with_hint(self, fixture_paths, tmp_path, capsys):
        corpus_path, _ = fixture_paths
        rc = cli_main(["recommend", "Tact is art.",
                       "--corpus", str(corpus_path),
                       "--index", str(tmp_path / "missing.json")])
        captured = capsys.readouterr()
        assert rc == 1
        assert "reindex" in captured.err

    def test_cli_service_parity_byte_identical(self, fixture_paths, capsys):
        corpus_path, index_path = fixture_paths
        rc = cli_main(["recommend", _fixtures.QUERY_TEXT,
                       "--corpus", str(corpus_path), "--index", str(index_path)])
        captured = capsys.readouterr()
        assert rc == 0
        cli_bytes = captured.out.strip().encode("utf-8")

        from modcoach.config import load_config
        from modcoach.pipeline import Engine
        from modcoach.service import create_app
        config = load_config(env={})
        engine = Engine.load(config, corpus_path=corpus_path,
                             index_path=index_path)
        app = create_app(config, engine=engine)
        with TestClient(app) as tc:
            analyzed = tc.post("/analyze", json={"text": _fixtures.QUERY_TEXT})
            sid = analyzed.json()["sentences"][0]["id"]
            response = tc.post("/recommend", json={"sentence_id": sid})
            assert response.status_code == 200
            assert response.content == cli_bytes
