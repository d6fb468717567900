import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
import yaml

import tritopic.pipeline as pipeline_mod
from tritopic.cli import main as cli_main
from tritopic.errors import ConfigError
from tritopic.pipeline import load_config, run
from tritopic.synth import SynthParams, make_synthetic_corpus


def write_corpus(tmp_path, **overrides):
    defaults = dict(
        n_videos=2, segments_per_video=30, n_topics=3,
        informativeness={"text": 0.8, "audio": 0.8, "visual": 1.0},
        noise_scale=0.3, seed=13,
    )
    defaults.update(overrides)
    make_synthetic_corpus(tmp_path / "corpus", SynthParams(**defaults))
    return tmp_path / "corpus"


def write_config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    return path


class TestConfig:
    def test_unknown_top_level_key(self, tmp_path):
        write_corpus(tmp_path)
        path = write_config(tmp_path, "corpus_dir: corpus\nbogus_key: 1\n")
        with pytest.raises(ConfigError, match="bogus_key"):
            load_config(path)

    def test_unknown_nested_key(self, tmp_path):
        write_corpus(tmp_path)
        path = write_config(tmp_path, "corpus_dir: corpus\ncluster: {min_size: 5}\n")
        with pytest.raises(ConfigError, match="min_size"):
            load_config(path)

    def test_unknown_mode(self, tmp_path):
        write_corpus(tmp_path)
        path = write_config(tmp_path, "corpus_dir: corpus\nmode: audio_only\n")
        with pytest.raises(ConfigError, match="mode"):
            load_config(path)

    def test_corpus_dir_and_videos_exclusive(self, tmp_path):
        write_corpus(tmp_path)
        path = write_config(tmp_path, "corpus_dir: corpus\nvideos: []\n")
        with pytest.raises(ConfigError, match="exactly one"):
            load_config(path)

    def test_missing_modality_for_mode(self, tmp_path):
        corpus = write_corpus(tmp_path)
        (corpus / "video_000" / "audio.emb1").unlink()
        path = write_config(tmp_path, "corpus_dir: corpus\nmode: full\n")
        with pytest.raises(ConfigError, match="audio"):
            load_config(path)

    def test_file_and_endpoint_conflict(self, tmp_path):
        write_corpus(tmp_path)
        path = write_config(
            tmp_path,
            "corpus_dir: corpus\nendpoints: {text: 'http://localhost:1/embed'}\n",
        )
        with pytest.raises(ConfigError, match="both"):
            load_config(path)

    def test_defaults_mirror_reference_settings(self, tmp_path):
        write_corpus(tmp_path)
        config = load_config(write_config(tmp_path, "corpus_dir: corpus\n"))
        assert config.cluster.reducer_neighbors == 15
        assert config.cluster.reducer_components == 8
        assert config.cluster.min_cluster_size == 5
        assert config.cluster.merge_threshold == 0.70
        assert (config.fusion.text, config.fusion.audio, config.fusion.visual) == (
            0.34, 0.33, 0.33,
        )
        assert config.selection.frames_per_segment == 5
        assert config.selection.min_candidates == 8


class TestRun:
    def test_rerun_byte_identical(self, tmp_path):
        write_corpus(tmp_path)
        config_text = "corpus_dir: corpus\nmode: full\noutput_dir: {out}\n"
        first = load_config(write_config(tmp_path, config_text.format(out="out_a")))
        second = load_config(write_config(tmp_path, config_text.format(out="out_b")))
        assert run(first).all_succeeded
        assert run(second).all_succeeded
        for name in ("topics.json", "timeline.json", "fused.emb1", "gates.json"):
            a = (tmp_path / "out_a" / "video_000" / name).read_bytes()
            b = (tmp_path / "out_b" / "video_000" / name).read_bytes()
            assert a == b, name
        assert (tmp_path / "out_a" / "metrics.json").read_bytes() == (
            tmp_path / "out_b" / "metrics.json"
        ).read_bytes()

    def test_bimodal_fused_rows(self, tmp_path):
        write_corpus(tmp_path)
        config = load_config(
            write_config(tmp_path, "corpus_dir: corpus\nmode: text_audio\n")
        )
        assert run(config).all_succeeded
        from tritopic.corpus import load_embeddings

        fused = load_embeddings(config.output_dir / "video_000" / "fused.emb1",
                                expected_rows=30)
        assert fused.dims == 2 * 40  # 2 * min(d_text=48, d_audio=40)
        assert not (config.output_dir / "video_000" / "gates.json").exists()

    def test_mode_lattice_reads_only_required(self, tmp_path, monkeypatch):
        write_corpus(tmp_path)
        loaded = []
        original = pipeline_mod.load_embeddings

        def spy(path, expected_rows, modality=None):
            loaded.append(modality)
            return original(path, expected_rows, modality)

        monkeypatch.setattr(pipeline_mod, "load_embeddings", spy)
        config = load_config(write_config(tmp_path, "corpus_dir: corpus\nmode: text_only\n"))
        assert run(config).all_succeeded
        assert set(loaded) == {"text"}

        loaded.clear()
        config = load_config(
            write_config(tmp_path, "corpus_dir: corpus\nmode: text_visual\noutput_dir: o2\n")
        )
        assert run(config).all_succeeded
        assert set(loaded) == {"text", "visual"}

    def test_diagnostics_do_not_change_topics(self, tmp_path):
        write_corpus(tmp_path)
        plain = load_config(
            write_config(tmp_path, "corpus_dir: corpus\nmode: full\noutput_dir: plain\n")
        )
        with_diag = load_config(
            write_config(
                tmp_path,
                "corpus_dir: corpus\nmode: full\noutput_dir: diag\n"
                "diagnostics: {enabled: true}\n",
            )
        )
        assert run(plain).all_succeeded
        assert run(with_diag).all_succeeded
        assert (tmp_path / "plain" / "video_000" / "topics.json").read_bytes() == (
            tmp_path / "diag" / "video_000" / "topics.json"
        ).read_bytes()
        timeline = json.loads((tmp_path / "diag" / "video_000" / "timeline.json").read_text())
        assert any(seg["speaker"] is not None for seg in timeline["segments"])

    def test_failed_video_recorded_run_continues(self, tmp_path):
        corpus = write_corpus(tmp_path)
        (corpus / "video_000" / "text.emb1").write_bytes(b'{"magic":"EMB1"')  # truncated
        config = load_config(write_config(tmp_path, "corpus_dir: corpus\nmode: full\n"))
        result = run(config)
        assert not result.all_succeeded
        assert [v.video_id for v in result.per_video if v.error] == ["video_000"]
        metrics = json.loads((config.output_dir / "metrics.json").read_text())
        assert metrics["failed_videos"] == ["video_000"]
        assert "video_001" in metrics["per_video"]

    def test_timeline_contents(self, tmp_path):
        write_corpus(tmp_path)
        config = load_config(write_config(tmp_path, "corpus_dir: corpus\nmode: full\n"))
        run(config)
        timeline = json.loads((config.output_dir / "video_000" / "timeline.json").read_text())
        segs = timeline["segments"]
        assert [s["index"] for s in segs] == list(range(30))
        assert all(0.0 <= s["gate"] <= 1.0 for s in segs)
        assert all("topic" in s and "seed" in s and "frames" in s for s in segs)

    def test_workers_match_serial(self, tmp_path):
        write_corpus(tmp_path, n_videos=3)
        serial = load_config(
            write_config(tmp_path, "corpus_dir: corpus\noutput_dir: serial\n")
        )
        parallel = load_config(
            write_config(tmp_path, "corpus_dir: corpus\noutput_dir: parallel\nworkers: 3\n")
        )
        assert run(serial).all_succeeded
        assert run(parallel).all_succeeded
        assert (tmp_path / "serial" / "metrics.json").read_bytes() == (
            tmp_path / "parallel" / "metrics.json"
        ).read_bytes()

    def test_manifest_records_hashes_and_definitions(self, tmp_path):
        write_corpus(tmp_path)
        config = load_config(write_config(tmp_path, "corpus_dir: corpus\n"))
        run(config)
        manifest = json.loads((config.output_dir / "manifest.json").read_text())
        assert manifest["config_hash"]
        assert manifest["definitions"]["noise_ratio"]
        assert len(manifest["input_hashes"]) == 2 * 4  # segments + 3 matrices per video

    def test_seeded_run_records_matches(self, tmp_path):
        write_corpus(tmp_path)
        # seed centroids live in the text-embedding space, so the table must
        # share the text dimensionality (48)
        wv_lines = []
        rng = np.random.default_rng(0)
        for t in range(3):
            for j in range(24):
                vec = " ".join(f"{x:.6f}" for x in rng.normal(size=48))
                wv_lines.append(f"theme{t}term{j} {vec}")
        (tmp_path / "wv.txt").write_text("\n".join(wv_lines) + "\n")
        seeds = [{"name": f"planted{t}", "words": [f"theme{t}term{j}" for j in range(4)]}
                 for t in range(3)]
        (tmp_path / "seeds.yaml").write_text(yaml.safe_dump(seeds))
        config = load_config(write_config(
            tmp_path,
            "corpus_dir: corpus\nmode: full\nseeds: seeds.yaml\nword_vectors: wv.txt\n",
        ))
        result = run(config)
        assert result.all_succeeded
        report = json.loads((config.output_dir / "metrics.json").read_text())
        assert report["per_video"]["video_000"]["semantic"]["we_alignment"] is not None


class _VisualStub(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        items = payload["items"]
        rng = np.random.default_rng(0)
        data = np.stack([
            rng.normal(size=6) + [hash(item) % 7 for _ in range(1)] * np.ones(6)
            for item in items
        ]).astype(np.float32) if items else np.zeros((0, 6), dtype=np.float32)
        from tritopic.corpus import EmbeddingMatrix, emb1_bytes

        body = emb1_bytes(EmbeddingMatrix(modality="visual", data=data, source="stub-visual"))
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def visual_endpoint():
    server = HTTPServer(("127.0.0.1", 0), _VisualStub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/embed/visual"
    server.shutdown()


def test_frame_selection_with_visual_endpoint(tmp_path, visual_endpoint):
    from PIL import Image

    corpus = write_corpus(tmp_path, n_videos=1, segments_per_video=8)
    (corpus / "video_000" / "visual.emb1").unlink()

    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    rng = np.random.default_rng(1)
    manifest_rows = []
    for seg in range(8):
        for j in range(4):
            name = f"seg{seg}_f{j}.png"
            img = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
            Image.fromarray(img).save(frames_dir / name)
            manifest_rows.append(
                {"video_id": "video_000", "segment_index": seg,
                 "timestamp": seg * 5.0 + j, "path": name}
            )
    with (frames_dir / "manifest.jsonl").open("w") as fh:
        for row in manifest_rows:
            fh.write(json.dumps(row) + "\n")

    config_text = f"""
videos:
  - id: video_000
    segments: corpus/video_000/segments.jsonl
    embeddings:
      text: corpus/video_000/text.emb1
      audio: corpus/video_000/audio.emb1
    frames_manifest: frames/manifest.jsonl
endpoints:
  visual: '{visual_endpoint}'
mode: full
output_dir: out
cluster: {{min_cluster_size: 2}}
"""
    config = load_config(write_config(tmp_path, config_text))
    result = run(config)
    assert result.all_succeeded
    report_path = config.output_dir / "video_000" / "frames_selected.jsonl"
    rows = [json.loads(l) for l in report_path.read_text().splitlines()]
    assert rows
    assert {r["segment_index"] for r in rows} == set(range(8))
    assert all(r["rank"] < 4 and "score" in r for r in rows)
    timeline = json.loads((config.output_dir / "video_000" / "timeline.json").read_text())
    assert all(len(s["frames"]) >= 1 for s in timeline["segments"])


class TestCli:
    def test_synth_run_metrics_chain(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert cli_main([
            "synth", "--seed", "4", "--videos", "2", "--segments", "25", "--topics", "3",
            "--inform", "text=0.8,audio=0.8,visual=1", "--out", "corpus",
        ]) == 0
        (tmp_path / "run.yaml").write_text("corpus_dir: corpus\nmode: full\n")
        assert cli_main(["run", "--config", "run.yaml", "--out", "results"]) == 0
        assert cli_main([
            "metrics",
            "--labels", "results/video_000/topics.json",
            "--embeddings", "results/video_000/fused.emb1",
            "--space", "fused",
        ]) == 0
        out = capsys.readouterr().out
        assert '"iec"' in out

    def test_run_exit_code_on_failure(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        corpus = write_corpus(tmp_path)
        (corpus / "video_001" / "segments.jsonl").write_text("broken\n")
        (tmp_path / "run.yaml").write_text("corpus_dir: corpus\nmode: full\n")
        assert cli_main(["run", "--config", "run.yaml"]) == 1
