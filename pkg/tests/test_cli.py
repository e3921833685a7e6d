import json
import subprocess
import sys
from pathlib import Path

import pytest

from hitpredict.cli import main
from hitpredict.synth import SynthConfig

CONFIG = SynthConfig(n_songs=40, n_hit_songs=10, n_users=30, n_early_adopters=6, weeks=10, lead_weeks=4, seed=5)


def run_pipeline(root: Path, monkeypatch) -> dict:
    """Whole pipeline with relative paths; returns {relative path: bytes}."""
    monkeypatch.chdir(root)
    Path("config.json").write_text(json.dumps(CONFIG.to_dict()))
    window = str(CONFIG.window)
    steps = [
        ["synth", "--config", "config.json", "--out", "synth"],
        ["ingest-charts", "--input", "synth/charts.csv", "--out", "labels", "--window", window],
        ["ingest-scrobbles", "--input", "synth/scrobbles.csv", "--out", "clean", "--window", window],
        ["build-features", "--mode", "listening", "--labels", "labels", "--scrobbles", "clean",
         "--count-mode", "weekly", "--out", "features"],
        ["evaluate", "--dataset", "features", "--algorithms", "lr,tree", "--k", "3", "--out", "eval"],
        ["report", "--runs", "eval", "--out", "report"],
    ]
    for argv in steps:
        assert main(argv) == 0, argv
    out = {}
    for p in sorted(Path(".").rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "manifest.json":
                doc = json.loads(data)
                doc.pop("created_at")
                data = json.dumps(doc, sort_keys=True).encode()
            out[str(p)] = data
    return out


def test_pipeline_is_deterministic(tmp_path, monkeypatch):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a = run_pipeline(tmp_path / "a", monkeypatch)
    b = run_pipeline(tmp_path / "b", monkeypatch)
    assert a.keys() == b.keys()
    assert [k for k in a if a[k] != b[k]] == []
    assert "eval/auc_table.csv" in a and "report/run.json" in a
    manifest = json.loads(a["features/manifest.json"])
    assert set(manifest["input_digests"]) == {"labels", "scrobbles"}
    assert manifest["subcommand"] == "build-features"


def test_json_summary_is_one_line(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    Path("config.json").write_text(json.dumps(CONFIG.to_dict()))
    assert main(["synth", "--config", "config.json", "--out", "s", "--json"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["hits"] == 10


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main([]) == 1
    assert main(["evaluate", "--dataset", str(tmp_path), "--out", str(tmp_path), "--k", "1"]) == 1
    assert main(["evaluate", "--dataset", str(tmp_path), "--out", str(tmp_path), "--algorithms", "knn"]) == 1
    assert main(["build-features", "--mode", "audio", "--labels", str(tmp_path), "--audio-csv", "x.csv",
                 "--feature-set", "audio", "--out", str(tmp_path)]) == 1
    assert main(["ingest-charts", "--input", "x", "--out", "y", "--window", "2013-01-01"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["ingest-charts", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("artist,title\nA,B\n")
    assert main(["ingest-charts", "--input", str(bad), "--out", str(tmp_path / "o")]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_songs": 5, "n_hit_songs": 0}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 2
    assert not (tmp_path / "s" / "charts.csv").exists()
    err = capsys.readouterr().err
    assert "error:" in err and "Traceback" not in err


def test_internal_error_exit_3(monkeypatch, tmp_path):
    import hitpredict.cli as cli
    from hitpredict.errors import InvariantError

    def boom(args):
        raise InvariantError("non-finite score")

    monkeypatch.setattr(cli, "cmd_synth", boom)
    parser_factory = cli.build_parser

    def patched():
        p = parser_factory()
        for action in p._subparsers._group_actions:
            action.choices["synth"].set_defaults(func=boom)
        return p

    monkeypatch.setattr(cli, "build_parser", patched)
    assert cli.main(["synth", "--config", "x", "--out", str(tmp_path)]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hitpredict", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "hitpredict" in proc.stdout
