"""End-to-end command-line flows in temporary directories."""

from __future__ import annotations

import argparse
import json

import pytest

from editrec import Backends, EditSession
from editrec.cli import _parse_ks, main

from conftest import (BENCH, BENCH_FIELD_INSERT, TEST, fixture_config,
                      fixture_files, synthetic_corpus_payloads,
                      write_corpus_dir)


@pytest.fixture(scope="module")
def mined(tmp_path_factory):
    """One mined corpus shared by the read-only CLI tests."""
    root = tmp_path_factory.mktemp("mined")
    corpus = root / "corpus"
    payloads, _ = synthetic_corpus_payloads()
    write_corpus_dir(corpus, payloads)
    out = root / "samples"
    rc = main(["mine", "--commits", str(corpus), "--out", str(out)])
    assert rc == 0
    return out


def _config_file(tmp_path) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(fixture_config().to_dict()))
    return str(path)


# ===== mine =====


def test_mine_writes_samples_and_report(mined):
    for name in ("file_loc.jsonl", "line_loc.jsonl", "gen.jsonl",
                 "mining_report.json"):
        assert (mined / name).exists()
    report = json.loads((mined / "mining_report.json").read_text())
    assert report["commits_seen"] == 30
    assert report["commits_kept"] == 26


def test_mine_single_task_prints_report(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    payloads, _ = synthetic_corpus_payloads(n_commits=8)
    write_corpus_dir(corpus, payloads)
    out = tmp_path / "samples"
    rc = main(["mine", "--commits", str(corpus), "--out", str(out),
               "--task", "gen"])
    assert rc == 0
    assert (out / "gen.jsonl").exists()
    assert not (out / "file_loc.jsonl").exists()
    printed = json.loads(capsys.readouterr().out)
    assert printed["commits_seen"] == 8
    assert printed["samples"]["gen"] > 0


# ===== eval and ablation =====


def test_eval_gen_writes_report_csv_and_figures(mined, tmp_path, capsys):
    out = tmp_path / "gen_report.json"
    csv_path = tmp_path / "gen_report.csv"
    figures = tmp_path / "figs"
    rc = main(["eval", "--dataset", str(mined / "gen.jsonl"),
               "--task", "gen", "--split", "test", "--k", "1,3",
               "--out", str(out), "--csv", str(csv_path),
               "--figures", str(figures)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["task"] == "gen"
    assert set(report["metrics"]["em"]) == {"1", "3"}
    assert csv_path.read_text().startswith("metric,value")
    assert (figures / "generation_metrics.png").exists()
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("report: ") for line in lines)
    assert any(line.startswith("figure: ") for line in lines)


def test_ablation_cli_compares_policies(mined, tmp_path):
    out = tmp_path / "ablation.json"
    figures = tmp_path / "figs"
    rc = main(["ablation", "--dataset", str(mined / "gen.jsonl"),
               "--split", "test", "--k", "1,3", "--out", str(out),
               "--figures", str(figures)])
    assert rc == 0
    result = json.loads(out.read_text())
    assert set(result) >= {"selective", "random", "directional_ok"}
    assert result["random"]["params"]["policy"] == "random"
    assert (figures / "ablation.png").exists()


def test_parse_ks_accepts_lists_and_rejects_garbage():
    assert _parse_ks("1,3,5") == [1, 3, 5]
    with pytest.raises(argparse.ArgumentTypeError):
        _parse_ks("1,x")
    with pytest.raises(argparse.ArgumentTypeError):
        _parse_ks("")


# ===== replay =====


def test_replay_prints_matching_digest(tmp_path, capsys):
    log = tmp_path / "s1.jsonl"
    config = _config_file(tmp_path)
    session = EditSession.create("s1", fixture_files(), fixture_config(),
                                 Backends.lexical(), log_path=log)
    session.record_edit(BENCH_FIELD_INSERT.to_edit(), revision=0)
    rc = main(["replay", "--log", str(log), "--config", config])
    assert rc == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == {
        "session_id": "s1",
        "revision": 1,
        "edits": 1,
        "state_digest": session.state_digest(),
    }


def test_replay_headless_log_is_an_error(tmp_path, capsys):
    log = tmp_path / "broken.jsonl"
    log.write_text(json.dumps({"type": "edit", "revision": 0}) + "\n")
    rc = main(["replay", "--log", str(log)])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


# ===== recommend =====


def _project_dir(tmp_path) -> str:
    root = tmp_path / "project"
    for rel, text in fixture_files().items():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    return str(root)


def test_recommend_then_candidates_round_trip(tmp_path, capsys):
    project = _project_dir(tmp_path)
    config = _config_file(tmp_path)
    edit_json = json.dumps(BENCH_FIELD_INSERT.to_edit().to_dict())

    rc = main(["recommend", "--project", project, "--edit", edit_json,
               "--config", config])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["files"][0]["path"] == BENCH
    assert report["files"][0]["score"] == 1.0
    flagged = {f["path"]: f for f in report["files"]}
    region = flagged[TEST]["regions"][0]
    assert region["edit_type"] == "<I>"
    assert region["start_line"] == 11

    # The ref is content-derived, so a fresh session resolves it.
    edit_file = tmp_path / "edit.json"
    edit_file.write_text(edit_json)
    rc = main(["recommend", "--project", project,
               "--edit", f"@{edit_file}", "--config", config,
               "--candidates", region["ref"], "--k", "2"])
    assert rc == 0
    result = json.loads(capsys.readouterr().out)
    assert result["candidates"][0]["rank"] == 1
    assert result["candidates"][0]["content"] == ["\tmatch *matcher"]


# ===== report =====


def test_report_rerenders_without_touching_input(tmp_path, capsys):
    from editrec.evaluation import MetricReport
    from editrec.reporting import write_report_json

    report = MetricReport(
        task="gen", config_hash="cafe01", n_samples=2,
        metrics={"em": {1: 0.5}, "bleu": {1: 50.0}, "failures": 0},
    )
    source = write_report_json(report, tmp_path / "in.json")
    before = source.read_bytes()
    csv_path = tmp_path / "out.csv"
    figures = tmp_path / "figs"
    rc = main(["report", "--input", str(source), "--csv", str(csv_path),
               "--figures", str(figures)])
    assert rc == 0
    assert source.read_bytes() == before
    assert csv_path.exists()
    assert (figures / "generation_metrics.png").exists()
    capsys.readouterr()


def test_report_without_outputs_exits_2(tmp_path, capsys):
    source = tmp_path / "in.json"
    source.write_text("{}")
    rc = main(["report", "--input", str(source)])
    assert rc == 2
    assert "nothing to do" in capsys.readouterr().err
