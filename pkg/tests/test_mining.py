"""Commit filtering, sample construction, corpus readers, the mine pipeline."""

from __future__ import annotations

import json
import subprocess

import pytest

from editrec import (CommitRecord, Hunk, InsufficientNegatives,
                     ProjectSnapshot, build_samples, filter_commit, mine,
                     read_commit_dir, read_git_repo, read_samples, split_of)
from editrec.mining import (REASON_GENERATED_FILE, REASON_HUNK_SIZE,
                            REASON_MESSAGE_LENGTH, REASON_MIN_HUNKS,
                            REASON_NON_ENGLISH)

from conftest import (fixture_commit, synthetic_corpus_payloads,
                      write_corpus_dir)

GOOD_MESSAGE = "rework the loader validation path for stricter inputs"


def _commit(hunks, message=GOOD_MESSAGE, snapshot=None):
    return CommitRecord(
        commit_id="c1",
        message=message,
        hunks=hunks,
        snapshot_before=snapshot or ProjectSnapshot({}),
    )


def _small_hunks(n=3, path="src/a.py"):
    return [
        Hunk(path, i + 1, (f"old {i}",), i + 1, (f"new {i}",)) for i in range(n)
    ]


# ===== Filtering =====


def test_filter_accepts_clean_commit():
    decision = filter_commit(_commit(_small_hunks()))
    assert decision.accepted
    assert decision.reasons == []


def test_filter_rejects_too_few_hunks():
    decision = filter_commit(_commit(_small_hunks(2)))
    assert decision.reasons == [REASON_MIN_HUNKS]


def test_filter_rejects_oversized_hunk():
    big = Hunk("src/a.py", 9, (), 10, tuple(f"line {i}" for i in range(15)))
    decision = filter_commit(_commit(_small_hunks() + [big]))
    assert decision.reasons == [REASON_HUNK_SIZE]


def test_filter_oversized_boundary_is_fourteen():
    ok = Hunk("src/a.py", 9, (), 10, tuple(f"line {i}" for i in range(14)))
    assert filter_commit(_commit(_small_hunks() + [ok])).accepted


def test_filter_rejects_short_message():
    decision = filter_commit(_commit(_small_hunks(), message="fix the parser bug"))
    assert decision.reasons == [REASON_MESSAGE_LENGTH]


def test_filter_message_boundary_is_six_tokens():
    assert filter_commit(
        _commit(_small_hunks(), message="fix the parser bug again today")
    ).accepted


def test_filter_rejects_non_english_message():
    decision = filter_commit(
        _commit(_small_hunks(), message="пофикшен разбор параметров запуска утилиты")
    )
    assert REASON_NON_ENGLISH in decision.reasons


def test_filter_rejects_denylisted_extension():
    hunks = _small_hunks() + [Hunk("out/app.pyc", 1, ("a",), 1, ("b",))]
    decision = filter_commit(_commit(hunks))
    assert decision.reasons == [REASON_GENERATED_FILE]


def test_filter_rejects_generated_marker_in_head():
    snapshot = ProjectSnapshot({
        "gen/api.py": ("# Code generated by protoc. DO NOT EDIT.", "x = 1"),
    })
    hunks = _small_hunks(3, path="gen/api.py")
    decision = filter_commit(_commit(hunks, snapshot=snapshot))
    assert decision.reasons == [REASON_GENERATED_FILE]


def test_filter_collects_every_failed_reason():
    big = Hunk("out/app.pyc", 1, (), 2, tuple(f"l{i}" for i in range(20)))
    decision = filter_commit(_commit([big], message="fix"))
    assert set(decision.reasons) == {
        REASON_MIN_HUNKS, REASON_HUNK_SIZE, REASON_MESSAGE_LENGTH,
        REASON_GENERATED_FILE,
    }


# ===== Splits =====


def test_split_is_deterministic_and_total():
    names = [f"commit-{i}" for i in range(200)]
    first = [split_of(n) for n in names]
    second = [split_of(n) for n in names]
    assert first == second
    counts = {s: first.count(s) for s in ("train", "valid", "test")}
    assert sum(counts.values()) == 200
    # Rough proportionality; md5 buckets spread evenly at this size.
    assert counts["train"] > counts["test"] > counts["valid"] > 0


def test_split_rejects_bad_ratios():
    with pytest.raises(ValueError):
        split_of("x", (0.5, 0.5, 0.5))


# ===== Sample construction =====


def test_one_sample_per_hunk_per_task():
    record = fixture_commit()
    for task in ("file_loc", "line_loc", "gen"):
        samples = build_samples(record, task, negatives=0)
        assert len(samples) == len(record.hunks)
        assert all(s["task"] == task for s in samples)
        assert all(s["v"] == 1 for s in samples)
        assert [s["hunk_index"] for s in samples] == list(range(len(record.hunks)))


def test_unknown_task_rejected():
    with pytest.raises(ValueError):
        build_samples(fixture_commit(), "rank_files")


def test_file_loc_negatives_are_untouched_and_sorted():
    payloads, _ = synthetic_corpus_payloads(1)
    record = _record_from_payload(payloads[0])
    samples = build_samples(record, "file_loc", negatives=5, seed=42)
    touched = set(record.files_touched)
    for sample in samples:
        assert sample["negatives"] == sorted(sample["negatives"])
        assert not set(sample["negatives"]) & touched
        assert sample["target_file"] == record.hunks[sample["hunk_index"]].file_path
        assert sample["target_file"] not in sample["positives"]
        for path in [sample["target_file"], *sample["positives"],
                     *sample["negatives"]]:
            assert path in sample["files"]


def test_file_loc_sampling_is_seed_stable():
    payloads, _ = synthetic_corpus_payloads(1)
    record = _record_from_payload(payloads[0])
    a = build_samples(record, "file_loc", negatives=5, seed=42)
    b = build_samples(record, "file_loc", negatives=5, seed=42)
    c = build_samples(record, "file_loc", negatives=5, seed=43)
    assert a == b
    assert [s["negatives"] for s in a] != [s["negatives"] for s in c]


def test_insufficient_negatives_raises():
    record = fixture_commit()  # three files, two touched
    with pytest.raises(InsufficientNegatives):
        build_samples(record, "file_loc", negatives=5)


def test_line_loc_sample_excludes_sibling_replace_spans():
    record = fixture_commit()
    samples = build_samples(record, "line_loc", negatives=0)
    by_index = {s["hunk_index"]: s for s in samples}
    # Hunk 4 rewrites testing.go line 35; hunk 5 rewrites lines 15-16.
    sample = by_index[4]
    assert sample["excluded_lines"] == [15, 16]
    assert sample["gt_labels"] == [[35, "<R>"]]
    assert sample["file_before"]


def test_gen_sample_region_and_ground_truth():
    record = fixture_commit()
    samples = build_samples(record, "gen", negatives=0)
    sample = samples[0]  # the benchmark.go field insert
    assert sample["region"]["edit_type"] == "<I>"
    assert sample["region"]["start_line"] == 11
    assert sample["gt_after"] == ["\tmatch *matcher"]
    assert len(sample["prior_edits"]) == len(record.hunks) - 1
    assert len(sample["prior_contexts"]) == len(sample["prior_edits"])


# ===== Corpus readers =====


def _record_from_payload(payload):
    snapshot = ProjectSnapshot({
        path: tuple(lines) for path, lines in payload["snapshot_before"].items()
    })
    return CommitRecord(
        commit_id=payload["commit_id"],
        message=payload["message"],
        hunks=[Hunk.from_dict(h) for h in payload["hunks"]],
        snapshot_before=snapshot,
    )


def test_commit_dir_reader_round_trips(tmp_path):
    payloads, _ = synthetic_corpus_payloads(3)
    write_corpus_dir(tmp_path, payloads)
    records = read_commit_dir(tmp_path)
    assert [r.commit_id for r in records] == [p["commit_id"] for p in payloads]
    assert records[0].snapshot_before.lines("docs/readme.md") == (
        "# project", "", "usage notes")
    assert len(records[0].hunks) == 4


def test_commit_dir_reader_accepts_diff_text(tmp_path):
    diff = (
        "--- a/src/app.py\n+++ b/src/app.py\n"
        "@@ -1,1 +1,1 @@\n-old line\n+new line\n"
    )
    payload = {
        "commit_id": "c-diff",
        "message": GOOD_MESSAGE,
        "snapshot_before": {"src/app.py": "old line\nrest"},
        "diff": diff,
    }
    (tmp_path / "c-diff.json").write_text(json.dumps(payload))
    records = read_commit_dir(tmp_path)
    assert len(records) == 1
    assert records[0].hunks[0].before_lines == ("old line",)
    assert records[0].snapshot_before.lines("src/app.py") == ("old line", "rest")


def _git(repo, *args):
    subprocess.run(["git", "-C", str(repo), *args], check=True,
                   capture_output=True)


def test_read_git_repo_walks_history(tmp_path):
    repo = tmp_path / "repo"
    repo.mkdir()
    _git(repo, "init", "-q")
    _git(repo, "config", "user.email", "dev@example.com")
    _git(repo, "config", "user.name", "Dev")
    (repo / "app.py").write_text("def run():\n    return 1\n")
    _git(repo, "add", ".")
    _git(repo, "commit", "-q", "-m", "initial import of the app module")
    (repo / "app.py").write_text("def run():\n    return 2\n")
    (repo / "util.py").write_text("LIMIT = 5\n")
    _git(repo, "add", ".")
    _git(repo, "commit", "-q", "-m",
         "bump the run result and add a limit constant")
    records = read_git_repo(repo)
    # The root commit has no pre-state and is skipped.
    assert len(records) == 1
    record = records[0]
    assert record.message == "bump the run result and add a limit constant"
    assert record.snapshot_before.lines("app.py") == ("def run():", "    return 1")
    paths = {h.file_path for h in record.hunks}
    assert paths == {"app.py", "util.py"}


# ===== Pipeline =====


def test_mine_plants_exact_rejections_and_conserves_hunks(tmp_path):
    payloads, expected = synthetic_corpus_payloads(30)
    src = tmp_path / "corpus"
    out = tmp_path / "mined"
    write_corpus_dir(src, payloads)
    report = mine(src, out)
    assert report["rejections"] == expected
    assert report["commits_seen"] == 30
    assert report["commits_kept"] == 26
    records = read_commit_dir(src)
    kept_hunks = sum(
        len(r.hunks) for r in records if filter_commit(r).accepted
    )
    for task in ("file_loc", "line_loc", "gen"):
        rows = read_samples(out / f"{task}.jsonl")
        assert len(rows) == kept_hunks == report["samples"][task]
        assert {r["split"] for r in rows} <= {"train", "valid", "test"}


def test_mine_is_byte_identical_across_runs(tmp_path):
    payloads, _ = synthetic_corpus_payloads(8)
    src = tmp_path / "corpus"
    write_corpus_dir(src, payloads)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    mine(src, out_a, seed=42)
    mine(src, out_b, seed=42)
    for name in ("file_loc.jsonl", "line_loc.jsonl", "gen.jsonl",
                 "mining_report.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
