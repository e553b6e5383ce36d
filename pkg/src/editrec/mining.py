"""Mining training corpora from commit histories.

Commits pass a suitability filter (enough cohesive hunks, human-sized
changes, an English message, no generated files), then each hunk becomes
one sample per task: file location, line location, and content generation.
Output is newline-delimited JSON with a schema version field, byte-stable
for a fixed seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .diff import anchor_context, line_labels_from_hunk, parse_unified_diff
from .errors import InsufficientNegatives, MalformedDiff
from .generator import region_from_hunk
from .model import Hunk, ProjectSnapshot
from .tokens import tokenize

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

MIN_HUNKS = 3
MAX_HUNK_LINES = 15
MIN_MESSAGE_TOKENS = 5
ASCII_RATIO = 0.9
DENYLIST_EXTENSIONS = (".bak", ".log", ".pyc")
GENERATED_MARKERS = (
    "@auto",
    "auto-generated",
    "autogenerated",
    "generated by",
    "do not edit",
)
_MARKER_SCAN_LINES = 16

TASKS = ("file_loc", "line_loc", "gen")
SPLITS = ("train", "valid", "test")
DEFAULT_RATIOS = (0.7, 0.1, 0.2)

# Rejection reason codes, in the order rules are checked.
REASON_MIN_HUNKS = "min_hunks"
REASON_HUNK_SIZE = "hunk_size"
REASON_MESSAGE_LENGTH = "message_length"
REASON_NON_ENGLISH = "non_english"
REASON_GENERATED_FILE = "generated_file"


@dataclass
class CommitRecord:
    """One commit: metadata, parsed hunks, and the pre-commit file state."""

    commit_id: str
    message: str
    hunks: list[Hunk]
    snapshot_before: ProjectSnapshot

    @property
    def files_touched(self) -> list[str]:
        return sorted({h.file_path for h in self.hunks})


@dataclass
class FilterDecision:
    commit_id: str
    accepted: bool
    reasons: list[str] = field(default_factory=list)


def _is_english(message: str) -> bool:
    """ASCII-ratio heuristic plus at least one alphabetic token."""
    stripped = message.strip()
    if not stripped:
        return False
    ascii_chars = sum(1 for ch in stripped if ord(ch) < 128)
    if ascii_chars / len(stripped) < ASCII_RATIO:
        return False
    return any(tok.isalpha() for tok in tokenize(stripped))


def _looks_generated(record: CommitRecord, path: str) -> bool:
    if path.endswith(DENYLIST_EXTENSIONS):
        return True
    if path in record.snapshot_before:
        head = record.snapshot_before.lines(path)[:_MARKER_SCAN_LINES]
        for line in head:
            lowered = line.lower()
            if any(marker in lowered for marker in GENERATED_MARKERS):
                return True
    return False


def filter_commit(record: CommitRecord) -> FilterDecision:
    """Apply every suitability rule; reasons list all that failed."""
    reasons = []
    if len(record.hunks) < MIN_HUNKS:
        reasons.append(REASON_MIN_HUNKS)
    if any(
        max(len(h.before_lines), len(h.after_lines)) >= MAX_HUNK_LINES
        for h in record.hunks
    ):
        reasons.append(REASON_HUNK_SIZE)
    if len(tokenize(record.message)) <= MIN_MESSAGE_TOKENS:
        reasons.append(REASON_MESSAGE_LENGTH)
    if not _is_english(record.message):
        reasons.append(REASON_NON_ENGLISH)
    if any(_looks_generated(record, path) for path in record.files_touched):
        reasons.append(REASON_GENERATED_FILE)
    return FilterDecision(record.commit_id, accepted=not reasons, reasons=reasons)


def split_of(commit_id: str, ratios: Sequence[float] = DEFAULT_RATIOS) -> str:
    """Deterministic split assignment, a pure function of the commit id."""
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three values summing to 1")
    digest = hashlib.md5(commit_id.encode("utf-8")).hexdigest()
    bucket = int(digest, 16) / float(1 << 128)
    if bucket < ratios[0]:
        return "train"
    if bucket < ratios[0] + ratios[1]:
        return "valid"
    return "test"


def _derived_seed(seed: int, commit_id: str, index: int) -> int:
    digest = hashlib.md5(f"{seed}:{commit_id}:{index}".encode("utf-8")).hexdigest()
    return int(digest[:16], 16)


def _prior_payload(record: CommitRecord,
                   priors: Sequence[Hunk]) -> tuple[list[dict], list]:
    edits = []
    contexts = []
    for hunk in priors:
        edits.append(hunk.to_edit().to_dict())
        if hunk.is_pure_insert and hunk.file_path in record.snapshot_before:
            ctx = anchor_context(
                record.snapshot_before.lines(hunk.file_path), hunk.before_start
            )
            contexts.append(list(ctx) if ctx else None)
        else:
            contexts.append(None)
    return edits, contexts


def build_samples(record: CommitRecord, task: str, negatives: int = 10,
                  seed: int = 42,
                  ratios: Sequence[float] = DEFAULT_RATIOS,
                  context_lines: int = 3) -> list[dict]:
    """One sample per hunk for the given task.

    Raises:
        InsufficientNegatives: when file_loc sampling cannot draw enough
            untouched files from the snapshot.
        ValueError: on an unknown task name.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}, expected one of {TASKS}")
    split = split_of(record.commit_id, ratios)
    touched = set(record.files_touched)
    samples = []
    for idx, hunk in enumerate(record.hunks):
        base = {
            "v": SCHEMA_VERSION,
            "task": task,
            "commit_id": record.commit_id,
            "split": split,
            "hunk_index": idx,
            "prompt": record.message,
        }
        others = [h for j, h in enumerate(record.hunks) if j != idx]
        if task == "file_loc":
            samples.append(
                _file_loc_sample(record, base, hunk, others, touched,
                                 negatives, seed, idx)
            )
        elif task == "line_loc":
            samples.append(
                _line_loc_sample(record, base, hunk, others)
            )
        else:
            samples.append(
                _gen_sample(record, base, hunk, others, context_lines)
            )
    return samples


def _file_loc_sample(record, base, hunk, others, touched, negatives, seed, idx):
    candidates = [p for p in record.snapshot_before.paths() if p not in touched]
    if len(candidates) < negatives:
        raise InsufficientNegatives(negatives, len(candidates))
    rng = random.Random(_derived_seed(seed, record.commit_id, idx))
    drawn = sorted(rng.sample(candidates, negatives))
    positives = sorted({h.file_path for h in others} - {hunk.file_path})
    needed = sorted({hunk.file_path, *positives, *drawn})
    files = {
        p: list(record.snapshot_before.lines(p))
        for p in needed if p in record.snapshot_before
    }
    return {
        **base,
        "target_edit": hunk.to_edit().to_dict(),
        "target_file": hunk.file_path,
        "positives": positives,
        "negatives": drawn,
        "files": files,
    }


def _line_loc_sample(record, base, hunk, others):
    file_lines = (
        list(record.snapshot_before.lines(hunk.file_path))
        if hunk.file_path in record.snapshot_before else []
    )
    prior_edits, prior_contexts = _prior_payload(record, others)
    excluded = sorted({
        line
        for other in others
        if other.file_path == hunk.file_path and not other.is_pure_insert
        for line in range(other.before_start, other.before_end + 1)
    })
    gt = [[line, label.tag] for line, label in line_labels_from_hunk(hunk)]
    return {
        **base,
        "file_path": hunk.file_path,
        "file_before": file_lines,
        "target_hunk": hunk.to_dict(),
        "prior_edits": prior_edits,
        "prior_contexts": prior_contexts,
        "excluded_lines": excluded,
        "gt_labels": gt,
    }


def _gen_sample(record, base, hunk, others, context_lines):
    file_lines = (
        list(record.snapshot_before.lines(hunk.file_path))
        if hunk.file_path in record.snapshot_before else []
    )
    region = region_from_hunk(hunk, file_lines, context_lines)
    prior_edits, prior_contexts = _prior_payload(record, others)
    return {
        **base,
        "file_path": hunk.file_path,
        "region": {
            "edit_type": region.edit_type.tag,
            "start_line": region.start_line,
            "target_lines": list(region.target_lines),
            "context_before": list(region.context_before),
            "context_after": list(region.context_after),
        },
        "gt_after": list(hunk.after_lines),
        "prior_edits": prior_edits,
        "prior_contexts": prior_contexts,
    }


# ===== Corpus readers =====


def read_commit_dir(path: str | Path) -> list[CommitRecord]:
    """Read per-commit JSON files (sorted by name) into records.

    Each file holds commit_id, message, snapshot_before (path -> lines or
    text), and either a unified "diff" string or explicit "hunks".
    """
    records = []
    for file in sorted(Path(path).glob("*.json")):
        with open(file, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        snapshot = _snapshot_from_payload(data.get("snapshot_before", {}))
        if "hunks" in data:
            hunks = [Hunk.from_dict(h) for h in data["hunks"]]
        elif "diff" in data:
            hunks = parse_unified_diff(data["diff"]).all_hunks()
        else:
            raise MalformedDiff(0, f"{file.name}: neither 'hunks' nor 'diff' present")
        records.append(
            CommitRecord(
                commit_id=data["commit_id"],
                message=data.get("message", ""),
                hunks=hunks,
                snapshot_before=snapshot,
            )
        )
    return records


def _snapshot_from_payload(payload: dict) -> ProjectSnapshot:
    files = {}
    for path, content in payload.items():
        if isinstance(content, str):
            files[path] = tuple(content.splitlines())
        else:
            files[path] = tuple(content)
    return ProjectSnapshot(files)


def _git(repo: Path, *args: str) -> str:
    out = subprocess.run(
        ["git", "-C", str(repo), *args],
        check=True, capture_output=True, text=True,
    )
    return out.stdout


def _is_text(blob: bytes) -> bool:
    return b"\x00" not in blob[:1024]


def read_git_repo(path: str | Path, max_file_bytes: int = 200_000
                  ) -> list[CommitRecord]:
    """Walk a git repository's first-parent history into commit records.

    Root commits are skipped (no pre-commit state to mine against), as are
    binary and oversized files.
    """
    repo = Path(path)
    shas = _git(repo, "log", "--reverse", "--first-parent",
                "--format=%H").split()
    records = []
    for sha in shas:
        try:
            _git(repo, "rev-parse", f"{sha}^")
        except subprocess.CalledProcessError:
            logger.info("skipping root commit %s", sha[:8])
            continue
        message = _git(repo, "show", "-s", "--format=%B", sha).strip()
        diff_text = _git(repo, "show", "--unified=0", "--format=", "--no-color", sha)
        hunks = parse_unified_diff(diff_text).all_hunks()
        snapshot = _read_tree(repo, f"{sha}^", max_file_bytes)
        records.append(
            CommitRecord(commit_id=sha, message=message, hunks=hunks,
                         snapshot_before=snapshot)
        )
    return records


def _read_tree(repo: Path, rev: str, max_file_bytes: int) -> ProjectSnapshot:
    listing = _git(repo, "ls-tree", "-r", "-z", rev)
    entries = []  # (blob sha, path)
    for row in listing.split("\0"):
        if not row:
            continue
        meta, path = row.split("\t", 1)
        _mode, kind, sha = meta.split()
        if kind == "blob":
            entries.append((sha, path))
    files = {}
    if not entries:
        return ProjectSnapshot({})
    proc = subprocess.Popen(
        ["git", "-C", str(repo), "cat-file", "--batch"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE,
    )
    try:
        for sha, path in entries:
            proc.stdin.write(f"{sha}\n".encode())
            proc.stdin.flush()
            header = proc.stdout.readline().decode()
            parts = header.split()
            if len(parts) != 3 or parts[1] != "blob":
                continue
            size = int(parts[2])
            blob = proc.stdout.read(size)
            proc.stdout.read(1)  # trailing newline
            if size <= max_file_bytes and _is_text(blob):
                files[path] = tuple(blob.decode("utf-8", errors="replace").splitlines())
    finally:
        proc.stdin.close()
        proc.wait()
    return ProjectSnapshot(files)


# ===== Orchestration =====


def mine(source: str | Path, out_dir: str | Path,
         tasks: Iterable[str] = TASKS, seed: int = 42, negatives: int = 10,
         ratios: Sequence[float] = DEFAULT_RATIOS,
         context_lines: int = 3) -> dict:
    """Filter a corpus and write per-task JSONL sample files.

    Returns the mining report (also written as mining_report.json).
    """
    source = Path(source)
    if (source / ".git").exists():
        records = read_git_repo(source)
    else:
        records = read_commit_dir(source)
    decisions = [filter_commit(r) for r in records]
    kept = [r for r, d in zip(records, decisions) if d.accepted]
    logger.info("mining: %d commits seen, %d kept", len(records), len(kept))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sample_counts = {}
    split_counts = {name: 0 for name in SPLITS}
    for record in kept:
        split_counts[split_of(record.commit_id, ratios)] += 1
    for task in tasks:
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        rows = []
        for record in kept:
            rows.extend(
                build_samples(record, task, negatives=negatives, seed=seed,
                              ratios=ratios, context_lines=context_lines)
            )
        target = out / f"{task}.jsonl"
        with open(target, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        sample_counts[task] = len(rows)
        logger.info("wrote %d %s samples to %s", len(rows), task, target)

    report = {
        "v": SCHEMA_VERSION,
        "seed": seed,
        "negatives": negatives,
        "commits_seen": len(records),
        "commits_kept": len(kept),
        "rejections": {
            d.commit_id: d.reasons for d in decisions if not d.accepted
        },
        "splits": split_counts,
        "samples": sample_counts,
    }
    with open(out / "mining_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return report


def read_samples(path: str | Path) -> list[dict]:
    """Load one JSONL sample file."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
