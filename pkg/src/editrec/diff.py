"""Unified-diff parsing, line labeling, edit application, file segmentation."""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import InvalidAnchor, MalformedDiff, StaleEdit
from .model import Edit, EditType, Hunk, Segment
from .tokens import tokenize

_HUNK_HEADER_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_OLD_FILE_RE = re.compile(r"^--- (?:a/)?(.+?)(?:\t.*)?$")
_NEW_FILE_RE = re.compile(r"^\+\+\+ (?:b/)?(.+?)(?:\t.*)?$")


@dataclass(frozen=True)
class SkippedFile:
    """A diff entry that was recognized but intentionally not parsed."""

    file_path: str
    reason: str


@dataclass
class FileDiff:
    """All hunks of one file within a parsed diff."""

    file_path: str
    hunks: list[Hunk] = field(default_factory=list)

    def __iter__(self):
        # Allows `for path, hunks in parse_unified_diff(...)` unpacking.
        yield self.file_path
        yield self.hunks


@dataclass
class DiffParseResult:
    """Parsed files plus entries skipped as renames or binary changes."""

    files: list[FileDiff] = field(default_factory=list)
    skipped: list[SkippedFile] = field(default_factory=list)

    def __iter__(self) -> Iterator[FileDiff]:
        return iter(self.files)

    def __len__(self) -> int:
        return len(self.files)

    def all_hunks(self) -> list[Hunk]:
        return [h for fd in self.files for h in fd.hunks]


def _trim_context(
    old_start: int,
    new_start: int,
    old_block: list[tuple[str, str]],
) -> Hunk | None:
    """Build a Hunk from one @@ region's body.

    `old_block` holds (marker, text) pairs in order, marker one of ' ', '-',
    '+'.  Leading and trailing context is trimmed (start lines adjusted);
    interior context stays in both sides so the hunk remains one contiguous
    region with exact apply semantics.
    """
    lo = 0
    hi = len(old_block)
    while lo < hi and old_block[lo][0] == " ":
        lo += 1
    while hi > lo and old_block[hi - 1][0] == " ":
        hi -= 1
    if lo == hi:
        return None  # context only, nothing changed
    body = old_block[lo:hi]
    before = [text for marker, text in body if marker in (" ", "-")]
    after = [text for marker, text in body if marker in (" ", "+")]
    b_start = old_start + lo
    a_start = new_start + lo
    if not before:
        # Pure insertion: anchor on the line the content follows.  With no
        # context trimmed, insert-only headers already name that line as
        # old_start; otherwise the last trimmed context line is the anchor.
        b_start = old_start + lo - 1 if lo else old_start
    return Hunk(
        file_path="",
        before_start=b_start,
        before_lines=tuple(before),
        after_start=a_start,
        after_lines=tuple(after),
    )


def parse_unified_diff(diff_text: str) -> DiffParseResult:
    """Parse unified-diff text into per-file hunks.

    Every @@ region becomes one Hunk.  Renames and binary files are reported
    as skipped entries rather than errors.

    Raises:
        MalformedDiff: on header or line-count inconsistencies, or when two
            hunks of the same file overlap.
    """
    result = DiffParseResult()
    lines = diff_text.splitlines()
    i = 0
    current: FileDiff | None = None
    old_path: str | None = None
    skip_current = False  # swallow hunks of renamed/binary entries
    skip_old_path: str | None = None

    def flush():
        nonlocal current
        if current is not None:
            _check_hunk_overlap(current)
            result.files.append(current)
            current = None

    while i < len(lines):
        line = lines[i]
        if line.startswith("diff --git") or line.startswith("diff -"):
            flush()
            old_path = None
            skip_current = False
            i += 1
            continue
        if line.startswith("Binary files ") or line.startswith("GIT binary patch"):
            flush()
            m = re.match(r"^Binary files (?:a/)?(\S+) and", line)
            result.skipped.append(
                SkippedFile(m.group(1) if m else "<binary>", "binary")
            )
            skip_current = True
            i += 1
            continue
        if line.startswith("rename from "):
            skip_old_path = line[len("rename from "):].strip()
            result.skipped.append(SkippedFile(skip_old_path, "rename"))
            skip_current = True
            i += 1
            continue
        if line.startswith("rename to "):
            i += 1
            continue
        m_old = _OLD_FILE_RE.match(line)
        if m_old and not line.startswith("----"):
            flush()
            old_path = m_old.group(1)
            # A --- header for a different path ends a skipped entry that
            # lacked its own "diff --git" separator before the next file.
            if skip_current and old_path != skip_old_path:
                skip_current = False
            i += 1
            continue
        m_new = _NEW_FILE_RE.match(line)
        if m_new and not line.startswith("++++"):
            if skip_current:
                i += 1
                continue
            new_path = m_new.group(1)
            path = new_path if new_path != "/dev/null" else (old_path or "")
            if path == "/dev/null" or not path:
                raise MalformedDiff(i + 1, "no usable file path in headers")
            current = FileDiff(file_path=path)
            i += 1
            continue
        m_hunk = _HUNK_HEADER_RE.match(line)
        if m_hunk:
            if current is None and not skip_current:
                raise MalformedDiff(i + 1, "hunk header before file headers")
            old_start = int(m_hunk.group(1))
            old_count = int(m_hunk.group(2)) if m_hunk.group(2) is not None else 1
            new_start = int(m_hunk.group(3))
            new_count = int(m_hunk.group(4)) if m_hunk.group(4) is not None else 1
            i += 1
            block: list[tuple[str, str]] = []
            seen_old = seen_new = 0
            while i < len(lines) and (seen_old < old_count or seen_new < new_count):
                body = lines[i]
                if body.startswith("\\"):
                    i += 1  # "\ No newline at end of file"
                    continue
                if body.startswith(" ") or body == "":
                    block.append((" ", body[1:]))
                    seen_old += 1
                    seen_new += 1
                elif body.startswith("-"):
                    block.append(("-", body[1:]))
                    seen_old += 1
                elif body.startswith("+"):
                    block.append(("+", body[1:]))
                    seen_new += 1
                else:
                    break
                i += 1
            if seen_old != old_count or seen_new != new_count:
                raise MalformedDiff(
                    i + 1,
                    f"hunk body has {seen_old}/{seen_new} lines, "
                    f"header declared {old_count}/{new_count}",
                )
            while i < len(lines) and lines[i].startswith("\\"):
                i += 1
            hunk = _trim_context(old_start, new_start, block)
            if hunk is not None and current is not None:
                current.hunks.append(
                    Hunk(
                        file_path=current.file_path,
                        before_start=hunk.before_start,
                        before_lines=hunk.before_lines,
                        after_start=hunk.after_start,
                        after_lines=hunk.after_lines,
                    )
                )
            continue
        i += 1
    flush()
    return result


def _check_hunk_overlap(file_diff: FileDiff):
    """Reject hunks whose before-line ranges overlap within one file."""
    spans = []
    for h in file_diff.hunks:
        if h.is_pure_insert:
            # Inserts occupy the boundary after before_start; two inserts at
            # the same anchor do conflict.
            spans.append((h.before_start + 0.5, h.before_start + 0.5, h))
        else:
            spans.append((float(h.before_start), float(h.before_end), h))
    spans.sort(key=lambda s: (s[0], s[1]))
    for (s1, e1, _), (s2, _e2, _) in zip(spans, spans[1:]):
        if s2 <= e1:
            raise MalformedDiff(
                0, f"overlapping hunks in {file_diff.file_path} near line {int(s2)}"
            )


def render_unified_diff(file_path: str, hunks: Sequence[Hunk]) -> str:
    """Render hunks back to zero-context unified diff text."""
    out = [f"--- a/{file_path}", f"+++ b/{file_path}"]
    for h in sorted(hunks, key=lambda x: (x.before_start, x.after_start)):
        old_count = len(h.before_lines)
        new_count = len(h.after_lines)
        header = f"@@ -{h.before_start},{old_count} +{h.after_start},{new_count} @@"
        out.append(header)
        out.extend(f"-{line}" for line in h.before_lines)
        out.extend(f"+{line}" for line in h.after_lines)
    return "\n".join(out) + "\n"


def diff_file_pair(
    file_path: str, before: Sequence[str], after: Sequence[str]
) -> list[Hunk]:
    """Compute zero-context hunks turning `before` into `after`."""
    text = "\n".join(
        difflib.unified_diff(list(before), list(after), f"a/{file_path}",
                             f"b/{file_path}", n=0, lineterm="")
    )
    if not text:
        return []
    parsed = parse_unified_diff(text)
    return parsed.all_hunks()


# ===== Line labels =====


def line_labels_from_hunk(hunk: Hunk) -> list[tuple[int, EditType]]:
    """Ground-truth line labels induced by one hunk.

    A replace hunk labels each covered before-line Replace; a pure insertion
    yields a single Insert label on the line the content follows (0 for the
    file head).

    Raises:
        InvalidAnchor: if a pure insertion's anchor would be negative.
    """
    if hunk.is_pure_insert:
        if hunk.before_start < 0:
            raise InvalidAnchor(f"insert anchor {hunk.before_start} < 0")
        return [(hunk.before_start, EditType.INSERT)]
    return [
        (line, EditType.REPLACE)
        for line in range(hunk.before_start, hunk.before_end + 1)
    ]


def merge_hunk_labels(
    hunks: Sequence[Hunk], line_count: int
) -> dict[int, EditType]:
    """Total label map for lines 1..line_count from a set of hunks.

    Unlabeled lines default to Keep.  An Insert landing on a line already
    labeled Replace is absorbed by the Replace (the rewrite of the region
    carries the new content).

    Raises:
        MalformedDiff: when two hunks assign Replace to the same line.
    """
    labels = {line: EditType.KEEP for line in range(1, line_count + 1)}
    labels[0] = EditType.KEEP  # synthetic head anchor for Insert
    for hunk in hunks:
        for line, label in line_labels_from_hunk(hunk):
            prior = labels.get(line, EditType.KEEP)
            if label is EditType.REPLACE and prior is EditType.REPLACE:
                raise MalformedDiff(0, f"two hunks replace line {line}")
            if prior is EditType.REPLACE and label is EditType.INSERT:
                continue  # Replace wins
            if prior is EditType.INSERT and label is EditType.REPLACE:
                labels[line] = EditType.REPLACE
                continue
            labels[line] = label
    return labels


# ===== Edit application =====


def anchor_context(file_lines: Sequence[str],
                   anchor_line: int) -> tuple[str, ...]:
    """The anchor line and its successor, as present in the file.

    For the synthetic head anchor (0) only the first line exists; out of
    range or an empty file yields nothing.
    """
    if anchor_line < 0 or not file_lines:
        return ()
    if anchor_line == 0:
        return (file_lines[0],)
    lo = anchor_line - 1
    return tuple(file_lines[lo:lo + 2])


def apply_edit(lines: Sequence[str], edit: Edit) -> list[str]:
    """Apply one edit to a file's lines, verifying the before-image.

    Raises:
        StaleEdit: when the anchor is out of bounds or the before-image text
            no longer matches.
    """
    lines = list(lines)
    n = len(lines)
    if edit.edit_type is EditType.INSERT:
        if edit.anchor_line > n:
            raise StaleEdit(
                f"{edit.file_path}: insert anchor {edit.anchor_line} beyond "
                f"end of {n}-line file"
            )
        at = edit.anchor_line
        return lines[:at] + list(edit.after_code) + lines[at:]
    start = edit.anchor_line - 1
    end = start + len(edit.before_code)
    if start < 0 or end > n:
        raise StaleEdit(
            f"{edit.file_path}: replace span {edit.anchor_line}.."
            f"{end} beyond end of {n}-line file"
        )
    actual = lines[start:end]
    if actual != list(edit.before_code):
        raise StaleEdit(
            f"{edit.file_path}: before-image mismatch at line {edit.anchor_line}"
        )
    return lines[:start] + list(edit.after_code) + lines[end:]


# ===== Segmentation =====


def split_segments(
    file_path: str, lines: Sequence[str], max_segment_tokens: int
) -> list[Segment]:
    """Tile a file into whole-line segments under a token budget.

    Greedy: lines accumulate until adding the next one would exceed the
    budget.  A single line over budget becomes its own segment.  An empty
    file yields no segments.

    Raises:
        ValueError: when max_segment_tokens < 16.
    """
    if max_segment_tokens < 16:
        raise ValueError(f"max_segment_tokens must be >= 16, got {max_segment_tokens}")
    segments: list[Segment] = []
    current: list[str] = []
    current_tokens = 0
    start = 1
    for idx, line in enumerate(lines, start=1):
        n_tokens = len(tokenize(line))
        if current and current_tokens + n_tokens > max_segment_tokens:
            segments.append(
                Segment(file_path, start, tuple(current), current_tokens)
            )
            current = []
            current_tokens = 0
            start = idx
        current.append(line)
        current_tokens += n_tokens
    if current:
        segments.append(Segment(file_path, start, tuple(current), current_tokens))
    return segments
