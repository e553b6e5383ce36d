"""Domain types: edits, hunks, code segments, project snapshots, prompts."""

from __future__ import annotations

import enum
import posixpath
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .errors import InvalidAnchor
from .tokens import tokenize

# Informational language tags keyed by file extension.
_LANGUAGE_BY_EXT = {
    ".py": "python",
    ".go": "go",
    ".js": "javascript",
    ".jsx": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
    ".java": "java",
    ".rs": "rust",
    ".c": "c",
    ".h": "c",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".hpp": "cpp",
    ".cs": "csharp",
    ".rb": "ruby",
    ".php": "php",
    ".md": "markdown",
}


class EditType(enum.Enum):
    """Line-level edit operation.

    Keep leaves a line untouched, Insert adds content after a line, and
    Replace substitutes a line run (deletion is a Replace with empty
    replacement content).
    """

    KEEP = "<K>"
    INSERT = "<I>"
    REPLACE = "<R>"

    @property
    def tag(self) -> str:
        return self.value

    @classmethod
    def from_tag(cls, tag: str) -> "EditType":
        for member in cls:
            if member.value == tag:
                return member
        raise ValueError(f"unknown edit type tag: {tag!r}")


def normalize_path(path: str) -> str:
    """Normalize a project-relative path to forward slashes.

    Raises:
        ValueError: on absolute paths or paths escaping the project root.
    """
    cleaned = path.replace("\\", "/").strip()
    if not cleaned:
        raise ValueError("empty file path")
    if cleaned.startswith("/") or (len(cleaned) > 1 and cleaned[1] == ":"):
        raise ValueError(f"absolute paths not allowed: {path!r}")
    norm = posixpath.normpath(cleaned)
    if norm.startswith("..") or norm == ".":
        raise ValueError(f"path escapes project root: {path!r}")
    return norm


def language_of(path: str) -> str:
    for ext, lang in _LANGUAGE_BY_EXT.items():
        if path.endswith(ext):
            return lang
    return "text"


@dataclass(frozen=True)
class Edit:
    """One atomic edit event against a known file state.

    anchor_line is 1-based in the before-file.  An Insert attaches after its
    anchor line (anchor 0 is the synthetic file head); a Replace starts at
    its anchor line and covers len(before_code) lines.
    """

    file_path: str
    anchor_line: int
    edit_type: EditType
    before_code: tuple[str, ...]
    after_code: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "before_code", tuple(self.before_code))
        object.__setattr__(self, "after_code", tuple(self.after_code))
        if self.edit_type is EditType.INSERT:
            if self.before_code:
                raise ValueError("Insert edits must have empty before_code")
            if not self.after_code:
                raise ValueError("Insert edits must add at least one line")
            if self.anchor_line < 0:
                raise InvalidAnchor(f"insert anchor {self.anchor_line} < 0")
        elif self.edit_type is EditType.REPLACE:
            if not self.before_code:
                raise ValueError("Replace edits must have non-empty before_code")
            if self.anchor_line < 1:
                raise InvalidAnchor(f"replace anchor {self.anchor_line} < 1")
        else:
            raise ValueError("edits must be Insert or Replace, not Keep")

    @property
    def code(self) -> tuple[str, ...]:
        """The code that stands for this edit in similarity scoring.

        The before-image where present; a pure Insert has none, so its
        inserted content stands in for it.
        """
        return self.before_code if self.before_code else self.after_code

    def to_dict(self) -> dict[str, Any]:
        return {
            "file_path": self.file_path,
            "anchor_line": self.anchor_line,
            "edit_type": self.edit_type.tag,
            "before_code": list(self.before_code),
            "after_code": list(self.after_code),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Edit":
        return cls(
            file_path=data["file_path"],
            anchor_line=int(data["anchor_line"]),
            edit_type=EditType.from_tag(data["edit_type"]),
            before_code=tuple(data.get("before_code", ())),
            after_code=tuple(data.get("after_code", ())),
        )


@dataclass(frozen=True)
class Hunk:
    """One contiguous changed region of a unified diff.

    before_start is the 1-based first changed line in the before-file; for a
    pure insertion (empty before_lines) it is the line the new content
    follows, 0 meaning the file head.
    """

    file_path: str
    before_start: int
    before_lines: tuple[str, ...]
    after_start: int
    after_lines: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "before_lines", tuple(self.before_lines))
        object.__setattr__(self, "after_lines", tuple(self.after_lines))
        if not self.before_lines and not self.after_lines:
            raise ValueError("hunk with empty before_lines and after_lines")

    @property
    def is_pure_insert(self) -> bool:
        return not self.before_lines

    @property
    def before_end(self) -> int:
        """Last before-line covered; before_start - 1 for pure inserts."""
        return self.before_start + len(self.before_lines) - 1

    def to_edit(self) -> Edit:
        """View this hunk as an atomic Edit."""
        if self.is_pure_insert:
            return Edit(
                file_path=self.file_path,
                anchor_line=self.before_start,
                edit_type=EditType.INSERT,
                before_code=(),
                after_code=self.after_lines,
            )
        return Edit(
            file_path=self.file_path,
            anchor_line=self.before_start,
            edit_type=EditType.REPLACE,
            before_code=self.before_lines,
            after_code=self.after_lines,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "file_path": self.file_path,
            "before_start": self.before_start,
            "before_lines": list(self.before_lines),
            "after_start": self.after_start,
            "after_lines": list(self.after_lines),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Hunk":
        return cls(
            file_path=data["file_path"],
            before_start=int(data["before_start"]),
            before_lines=tuple(data.get("before_lines", ())),
            after_start=int(data["after_start"]),
            after_lines=tuple(data.get("after_lines", ())),
        )


@dataclass(frozen=True)
class Segment:
    """A contiguous run of whole lines from one file.

    Segments tile a file: concatenating a file's segments in order
    reproduces the file exactly.
    """

    file_path: str
    start_line: int
    lines: tuple[str, ...]
    token_count: int

    @property
    def end_line(self) -> int:
        return self.start_line + len(self.lines) - 1


@dataclass(frozen=True)
class Prompt:
    """Optional natural-language edit description supplied by the user."""

    text: str = ""

    @property
    def tokens(self) -> list[str]:
        return tokenize(self.text)

    @property
    def is_empty(self) -> bool:
        return not self.text.strip()


@dataclass
class ProjectSnapshot:
    """An in-memory view of a project's files at one revision.

    Files map normalized relative paths to line tuples (no trailing
    newlines).  Language tags are informational only.
    """

    files: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {}
        for path, lines in self.files.items():
            normalized[normalize_path(path)] = tuple(lines)
        self.files = normalized

    @classmethod
    def from_texts(cls, texts: dict[str, str]) -> "ProjectSnapshot":
        return cls({path: tuple(text.splitlines()) for path, text in texts.items()})

    def paths(self) -> list[str]:
        return sorted(self.files)

    def __contains__(self, path: str) -> bool:
        return path in self.files

    def __len__(self) -> int:
        return len(self.files)

    def lines(self, path: str) -> tuple[str, ...]:
        return self.files[path]

    def language(self, path: str) -> str:
        return language_of(path)

    def with_file(self, path: str, lines: Sequence[str]) -> "ProjectSnapshot":
        files = dict(self.files)
        files[normalize_path(path)] = tuple(lines)
        return ProjectSnapshot(files)

    def copy(self) -> "ProjectSnapshot":
        return ProjectSnapshot(dict(self.files))

    def items(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        for path in self.paths():
            yield path, self.files[path]

    def to_dict(self) -> dict[str, Any]:
        return {path: list(lines) for path, lines in self.items()}
