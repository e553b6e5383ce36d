"""Shared fixtures: a two-file Go project with six coordinated hunks.

The project mirrors a small cross-cutting change: a matcher field is added
to a context struct in one file, its initialization follows nearby, a name
helper is rewritten, and the sibling file needs the same three changes.
An unrelated prose file serves as the negative control.
"""

from __future__ import annotations

import pytest

from editrec import (Backends, CommitRecord, Edit, EditType, EngineConfig,
                     Hunk, ProjectSnapshot)
from editrec.config import ScoringConfig

BENCHMARK_GO = """\
package testing

import (
\t"flag"
\t"fmt"
\t"os"
)

var matchBenchmarks = flag.String("test.bench", "", "regexp of benchmarks to run")

type benchContext struct {
\tmaxLen int
}
func RunBenchmarks(matchString func(pat, str string) (bool, error), benchmarks []InternalBenchmark) {
\tctx := &benchContext{
\t\tmaxLen: 0,
\t}
\tfor _, Benchmark := range benchmarks {
\t\tmatched, err := matchString(*matchBenchmarks, Benchmark.Name)
\t\tif err != nil {
\t\t\tfmt.Fprintf(os.Stderr, "testing: invalid regexp for -test.bench: %s\\n", err)
\t\t}
\t\tif matched {
\t\t\trunBenchmark(ctx, Benchmark)
\t\t}
\t}
}
func benchName(b *B) string {
\tname := b.name
\tif b.level > 0 {
\t\tname = b.name + "/" + name
\t}
\treturn name
}
"""

TESTING_GO = """\
package testing

import (
\t"flag"
\t"fmt"
\t"os"
)

var match = flag.String("test.run", "", "regexp of tests to run")

type testContext struct {
\tmaxParallel int
\trunning     int
}
func newTestContext(maxParallel int) *testContext {
\treturn &testContext{
\t\tmaxParallel: maxParallel,
\t\trunning:     0,
\t}
}
func RunTests(matchString func(pat, str string) (bool, error), tests []InternalTest) {
\tfor i := 0; i < len(tests); i++ {
\t\tmatched, err := matchString(*match, tests[i].Name)
\t\tif err != nil {
\t\t\tfmt.Fprintf(os.Stderr, "testing: invalid regexp for -test.run: %s\\n", err)
\t\t}
\t\tif matched {
\t\t\ttRunner(tests[i])
\t\t}
\t}
}
func testName(t *T) string {
\tname := t.name
\tif t.level > 0 {
\t\tname = t.name + "/" + name
\t}
\treturn name
}
"""

NOTES_MD = """\
# Release checklist

Collect the launch notes, confirm the schedule with the docs team, and
publish the summary to the site. Remember to thank reviewers.

- draft announcement
- update screenshots
- verify download links
"""

BENCH = "src/benchmark.go"
TEST = "src/testing.go"
NOTES = "docs/notes.md"

# The six coordinated hunks, in the order a developer would make them.
# Line numbers refer to the pre-edit files above.
BENCH_FIELD_INSERT = Hunk(
    BENCH, 11, (), 12, ("\tmatch *matcher",),
)
BENCH_INIT_INSERT = Hunk(
    BENCH, 15, (), 16,
    ('\t\tmatch: newMatcher(matchString, *matchBenchmarks, "-test.bench"),',),
)
BENCH_NAME_REPLACE = Hunk(
    BENCH, 31,
    ('\t\tname = b.name + "/" + name',),
    31,
    ("\t\tname = fullName(&b.common, name)",),
)
TEST_FIELD_INSERT = Hunk(
    TEST, 11, (), 12, ("\tmatch *matcher",),
)
TEST_NAME_REPLACE = Hunk(
    TEST, 35,
    ('\t\tname = t.name + "/" + name',),
    35,
    ("\t\tname = fullName(&t.common, name)",),
)
TEST_CTX_REPLACE = Hunk(
    TEST, 15,
    (
        "func newTestContext(maxParallel int) *testContext {",
        "\treturn &testContext{",
    ),
    15,
    (
        "func newTestContext(maxParallel int, m *matcher) *testContext {",
        "\treturn &testContext{",
        "\t\tmatch: m,",
    ),
)

FIXTURE_HUNKS = (
    BENCH_FIELD_INSERT,
    BENCH_INIT_INSERT,
    BENCH_NAME_REPLACE,
    TEST_FIELD_INSERT,
    TEST_NAME_REPLACE,
    TEST_CTX_REPLACE,
)

FIXTURE_MESSAGE = (
    "testing: filter tests and benchmarks with a shared matcher helper"
)


def fixture_files() -> dict[str, str]:
    return {BENCH: BENCHMARK_GO, TEST: TESTING_GO, NOTES: NOTES_MD}


def fixture_snapshot() -> ProjectSnapshot:
    return ProjectSnapshot.from_texts(fixture_files())


def fixture_config() -> EngineConfig:
    # Tight segments keep lexical overlap scores meaningful on small files.
    return EngineConfig(scoring=ScoringConfig(max_segment_tokens=48))


def fixture_commit() -> CommitRecord:
    return CommitRecord(
        commit_id="matcher-rollout-001",
        message=FIXTURE_MESSAGE,
        hunks=list(FIXTURE_HUNKS),
        snapshot_before=fixture_snapshot(),
    )


def unrelated_prior() -> Edit:
    return Edit(NOTES, 6, EditType.REPLACE,
                ("- draft announcement",),
                ("- draft launch announcement",))


@pytest.fixture
def go_project() -> ProjectSnapshot:
    return fixture_snapshot()


@pytest.fixture
def engine_config() -> EngineConfig:
    return fixture_config()


@pytest.fixture
def lexical_backends() -> Backends:
    return Backends.lexical()


@pytest.fixture
def go_commit() -> CommitRecord:
    return fixture_commit()


# ===== Synthetic mining corpus =====

# Violations planted at fixed commit indices; each trips exactly one rule.
VIOLATION_TWO_HUNKS = 5
VIOLATION_BIG_HUNK = 11
VIOLATION_SHORT_MESSAGE = 17
VIOLATION_DENYLISTED = 23

_MOD_COUNT = 12
_PATTERN_LINE = 4


def _module_lines(j: int, fn: str) -> list[str]:
    return [
        "import util",
        "",
        f"def load_{j}(data):",
        f"    result = {fn}(data)",
        "    return result",
        "",
        f"def save_{j}(data):",
        "    path = resolve(data)",
        "    write(path, data)",
    ]


def _pattern_hunk(path: str, fn: str) -> dict:
    return Hunk(path, _PATTERN_LINE,
                (f"    result = {fn}(data)",),
                _PATTERN_LINE,
                (f"    result = {fn}(data, strict=True)",)).to_dict()


def _noise_hunk() -> dict:
    return Hunk("src/noise.py", 2,
                ("# tune logging verbosity knob",),
                2,
                ("# tune logging verbosity dial",)).to_dict()


def synthetic_corpus_payloads(n_commits: int = 30) -> tuple[list[dict], dict]:
    """Commit payloads for the JSON corpus reader, plus expected rejections.

    Good commits carry three identical one-line rewrites in different
    modules and one unrelated noise hunk, so prior-edit selection has both
    signal and a distractor to separate.
    """
    payloads = []
    expected: dict[str, list[str]] = {}
    for i in range(n_commits):
        cid = f"commit-{i:04d}"
        fn = f"compute_{chr(97 + i % 7)}"
        snapshot = {
            f"src/mod_{j}.py": _module_lines(j, fn) for j in range(_MOD_COUNT)
        }
        snapshot["src/noise.py"] = [
            "import logging",
            "# tune logging verbosity knob",
            "logger = logging.getLogger()",
        ]
        snapshot["docs/readme.md"] = ["# project", "", "usage notes"]
        snapshot["docs/guide.md"] = ["# guide", "", "setup steps"]
        targets = [(i + j) % _MOD_COUNT for j in range(3)]
        hunks = [_pattern_hunk(f"src/mod_{j}.py", fn) for j in targets]
        hunks.append(_noise_hunk())
        message = (f"make {fn} strict about validation in loaders "
                   f"across three modules")
        if i == VIOLATION_TWO_HUNKS:
            hunks = hunks[:2]
            expected[cid] = ["min_hunks"]
        elif i == VIOLATION_BIG_HUNK:
            big = Hunk("src/mod_0.py", 9, (), 10,
                       tuple(f"    step_{n}(data)" for n in range(20)))
            hunks = hunks[:3] + [big.to_dict()]
            expected[cid] = ["hunk_size"]
        elif i == VIOLATION_SHORT_MESSAGE:
            message = "fix the parser bug"
            expected[cid] = ["message_length"]
        elif i == VIOLATION_DENYLISTED:
            snapshot["cache/table.pyc"] = ["\x01\x02 compiled"]
            pyc = Hunk("cache/table.pyc", 1, ("\x01\x02 compiled",), 1,
                       ("\x01\x03 compiled",))
            hunks = hunks[:3] + [pyc.to_dict()]
            expected[cid] = ["generated_file"]
        payloads.append({
            "commit_id": cid,
            "message": message,
            "snapshot_before": snapshot,
            "hunks": hunks,
        })
    return payloads, expected


def write_corpus_dir(directory, payloads: list[dict]):
    import json
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for payload in payloads:
        target = directory / f"{payload['commit_id']}.json"
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
