"""Line-level edit location: sliding windows over files, keep/insert/replace labels.

A file is covered by fixed-size windows advanced by a stride.  Each window
is labeled per line, either by the built-in heuristic (token similarity
against prior edits) or by an external backend fed the serialized window.
Overlapping window predictions merge by max class confidence.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .backends import LineLabeler
from .config import EngineConfig
from .errors import WindowTooLarge
from .model import Edit, EditType, Prompt
from .tokens import jaccard, tokenize, tokenize_lines

logger = logging.getLogger(__name__)

WINDOW_TAG = "<code-window>"
MASK_TAG = "<MASK>"
PROMPT_TAG = "<prompt>"
PRIOR_TAG = "<prior-edits>"
TO_TAG = "<to>"

# Class order of probability triples throughout the locator.
CLASS_ORDER = (EditType.KEEP, EditType.INSERT, EditType.REPLACE)


@dataclass(frozen=True)
class CodeWindow:
    """A contiguous slice of a file presented to the labeler."""

    file_path: str
    start_line: int
    lines: tuple[str, ...]

    @property
    def end_line(self) -> int:
        return self.start_line + len(self.lines) - 1


@dataclass(frozen=True)
class LinePrediction:
    """Per-line label with its class distribution (keep, insert, replace)."""

    line: int
    probs: tuple[float, float, float]
    label: EditType
    confidence: float

    @classmethod
    def from_probs(cls, line: int,
                   probs: tuple[float, float, float]) -> "LinePrediction":
        best = max(probs)
        winners = [c for c, p in zip(CLASS_ORDER, probs) if p == best]
        # Ties resolve to Keep; Keep only loses when strictly beaten.
        label = winners[0] if len(winners) == 1 else EditType.KEEP
        return cls(line=line, probs=probs, label=label, confidence=best)


@dataclass(frozen=True)
class LocatorInput:
    """A window plus the context the labeler may draw on.

    prior_edits holds only the priors that survived budget truncation, most
    relevant first.  prior_contexts aligns with prior_edits and carries the
    anchor-context lines captured when each Insert prior was recorded (None
    when unavailable); the heuristic needs them to spot insertion points.
    """

    window: CodeWindow
    prompt: Prompt
    prior_edits: tuple[Edit, ...]
    prior_contexts: tuple[tuple[str, ...] | None, ...]
    serialized: tuple[str, ...]


def make_windows(file_path: str, lines: Sequence[str], size: int,
                 stride: int) -> list[CodeWindow]:
    """Windows of up to `size` lines starting every `stride` lines.

    Every line of the file appears in at least one window; with stride equal
    to size the windows partition the file.
    """
    windows = []
    n = len(lines)
    for start in range(1, n + 1, stride):
        chunk = tuple(lines[start - 1:start - 1 + size])
        windows.append(CodeWindow(file_path=file_path, start_line=start,
                                  lines=chunk))
    return windows


# ===== Serialization =====


def _prior_chunk(edit: Edit) -> list[str]:
    chunk = [PRIOR_TAG, edit.edit_type.tag]
    chunk.extend(tokenize_lines(edit.before_code))
    chunk.append(TO_TAG)
    chunk.extend(tokenize_lines(edit.after_code))
    return chunk


def fit_sections(window_tokens: list[str], prompt_tokens: list[str],
                 prior_chunks: list[list[str]], budget: int,
                 oversize_error: type[Exception]) -> tuple[list[str], int]:
    """Assemble window + prompt + priors under a token budget.

    Low-relevance priors (the tail of prior_chunks) are dropped first, then
    the prompt text is truncated.  The window section is never cut; if it
    cannot fit together with the bare prompt tag, the given error is raised.

    Returns:
        (token sequence, number of prior chunks kept)
    """
    base = len(window_tokens) + 1  # the prompt tag always appears
    if base > budget:
        raise oversize_error(
            f"window section needs {base} tokens, budget is {budget}"
        )
    keep = len(prior_chunks)
    prior_len = sum(len(c) for c in prior_chunks)
    while keep and base + len(prompt_tokens) + prior_len > budget:
        keep -= 1
        prior_len -= len(prior_chunks[keep])
    prompt_keep = min(len(prompt_tokens), budget - base - prior_len)
    out = list(window_tokens)
    out.append(PROMPT_TAG)
    out.extend(prompt_tokens[:prompt_keep])
    for chunk in prior_chunks[:keep]:
        out.extend(chunk)
    return out, keep


def serialize_locator_input(window: CodeWindow, prompt: Prompt,
                            priors: Sequence[Edit],
                            budget: int = 512) -> list[str]:
    """Flatten a window for a sequence labeler.

    Layout: the window tag, then one MASK tag followed by the line's tokens
    per window line, then the prompt tag and prompt tokens, then each prior
    as its section tag, edit-type tag, before-tokens, a separator, and
    after-tokens.

    Raises:
        WindowTooLarge: when the window section alone exceeds the budget.
    """
    window_tokens = [WINDOW_TAG]
    for line in window.lines:
        window_tokens.append(MASK_TAG)
        window_tokens.extend(tokenize(line))
    chunks = [_prior_chunk(e) for e in priors]
    out, _ = fit_sections(window_tokens, prompt.tokens, chunks, budget,
                          WindowTooLarge)
    return out


def build_locator_input(window: CodeWindow, prompt: Prompt,
                        priors: Sequence[Edit],
                        prior_contexts: Sequence[tuple[str, ...] | None] = (),
                        budget: int = 512) -> LocatorInput:
    """Serialize a window and record which priors survived truncation."""
    window_tokens = [WINDOW_TAG]
    for line in window.lines:
        window_tokens.append(MASK_TAG)
        window_tokens.extend(tokenize(line))
    chunks = [_prior_chunk(e) for e in priors]
    serialized, kept = fit_sections(window_tokens, prompt.tokens, chunks,
                                    budget, WindowTooLarge)
    contexts = list(prior_contexts) + [None] * (len(priors) - len(prior_contexts))
    return LocatorInput(
        window=window,
        prompt=prompt,
        prior_edits=tuple(priors[:kept]),
        prior_contexts=tuple(contexts[:kept]),
        serialized=tuple(serialized),
    )


# ===== Heuristic labeler =====


class HeuristicLineLabeler:
    """Labels lines by token similarity against the prior edits.

    A line is Replace when its token-Jaccard against any before-line of a
    prior Replace edit reaches theta_replace (confidence = that similarity).
    A line is Insert when its (line, next-line) context matches a prior
    Insert's captured anchor context: the best positional token-Jaccard
    between the two line pairs must reach theta_insert.  Everything else is
    Keep with confidence 1 - (best similarity seen).
    """

    single_flight = False

    def __init__(self, theta_replace: float = 0.5, theta_insert: float = 0.6):
        self.theta_replace = theta_replace
        self.theta_insert = theta_insert

    def label_window(self, inp: LocatorInput) -> list[LinePrediction]:
        replace_rows = []
        insert_contexts = []
        for edit, context in zip(inp.prior_edits, inp.prior_contexts):
            if edit.edit_type is EditType.REPLACE:
                replace_rows.extend(
                    set(tokenize(line)) for line in edit.before_code
                )
            elif edit.edit_type is EditType.INSERT and context:
                insert_contexts.append([set(tokenize(line)) for line in context])

        line_sets = [set(tokenize(line)) for line in inp.window.lines]
        predictions = []
        for offset, tokens in enumerate(line_sets):
            sigma_r = max(
                (jaccard(tokens, row) for row in replace_rows), default=0.0
            )
            next_tokens = line_sets[offset + 1] if offset + 1 < len(line_sets) else None
            sigma_i = 0.0
            for context in insert_contexts:
                pairs = [(tokens, context[0])]
                if next_tokens is not None and len(context) > 1:
                    pairs.append((next_tokens, context[1]))
                sim = max(jaccard(a, b) for a, b in pairs)
                if sim > sigma_i:
                    sigma_i = sim
            r_ok = sigma_r >= self.theta_replace
            i_ok = sigma_i >= self.theta_insert
            if r_ok and (not i_ok or sigma_r >= sigma_i):
                probs = _spread(EditType.REPLACE, sigma_r)
            elif i_ok:
                probs = _spread(EditType.INSERT, sigma_i)
            else:
                probs = _spread(EditType.KEEP, 1.0 - max(sigma_r, sigma_i))
            predictions.append(
                LinePrediction.from_probs(inp.window.start_line + offset, probs)
            )
        return predictions


def _spread(label: EditType, confidence: float) -> tuple[float, float, float]:
    """Distribution with `confidence` on the label, remainder split evenly."""
    rest = (1.0 - confidence) / 2.0
    probs = {c: rest for c in CLASS_ORDER}
    probs[label] = confidence
    return (probs[EditType.KEEP], probs[EditType.INSERT], probs[EditType.REPLACE])


def predict_line_labels(inp: LocatorInput,
                        backend: LineLabeler | None = None,
                        heuristic: HeuristicLineLabeler | None = None
                        ) -> list[LinePrediction]:
    """One prediction per window line, in window order."""
    if backend is not None:
        rows = backend.label_lines(list(inp.serialized), len(inp.window.lines))
        return [
            LinePrediction.from_probs(inp.window.start_line + i, row)
            for i, row in enumerate(rows)
        ]
    labeler = heuristic or HeuristicLineLabeler()
    return labeler.label_window(inp)


# ===== Whole-file pass =====


def merge_predictions(
    prediction_sets: Sequence[Sequence[LinePrediction]],
) -> list[LinePrediction]:
    """Merge overlapping window predictions by max class confidence.

    Order independent: each class takes its maximum probability across the
    windows covering the line, the vector is renormalized, and ties resolve
    to Keep through LinePrediction.from_probs.
    """
    by_line: dict[int, list[float]] = {}
    for predictions in prediction_sets:
        for pred in predictions:
            acc = by_line.setdefault(pred.line, [0.0, 0.0, 0.0])
            for i in range(3):
                if pred.probs[i] > acc[i]:
                    acc[i] = pred.probs[i]
    merged = []
    for line in sorted(by_line):
        acc = by_line[line]
        total = sum(acc)
        probs = tuple(p / total for p in acc)
        merged.append(LinePrediction.from_probs(line, probs))
    return merged


def label_file(file_path: str, lines: Sequence[str], prompt: Prompt,
               priors: Sequence[Edit],
               prior_contexts: Sequence[tuple[str, ...] | None],
               config: EngineConfig,
               backend: LineLabeler | None = None) -> list[LinePrediction]:
    """Window, label and merge one file; returns one prediction per line."""
    windows = make_windows(file_path, lines, config.window_size,
                           config.window_stride)
    inputs = [
        build_locator_input(w, prompt, priors, prior_contexts,
                            config.token_budget)
        for w in windows
    ]
    heuristic = HeuristicLineLabeler(config.theta_replace, config.theta_insert)
    if backend is not None and len(inputs) > 1:
        # External calls dominate latency; fan out over a bounded pool.
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            results = list(
                pool.map(lambda i: predict_line_labels(i, backend, heuristic),
                         inputs)
            )
    else:
        results = [predict_line_labels(i, backend, heuristic) for i in inputs]
    return merge_predictions(results)
