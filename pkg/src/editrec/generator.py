"""Edit-content generation for located regions.

Regions group contiguous same-label lines out of a location pass.  The
default generator transfers patterns from relevant prior edits: a Replace
prior contributes its token-level before/after substitution script, replayed
onto the target lines; an Insert prior contributes its inserted lines with
identifiers renamed by aligning its anchor context with the region.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Sequence

from .backends import CandidateGenerator
from .errors import NoCandidate, RegionTooLarge
from .locator import PRIOR_TAG, PROMPT_TAG, TO_TAG, LinePrediction, fit_sections
from .model import Edit, EditType, Prompt
from .tokens import NEWLINE_TOKEN, is_identifier, tokenize, tokenize_lines

logger = logging.getLogger(__name__)

# Joining rules for rebuilding text from tokens: no space after openers,
# none before closers/separators.
_NO_SPACE_AFTER = {"(", "[", "{", ".", "@", "#", "~", "$"}
_NO_SPACE_BEFORE = {")", "]", "}", ",", ";", ":", ".", "!", "?"}


@dataclass(frozen=True)
class HunkRegion:
    """A contiguous target for content generation.

    For Replace, target_lines are the lines to rewrite starting at
    start_line.  For Insert, the single target line is the anchor the new
    content will follow (empty at the synthetic file head, start_line 0).
    """

    file_path: str
    edit_type: EditType
    start_line: int
    target_lines: tuple[str, ...]
    context_before: tuple[str, ...]
    context_after: tuple[str, ...]
    confidence: float = 0.0

    @property
    def end_line(self) -> int:
        return self.start_line + max(len(self.target_lines), 1) - 1

    @property
    def anchor_line(self) -> int:
        return self.start_line


@dataclass(frozen=True)
class EditCandidate:
    """One ranked content suggestion for a region."""

    content: tuple[str, ...]
    confidence: float
    rank: int


@dataclass(frozen=True)
class GeneratorInput:
    """A region plus relevance-ordered priors, serialized under a budget."""

    region: HunkRegion
    prompt: Prompt
    priors: tuple[tuple[Edit, float], ...]
    prior_contexts: tuple[tuple[str, ...] | None, ...]
    serialized: tuple[str, ...]


def group_regions(labels: Sequence[LinePrediction], file_path: str,
                  file_lines: Sequence[str],
                  context_lines: int = 3) -> list[HunkRegion]:
    """Contiguous same-label runs of non-Keep lines, with Keep context.

    Insert labels always form singleton regions (the inserted content
    belongs after one anchor line).  Context takes up to `context_lines`
    Keep-labeled lines on each side, clipped at file edges and at
    neighboring regions.
    """
    labeled = {p.line: p for p in labels}
    flagged = [p for p in sorted(labels, key=lambda p: p.line)
               if p.label is not EditType.KEEP]
    runs: list[list[LinePrediction]] = []
    for pred in flagged:
        if (runs
                and pred.label is EditType.REPLACE
                and runs[-1][-1].label is EditType.REPLACE
                and pred.line == runs[-1][-1].line + 1):
            runs[-1].append(pred)
        else:
            runs.append([pred])

    occupied = {p.line for p in flagged}
    n = len(file_lines)

    def take_context(frm: int, step: int) -> tuple[str, ...]:
        out = []
        line = frm
        while 1 <= line <= n and len(out) < context_lines and line not in occupied:
            if labeled.get(line) is not None and labeled[line].label is not EditType.KEEP:
                break
            out.append(file_lines[line - 1])
            line += step
        return tuple(out if step > 0 else reversed(out))

    regions = []
    for run in runs:
        start = run[0].line
        end = run[-1].line
        if run[0].label is EditType.INSERT:
            target = (file_lines[start - 1],) if 1 <= start <= n else ()
        else:
            target = tuple(file_lines[start - 1:end])
        regions.append(
            HunkRegion(
                file_path=file_path,
                edit_type=run[0].label,
                start_line=start,
                target_lines=target,
                context_before=take_context(start - 1, -1),
                context_after=take_context(end + 1, +1),
                confidence=max(p.confidence for p in run),
            )
        )
    return regions


def region_from_hunk(hunk, file_lines: Sequence[str],
                     context_lines: int = 3) -> HunkRegion:
    """The generation region a hunk describes against its pre-edit file."""
    n = len(file_lines)
    if hunk.is_pure_insert:
        anchor = hunk.before_start
        target = (file_lines[anchor - 1],) if 1 <= anchor <= n else ()
        lo, hi = anchor, anchor
        edit_type = EditType.INSERT
    else:
        lo, hi = hunk.before_start, hunk.before_end
        target = tuple(hunk.before_lines)
        edit_type = EditType.REPLACE
    before = tuple(file_lines[max(0, lo - 1 - context_lines):max(0, lo - 1)])
    after = tuple(file_lines[hi:hi + context_lines])
    return HunkRegion(
        file_path=hunk.file_path,
        edit_type=edit_type,
        start_line=hunk.before_start,
        target_lines=target,
        context_before=before,
        context_after=after,
        confidence=1.0,
    )


def serialize_generator_input(region: HunkRegion, prompt: Prompt,
                              priors: Sequence[Edit],
                              budget: int = 512) -> list[str]:
    """Flatten a region for a content generator.

    Layout: each context line as a Keep tag plus tokens, each target line as
    the region's type tag plus tokens, then the prompt tag and tokens, then
    priors in the same grammar as the locator input.

    Raises:
        RegionTooLarge: when the window section alone exceeds the budget.
    """
    window_tokens: list[str] = []
    for line in region.context_before:
        window_tokens.append(EditType.KEEP.tag)
        window_tokens.extend(tokenize(line))
    if region.target_lines:
        for line in region.target_lines:
            window_tokens.append(region.edit_type.tag)
            window_tokens.extend(tokenize(line))
    else:
        window_tokens.append(region.edit_type.tag)
    for line in region.context_after:
        window_tokens.append(EditType.KEEP.tag)
        window_tokens.extend(tokenize(line))
    chunks = []
    for edit in priors:
        chunk = [PRIOR_TAG, edit.edit_type.tag]
        chunk.extend(tokenize_lines(edit.before_code))
        chunk.append(TO_TAG)
        chunk.extend(tokenize_lines(edit.after_code))
        chunks.append(chunk)
    out, _ = fit_sections(window_tokens, prompt.tokens, chunks, budget,
                          RegionTooLarge)
    return out


def build_generator_input(region: HunkRegion, prompt: Prompt,
                          priors: Sequence[tuple[Edit, float]],
                          prior_contexts: Sequence[tuple[str, ...] | None] = (),
                          budget: int = 512) -> GeneratorInput:
    serialized = serialize_generator_input(
        region, prompt, [e for e, _ in priors], budget
    )
    contexts = list(prior_contexts) + [None] * (len(priors) - len(prior_contexts))
    return GeneratorInput(
        region=region,
        prompt=prompt,
        priors=tuple(priors),
        prior_contexts=tuple(contexts[:len(priors)]),
        serialized=tuple(serialized),
    )


# ===== Token-level pattern transfer =====


def detokenize(tokens: Sequence[str]) -> str:
    """Best-effort source text from a token run (spacing is heuristic)."""
    parts: list[str] = []
    for tok in tokens:
        if parts and tok not in _NO_SPACE_BEFORE and parts[-1] not in _NO_SPACE_AFTER:
            parts.append(" ")
        parts.append(tok)
    return "".join(parts)


def _tokens_to_lines(tokens: Sequence[str],
                     known_lines: Sequence[str]) -> tuple[str, ...]:
    """Split a merged token stream on newline markers and rebuild lines.

    A produced line whose tokens match a known line exactly reuses that
    line's original text, preserving its whitespace.
    """
    if not tokens:
        # A wholly-empty stream means the span was deleted, not replaced
        # with a blank line.
        return ()
    known = {}
    for line in known_lines:
        known.setdefault(tuple(tokenize(line)), line)
    lines: list[tuple[str, ...]] = [()]
    for tok in tokens:
        if tok == NEWLINE_TOKEN:
            lines.append(())
        else:
            lines[-1] = lines[-1] + (tok,)
    out = []
    for toks in lines:
        if toks in known:
            out.append(known[toks])
        else:
            out.append(detokenize(toks))
    return tuple(out)


def rename_map(source: Sequence[str], target: Sequence[str]) -> dict[str, str]:
    """Identifier renames implied by aligning two token streams.

    Equal runs vote for keeping an identifier; same-length replaced runs
    vote positionally for renames (unequal-length runs vote only when each
    side holds exactly one identifier).  A rename is adopted only when it
    strictly outvotes identity, so pervasive names stay put.
    """
    votes: dict[str, Counter] = {}
    matcher = SequenceMatcher(None, list(source), list(target), autojunk=False)
    for tag, a1, a2, b1, b2 in matcher.get_opcodes():
        if tag == "equal":
            for tok in source[a1:a2]:
                if is_identifier(tok):
                    votes.setdefault(tok, Counter())[tok] += 1
        elif tag == "replace":
            src_run = list(source[a1:a2])
            tgt_run = list(target[b1:b2])
            if len(src_run) == len(tgt_run):
                pairs = zip(src_run, tgt_run)
            else:
                src_ids = [t for t in src_run if is_identifier(t)]
                tgt_ids = [t for t in tgt_run if is_identifier(t)]
                pairs = (
                    zip(src_ids, tgt_ids)
                    if len(src_ids) == 1 and len(tgt_ids) == 1
                    else ()
                )
            for a, b in pairs:
                if is_identifier(a) and is_identifier(b):
                    votes.setdefault(a, Counter())[b] += 1
    mapping = {}
    for name, counter in votes.items():
        identity = counter.get(name, 0)
        best, count = max(
            counter.items(), key=lambda item: (item[1], item[0] == name, item[0])
        )
        if best != name and count > identity:
            mapping[name] = best
    return mapping


def _apply_rename(tokens: Sequence[str], mapping: dict[str, str]) -> list[str]:
    if not mapping:
        return list(tokens)
    return [mapping.get(t, t) for t in tokens]


def replay_script(source: Sequence[str], revised: Sequence[str],
                  target: Sequence[str]) -> list[str]:
    """Replay the source->revised token script onto the target stream.

    A three-way merge: spans the script keeps pass through with the
    target's own tokens (including target-only insertions and rewrites,
    found by aligning target to source); spans the script changes emit the
    revised tokens, superseding target material strictly inside them.  A
    target identical to the source yields exactly `revised`.
    """
    source = list(source)
    revised = list(revised)
    target = list(target)

    aligned: dict[int, int] = {}        # source pos -> matching target pos
    extras: dict[int, list[str]] = {}   # source boundary -> target-only run
    block_of: dict[int, int] = {}       # source pos -> rewrite block start
    blocks: dict[int, list[str]] = {}   # block start -> target rewrite run
    at = SequenceMatcher(None, source, target, autojunk=False)
    for tag, a1, a2, b1, b2 in at.get_opcodes():
        if tag == "equal":
            for k in range(a2 - a1):
                aligned[a1 + k] = b1 + k
        elif tag == "insert":
            extras.setdefault(a1, []).extend(target[b1:b2])
        elif tag == "replace":
            blocks[a1] = list(target[b1:b2])
            for p in range(a1, a2):
                block_of[p] = a1

    out: list[str] = []
    emitted = set()

    def emit_target(pos: int):
        if pos in aligned:
            out.append(target[aligned[pos]])
        elif pos in block_of:
            start = block_of[pos]
            if start not in emitted:
                emitted.add(start)
                out.extend(blocks[start])
        # Source tokens the target deleted stay deleted.

    ab = SequenceMatcher(None, source, revised, autojunk=False)
    for tag, a1, a2, b1, b2 in ab.get_opcodes():
        if tag == "equal":
            for pos in range(a1, a2):
                out.extend(extras.pop(pos, ()))
                emit_target(pos)
        else:
            out.extend(extras.pop(a1, ()))
            out.extend(revised[b1:b2])
            for pos in range(a1 + 1, a2):
                extras.pop(pos, None)  # superseded by the rewrite
    out.extend(extras.pop(len(source), ()))
    return out


class PatternTransferGenerator:
    """Builds candidates by transferring each prior edit onto the region.

    Candidate confidence is the relevance of its source prior; candidates
    that would leave the region unchanged are dropped.
    """

    single_flight = False

    def generate_for_region(self, inp: GeneratorInput) -> list[tuple[tuple[str, ...], float]]:
        region = inp.region
        results: list[tuple[tuple[str, ...], float]] = []
        for (prior, relevance), context in zip(inp.priors, inp.prior_contexts):
            if prior.edit_type is not region.edit_type:
                continue
            if list(prior.before_code) == list(prior.after_code):
                continue  # empty substitution script, would be a no-op
            if region.edit_type is EditType.REPLACE:
                content = self._transfer_replace(prior, region)
                if content is None or content == region.target_lines:
                    continue
            else:
                content = self._transfer_insert(prior, region, context)
                if not content:
                    continue
            results.append((content, relevance))
        return results

    def _transfer_replace(self, prior: Edit,
                          region: HunkRegion) -> tuple[str, ...] | None:
        source = tokenize_lines(prior.before_code)
        revised = tokenize_lines(prior.after_code)
        target = tokenize_lines(region.target_lines)
        if not source or not target:
            return None
        mapping = rename_map(source, target)
        source = _apply_rename(source, mapping)
        revised = _apply_rename(revised, mapping)
        merged = replay_script(source, revised, target)
        known = list(prior.after_code) + list(region.target_lines)
        return _tokens_to_lines(merged, known)

    def _transfer_insert(self, prior: Edit, region: HunkRegion,
                         context: tuple[str, ...] | None) -> tuple[str, ...]:
        region_lines = (region.context_before + region.target_lines
                        + region.context_after)
        mapping = {}
        if context:
            mapping = rename_map(tokenize_lines(context),
                                 tokenize_lines(region_lines))
        out = []
        for line in prior.after_code:
            tokens = tokenize(line)
            renamed = _apply_rename(tokens, mapping)
            if renamed == tokens:
                out.append(line)  # untouched: keep original spacing
            else:
                out.append(detokenize(renamed))
        return tuple(out)


def generate_candidates(inp: GeneratorInput,
                        backend: CandidateGenerator | None = None,
                        k: int = 5) -> list[EditCandidate]:
    """Up to k deduplicated candidates, best first with dense ranks.

    Raises:
        NoCandidate: with no priors (and no unconditional backend), or when
            every transfer collapses to a no-op.
        ValueError: when k < 1.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if backend is not None:
        raw = [
            (tuple(lines), conf)
            for lines, conf in backend.generate(list(inp.serialized), k)
        ]
    else:
        if not inp.priors:
            raise NoCandidate("no prior edits to transfer from")
        raw = PatternTransferGenerator().generate_for_region(inp)
    raw.sort(key=lambda item: -item[1])
    seen = set()
    candidates = []
    for content, confidence in raw:
        if content in seen:
            continue
        seen.add(content)
        candidates.append(
            EditCandidate(content=content, confidence=confidence,
                          rank=len(candidates) + 1)
        )
        if len(candidates) == k:
            break
    if not candidates:
        raise NoCandidate("no applicable prior edit produced content")
    return candidates
