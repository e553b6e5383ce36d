"""Propagation scoring: which files, and which prior edits, matter for an edit.

Two questions are answered here.  First, given a fresh edit, which other
files is it likely to drag along (file propagation score: a weighted blend
of identifier dependency and semantic similarity, maximized over file
segments)?  Second, given a concrete target location, which of the recorded
prior edits are relevant context for predicting its content (a logistic
blend of dependency, semantic and locational features)?
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .backends import Backends, LexicalPairScorer
from .config import LogisticCombiner, ScoringConfig
from .diff import split_segments
from .model import Edit, ProjectSnapshot, Prompt, Segment
from .tokens import TermVector, identifiers, tokenize_lines

logger = logging.getLogger(__name__)


class DependencyScore(NamedTuple):
    """Directional dependency likelihoods between two code fragments."""

    y1: float  # former depends on latter
    y2: float  # latter depends on former


@dataclass(frozen=True)
class TargetLocation:
    """A concrete place an edit might land: file, anchor line, nearby code."""

    file_path: str
    anchor_line: int
    lines: tuple[str, ...]

    @classmethod
    def from_edit(cls, edit: Edit) -> "TargetLocation":
        return cls(edit.file_path, edit.anchor_line, edit.code)

    @property
    def tokens(self) -> list[str]:
        return tokenize_lines(self.lines)


# ===== Project index =====


@dataclass
class _SegmentEntry:
    segment: Segment
    tokens: list[str]
    ident_set: set[str]
    vector: TermVector


@dataclass
class ProjectIndex:
    """Per-file segment caches so repeated scoring passes stay cheap."""

    config: ScoringConfig
    backends: Backends
    entries: dict[str, list[_SegmentEntry]] = field(default_factory=dict)

    @classmethod
    def build(cls, project: ProjectSnapshot, config: ScoringConfig,
              backends: Backends) -> "ProjectIndex":
        index = cls(config=config, backends=backends)
        for path, lines in project.items():
            index.update_file(path, lines)
        return index

    def update_file(self, path: str, lines: Sequence[str]):
        entries = []
        for seg in split_segments(path, lines, self.config.max_segment_tokens):
            tokens = tokenize_lines(seg.lines)
            entries.append(
                _SegmentEntry(
                    segment=seg,
                    tokens=tokens,
                    ident_set=identifiers(tokens),
                    vector=self.backends.embedder.embed(tokens),
                )
            )
        self.entries[path] = entries

    def drop_file(self, path: str):
        self.entries.pop(path, None)

    def segments(self, path: str) -> list[_SegmentEntry]:
        return self.entries.get(path, [])


# ===== Pairwise and per-file scores =====


def dep_pair(former: Sequence[str], latter: Sequence[str],
             backends: Backends | None = None) -> DependencyScore:
    """Dependency likelihoods between two code blocks (lists of lines)."""
    backends = backends or Backends.lexical()
    y1, y2 = backends.pair_scorer.score_pair(
        tokenize_lines(former), tokenize_lines(latter)
    )
    return DependencyScore(y1, y2)


def _edit_tokens(edit: Edit) -> list[str]:
    return tokenize_lines(edit.code)


def dep_file(edit: Edit, file_lines: Sequence[str], config: ScoringConfig,
             backends: Backends, file_path: str = "",
             index: ProjectIndex | None = None) -> float:
    """Max over file segments of "segment depends on the edited code"."""
    c_tar = _edit_tokens(edit)
    best = 0.0
    for entry in _segment_entries(file_path, file_lines, config, backends, index):
        if isinstance(backends.pair_scorer, LexicalPairScorer):
            score = _lexical_dep(c_tar, entry)
        else:
            _, score = backends.pair_scorer.score_pair(c_tar, entry.tokens)
        if score > best:
            best = score
    return best


def sem_file(edit: Edit, file_lines: Sequence[str], config: ScoringConfig,
             backends: Backends, file_path: str = "",
             index: ProjectIndex | None = None) -> float:
    """Max over file segments of embedding cosine with the edited code."""
    vec = backends.embedder.embed(_edit_tokens(edit))
    best = 0.0
    for entry in _segment_entries(file_path, file_lines, config, backends, index):
        score = vec.cosine(entry.vector)
        if score > best:
            best = score
    return best


def _lexical_dep(c_tar_tokens: list[str], entry: _SegmentEntry) -> float:
    former_ids = identifiers(c_tar_tokens)
    if not entry.ident_set:
        return 0.0
    return len(former_ids & entry.ident_set) / len(entry.ident_set)


def _segment_entries(file_path: str, file_lines: Sequence[str],
                     config: ScoringConfig, backends: Backends,
                     index: ProjectIndex | None) -> list[_SegmentEntry]:
    if index is not None and file_path and index.segments(file_path):
        return index.segments(file_path)
    entries = []
    for seg in split_segments(file_path, file_lines, config.max_segment_tokens):
        tokens = tokenize_lines(seg.lines)
        entries.append(
            _SegmentEntry(
                segment=seg,
                tokens=tokens,
                ident_set=identifiers(tokens),
                vector=backends.embedder.embed(tokens),
            )
        )
    return entries


def file_propagation_score(edit: Edit, file_lines: Sequence[str],
                           config: ScoringConfig, backends: Backends,
                           file_path: str = "",
                           index: ProjectIndex | None = None) -> float:
    """alpha1 * dep + alpha2 * sem + epsilon; unbounded above by design."""
    dep = dep_file(edit, file_lines, config, backends, file_path, index)
    sem = sem_file(edit, file_lines, config, backends, file_path, index)
    return config.alpha1 * dep + config.alpha2 * sem + config.epsilon


def locate_files(edit: Edit, project: ProjectSnapshot, config: ScoringConfig,
                 backends: Backends,
                 index: ProjectIndex | None = None) -> list[tuple[str, float]]:
    """Files whose propagation score clears th_sub, best first.

    The edited file itself is excluded.  Ties break on ascending path so the
    ordering is total and stable.
    """
    scored = []
    for path in project.paths():
        if path == edit.file_path:
            continue
        score = file_propagation_score(
            edit, project.lines(path), config, backends, path, index
        )
        if score > config.th_sub:
            scored.append((path, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


# ===== Prior-edit relevance =====


def loc_sim(prior: Edit, target: TargetLocation, k_window: int) -> float:
    """Line-distance kernel: 1 at the anchor, 0 from k_window lines away.

    Different files never count as near, whatever their line numbers.
    """
    if prior.file_path != target.file_path:
        return 0.0
    distance = abs(prior.anchor_line - target.anchor_line)
    if distance >= k_window:
        return 0.0
    return 1.0 - distance / k_window


def relevance_features(prior: Edit, target: TargetLocation,
                       config: ScoringConfig, backends: Backends,
                       prompt: Prompt | None = None
                       ) -> tuple[float, float, float, float]:
    """(dep, sem, loc, prompt_sim) features for one prior/target pair."""
    prior_tokens = _edit_tokens(prior)
    target_tokens = target.tokens
    _, dep = backends.pair_scorer.score_pair(prior_tokens, target_tokens)
    sem = backends.embedder.embed(prior_tokens).cosine(
        backends.embedder.embed(target_tokens)
    )
    loc = loc_sim(prior, target, config.k_window)
    prompt_sim = 0.0
    if prompt is not None and not prompt.is_empty:
        prompt_sim = backends.embedder.embed(prompt.tokens).cosine(
            backends.embedder.embed(prior_tokens)
        )
    return dep, sem, loc, prompt_sim


def prior_relevance(prior: Edit, target: TargetLocation,
                    config: ScoringConfig, combiner: LogisticCombiner,
                    backends: Backends, prompt: Prompt | None = None) -> float:
    """Relevance of one prior edit to a target location, in (0, 1)."""
    dep, sem, loc, prompt_sim = relevance_features(
        prior, target, config, backends, prompt
    )
    return combiner.combine(dep, sem, loc, prompt_sim)


def rank_prior_edits_indexed(priors: Sequence[Edit], target: TargetLocation,
                             config: ScoringConfig, combiner: LogisticCombiner,
                             backends: Backends, prompt: Prompt | None = None
                             ) -> list[tuple[int, Edit, float]]:
    """All priors with original index and score, best first.

    Ties go to the most recent prior (the later index).
    """
    scored = [
        (idx, prior, prior_relevance(prior, target, config, combiner,
                                     backends, prompt))
        for idx, prior in enumerate(priors)
    ]
    scored.sort(key=lambda item: (-item[2], -item[0]))
    return scored


def rank_prior_edits(priors: Sequence[Edit], target: TargetLocation,
                     config: ScoringConfig, combiner: LogisticCombiner,
                     backends: Backends, prompt: Prompt | None = None
                     ) -> list[tuple[Edit, float]]:
    """All priors with scores, descending; ties go to the most recent."""
    return [
        (prior, rel)
        for _, prior, rel in rank_prior_edits_indexed(
            priors, target, config, combiner, backends, prompt
        )
    ]


def select_prior_edits(priors: Sequence[Edit], target: TargetLocation,
                       config: ScoringConfig, combiner: LogisticCombiner,
                       backends: Backends, prompt: Prompt | None = None
                       ) -> list[tuple[Edit, float]]:
    """Priors whose relevance strictly exceeds th_pri, descending."""
    ranked = rank_prior_edits(priors, target, config, combiner, backends, prompt)
    return [(prior, rel) for prior, rel in ranked if rel > config.th_pri]


def relevance_distribution(scores: Sequence[float]) -> list[float]:
    """Normalize non-negative scores into a probability distribution.

    All-zero input degrades to the uniform distribution rather than a
    division by zero.

    Raises:
        ValueError: on negative scores.
    """
    scores = list(scores)
    if not scores:
        return []
    if min(scores) < 0:
        raise ValueError("relevance scores must be non-negative")
    total = sum(scores)
    if total == 0.0:
        return [1.0 / len(scores)] * len(scores)
    return [s / total for s in scores]
