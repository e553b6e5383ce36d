"""Evaluation harness: metrics and per-task dataset runners.

Metrics are deliberately small, pure functions so the tests can pit them
against brute-force oracles.  Dataset runners consume the miner's JSONL
samples and produce deterministic MetricReport objects.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .backends import Backends
from .config import EngineConfig
from .errors import (CoverageMismatch, EditRecError, EmptyGroundTruth,
                     EmptyReference)
from .generator import HunkRegion, build_generator_input, generate_candidates
from .locator import label_file
from .model import Edit, EditType, ProjectSnapshot, Prompt
from .relevance import TargetLocation, locate_files, rank_prior_edits_indexed
from .tokens import tokenize_lines

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_KS = (1, 3, 5, 10)
CLASS_TAGS = tuple(c.tag for c in (EditType.KEEP, EditType.INSERT,
                                   EditType.REPLACE))


# ===== File-location metrics =====


def file_location_scores(predicted: Sequence[str],
                         actual: Sequence[str]) -> tuple[float, float]:
    """(precision, recall) over file sets.

    An empty prediction has vacuous precision 1.0.

    Raises:
        EmptyGroundTruth: recall is undefined with no actual files.
    """
    if not actual:
        raise EmptyGroundTruth("no ground-truth files to recall")
    pred = set(predicted)
    gold = set(actual)
    hits = len(pred & gold)
    precision = 1.0 if not pred else hits / len(pred)
    recall = hits / len(gold)
    return precision, recall


# ===== Line-location metrics =====


def line_confusion(predicted: Mapping[int, str], actual: Mapping[int, str],
                   lines: Iterable[int]) -> dict[tuple[str, str], int]:
    """(actual_tag, predicted_tag) counts over the given lines.

    Lines absent from `actual` count as Keep.  Every graded line must be
    predicted, except the synthetic head anchor 0, which no window covers
    and which therefore grades as a predicted Keep.

    Raises:
        CoverageMismatch: a graded line has no prediction.
    """
    keep = EditType.KEEP.tag
    counts: dict[tuple[str, str], int] = {}
    for line in lines:
        if line not in predicted and line != 0:
            raise CoverageMismatch(f"no prediction for graded line {line}")
        key = (actual.get(line, keep), predicted.get(line, keep))
        counts[key] = counts.get(key, 0) + 1
    return counts


def line_metrics(confusion: Mapping[tuple[str, str], int]) -> dict:
    """Accuracy plus macro precision/recall over the three line classes.

    A class absent from both sides scores vacuous precision and recall 1.0,
    so small windows without inserts are not penalized for them.
    """
    total = sum(confusion.values())
    correct = sum(n for (a, p), n in confusion.items() if a == p)
    accuracy = correct / total if total else 1.0
    per_class = {}
    for tag in CLASS_TAGS:
        tp = confusion.get((tag, tag), 0)
        fp = sum(n for (a, p), n in confusion.items() if p == tag and a != tag)
        fn = sum(n for (a, p), n in confusion.items() if a == tag and p != tag)
        precision = tp / (tp + fp) if (tp + fp) else 1.0
        recall = tp / (tp + fn) if (tp + fn) else 1.0
        per_class[tag] = {"precision": precision, "recall": recall}
    macro_p = sum(per_class[t]["precision"] for t in CLASS_TAGS) / len(CLASS_TAGS)
    macro_r = sum(per_class[t]["recall"] for t in CLASS_TAGS) / len(CLASS_TAGS)
    return {
        "accuracy": accuracy,
        "macro_precision": macro_p,
        "macro_recall": macro_r,
        "per_class": per_class,
    }


# ===== Generation metrics =====


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Corpus-style BLEU-4 for one pair, scaled 0..100.

    Uniform quarter weights; add-one smoothing on the 2..4-gram precisions
    only, so a zero unigram precision still zeroes the score; standard
    brevity penalty.

    Raises:
        EmptyReference: nothing to compare against.
    """
    if not reference:
        raise EmptyReference("reference token stream is empty")
    if not candidate:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand = _ngrams(candidate, n)
        ref = _ngrams(reference, n)
        total = max(len(candidate) - n + 1, 0)
        matched = sum(min(count, ref[gram]) for gram, count in cand.items())
        if n == 1:
            if matched == 0:
                return 0.0
            p = matched / total
        else:
            p = (matched + 1) / (total + 1)
        log_sum += 0.25 * math.log(p)
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return 100.0 * brevity * math.exp(log_sum)


def exact_match(candidate: Sequence[str], reference: Sequence[str]) -> bool:
    """Token-for-token equality."""
    return list(candidate) == list(reference)


def _content_bleu(candidate_tokens: list[str], ref_tokens: list[str]) -> float:
    if not ref_tokens:
        return 100.0 if not candidate_tokens else 0.0
    return bleu4(candidate_tokens, ref_tokens)


# ===== Reports =====


@dataclass
class MetricReport:
    """One evaluation run's outcome, deterministic for a fixed input."""

    task: str
    config_hash: str
    n_samples: int
    metrics: dict
    params: dict = field(default_factory=dict)
    v: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "task": self.task,
            "config_hash": self.config_hash,
            "n_samples": self.n_samples,
            "metrics": self.metrics,
            "params": self.params,
        }


# ===== Dataset runners =====


def eval_file_location(samples: Sequence[dict], config: EngineConfig,
                       backends: Backends) -> MetricReport:
    """Mean precision/recall of cross-file propagation over samples.

    Samples whose commit touched no other file have no ground truth and are
    skipped (counted separately).
    """
    precisions = []
    recalls = []
    skipped = 0
    for sample in samples:
        gold = sample["positives"]
        if not gold:
            skipped += 1
            continue
        snapshot = ProjectSnapshot(
            {p: tuple(v) for p, v in sample["files"].items()}
        )
        edit = Edit.from_dict(sample["target_edit"])
        scored = locate_files(edit, snapshot, config.scoring, backends)
        predicted = [path for path, _ in scored]
        p, r = file_location_scores(predicted, gold)
        precisions.append(p)
        recalls.append(r)
    n = len(precisions)
    metrics = {
        "precision": sum(precisions) / n if n else 0.0,
        "recall": sum(recalls) / n if n else 0.0,
        "skipped_empty_gt": skipped,
    }
    return MetricReport(
        task="file_loc",
        config_hash=config.config_hash(),
        n_samples=len(samples),
        metrics=metrics,
    )


def _ranked_priors(sample: dict, target: TargetLocation,
                   config: EngineConfig, backends: Backends
                   ) -> tuple[list[Edit], list, list[float]]:
    priors = [Edit.from_dict(e) for e in sample.get("prior_edits", [])]
    raw_contexts = sample.get("prior_contexts") or [None] * len(priors)
    contexts = [tuple(c) if c else None for c in raw_contexts]
    prompt = Prompt(sample.get("prompt", ""))
    ranked = rank_prior_edits_indexed(priors, target, config.scoring,
                                      config.combiner, backends, prompt)
    return (
        [edit for _, edit, _ in ranked],
        [contexts[idx] for idx, _, _ in ranked],
        [rel for _, _, rel in ranked],
    )


def eval_line_location(samples: Sequence[dict], config: EngineConfig,
                       backends: Backends) -> MetricReport:
    """Pooled line-label confusion over samples.

    Lines covered by the sample's other (prior) hunks are excluded from
    grading; everything else in the file counts, Keep by default.
    """
    pooled: dict[tuple[str, str], int] = {}
    failures = 0
    for sample in samples:
        lines = [str(s) for s in sample["file_before"]]
        target = TargetLocation(
            file_path=sample["file_path"],
            anchor_line=1,
            lines=tuple(lines),
        )
        priors, contexts, _ = _ranked_priors(sample, target, config, backends)
        prompt = Prompt(sample.get("prompt", ""))
        try:
            predictions = label_file(sample["file_path"], lines, prompt,
                                     priors, contexts, config,
                                     backends.line_labeler)
        except EditRecError:
            failures += 1
            continue
        predicted = {p.line: p.label.tag for p in predictions}
        actual = {int(line): tag for line, tag in sample["gt_labels"]}
        excluded = set(sample.get("excluded_lines", []))
        domain = set(range(1, len(lines) + 1)) - excluded
        domain.update(a for a in actual if a == 0)
        for key, count in line_confusion(predicted, actual, sorted(domain)).items():
            pooled[key] = pooled.get(key, 0) + count
    metrics = line_metrics(pooled)
    metrics["failures"] = failures
    return MetricReport(
        task="line_loc",
        config_hash=config.config_hash(),
        n_samples=len(samples),
        metrics=metrics,
    )


def _region_from_sample(sample: dict) -> HunkRegion:
    region = sample["region"]
    return HunkRegion(
        file_path=sample["file_path"],
        edit_type=EditType.from_tag(region["edit_type"]),
        start_line=int(region["start_line"]),
        target_lines=tuple(region["target_lines"]),
        context_before=tuple(region["context_before"]),
        context_after=tuple(region["context_after"]),
        confidence=1.0,
    )


def _derived_rng(seed: int, sample: dict) -> random.Random:
    key = f"{seed}:{sample.get('commit_id', '')}:{sample.get('hunk_index', 0)}"
    digest = hashlib.md5(key.encode("utf-8")).hexdigest()
    return random.Random(int(digest[:16], 16))


def _priors_for_policy(sample: dict, region: HunkRegion, policy: str,
                       config: EngineConfig, backends: Backends,
                       seed: int) -> tuple[list[tuple[Edit, float]], list]:
    target = TargetLocation(
        file_path=region.file_path,
        anchor_line=region.start_line,
        lines=region.target_lines or region.context_before,
    )
    priors, contexts, rels = _ranked_priors(sample, target, config, backends)
    selected = [i for i, rel in enumerate(rels) if rel > config.scoring.th_pri]
    if policy == "selective":
        picked = selected
        confidences = [rels[i] for i in picked]
    elif policy == "random":
        rng = _derived_rng(seed, sample)
        size = min(len(selected), len(priors))
        # Draw order stands in for relevance order: the baseline has neither
        # a selection nor a ranking opinion.
        picked = rng.sample(range(len(priors)), size)
        # Synthetic descending confidences: the random policy has no
        # relevance opinion, only an ordering.
        confidences = [max(0.9 - 0.05 * i, 0.05) for i in range(len(picked))]
    else:
        raise ValueError(f"unknown policy {policy!r}")
    pairs = [(priors[i], conf) for i, conf in zip(picked, confidences)]
    kept_contexts = [contexts[i] for i in picked]
    return pairs, kept_contexts


def eval_generation(samples: Sequence[dict], config: EngineConfig,
                    backends: Backends, ks: Sequence[int] = DEFAULT_KS,
                    policy: str = "selective",
                    seed: int = 42) -> MetricReport:
    """Exact-match rate and BLEU at each k, with the given prior policy.

    A sample where generation fails outright contributes zero to every
    metric, keeping runs comparable across policies.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("ks must be positive integers")
    em_hits = {k: 0.0 for k in ks}
    bleu_sums = {k: 0.0 for k in ks}
    failures = 0
    for sample in samples:
        region = _region_from_sample(sample)
        prompt = Prompt(sample.get("prompt", ""))
        ref_tokens = tokenize_lines([str(s) for s in sample["gt_after"]])
        try:
            pairs, contexts = _priors_for_policy(sample, region, policy,
                                                 config, backends, seed)
            inp = build_generator_input(region, prompt, pairs, contexts,
                                        config.token_budget)
            candidates = generate_candidates(inp, backends.generator, max(ks))
        except (EditRecError, ValueError) as exc:
            logger.debug("generation failed for %s#%s: %s",
                         sample.get("commit_id"), sample.get("hunk_index"), exc)
            failures += 1
            continue
        token_lists = [tokenize_lines(c.content) for c in candidates]
        for k in ks:
            top = token_lists[:k]
            if any(exact_match(toks, ref_tokens) for toks in top):
                em_hits[k] += 1.0
            if top:
                bleu_sums[k] += max(_content_bleu(toks, ref_tokens)
                                    for toks in top)
    n = len(samples)
    metrics = {
        "em": {k: (em_hits[k] / n if n else 0.0) for k in ks},
        "bleu": {k: (bleu_sums[k] / n if n else 0.0) for k in ks},
        "failures": failures,
    }
    return MetricReport(
        task="gen",
        config_hash=config.config_hash(),
        n_samples=n,
        metrics=metrics,
        params={"ks": ks, "policy": policy, "seed": seed},
    )


def run_ablation(samples: Sequence[dict], config: EngineConfig,
                 backends: Backends, ks: Sequence[int] = DEFAULT_KS,
                 seed: int = 42) -> dict:
    """Selective vs random prior choice on the same samples.

    The random arm draws a subset of the same size as the selective one per
    sample, so any gap is attributable to selection quality alone.
    """
    selective = eval_generation(samples, config, backends, ks,
                                policy="selective", seed=seed)
    randomized = eval_generation(samples, config, backends, ks,
                                 policy="random", seed=seed)
    ks_sorted = sorted(set(int(k) for k in ks))
    directional_ok = all(
        selective.metrics["em"][k] >= randomized.metrics["em"][k]
        for k in ks_sorted
    )
    return {
        "v": SCHEMA_VERSION,
        "selective": selective.to_dict(),
        "random": randomized.to_dict(),
        "directional_ok": directional_ok,
    }


def evaluate(samples: Sequence[dict], task: str, config: EngineConfig,
             backends: Backends, ks: Sequence[int] = DEFAULT_KS,
             policy: str = "selective", seed: int = 42) -> MetricReport:
    """Dispatch one dataset to its task runner."""
    if task == "file_loc":
        return eval_file_location(samples, config, backends)
    if task == "line_loc":
        return eval_line_location(samples, config, backends)
    if task == "gen":
        return eval_generation(samples, config, backends, ks, policy, seed)
    raise ValueError(f"unknown task {task!r}")
