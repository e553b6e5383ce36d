"""editrec: recommends follow-up edits from the edits you just made.

The engine tracks a session's edit history, scores which files and lines
need coordinated changes, and proposes concrete content for them, with a
mining pipeline and an evaluation harness around the same primitives.
"""

from .backends import (Backends, ExternalBackend, LexicalPairScorer,
                       SocketTransport, StdioTransport, TermFrequencyEmbedder)
from .config import EngineConfig, LogisticCombiner, ScoringConfig
from .diff import (DiffParseResult, FileDiff, SkippedFile, anchor_context,
                   apply_edit, diff_file_pair, line_labels_from_hunk,
                   merge_hunk_labels, parse_unified_diff, render_unified_diff,
                   split_segments)
from .errors import (BackendUnavailable, CoverageMismatch, EditRecError,
                     EmptyGroundTruth, EmptyReference, InsufficientNegatives,
                     InvalidAnchor, MalformedDiff, NoCandidate,
                     PreconditionFailed, RegionTooLarge, RevisionMismatch,
                     StaleEdit, UnknownRegion, UnknownSession, WindowTooLarge)
from .evaluation import (MetricReport, bleu4, eval_file_location,
                         eval_generation, eval_line_location, evaluate,
                         exact_match, file_location_scores, line_confusion,
                         line_metrics, run_ablation)
from .generator import (EditCandidate, GeneratorInput, HunkRegion,
                        build_generator_input, generate_candidates,
                        group_regions, region_from_hunk, rename_map,
                        replay_script)
from .locator import (CodeWindow, HeuristicLineLabeler, LinePrediction,
                      LocatorInput, build_locator_input, label_file,
                      make_windows, merge_predictions, predict_line_labels,
                      serialize_locator_input)
from .mining import (CommitRecord, FilterDecision, build_samples,
                     filter_commit, mine, read_commit_dir, read_git_repo,
                     read_samples, split_of)
from .model import (Edit, EditType, Hunk, ProjectSnapshot, Prompt, Segment,
                    language_of, normalize_path)
from .relevance import (DependencyScore, ProjectIndex, TargetLocation,
                        dep_pair, file_propagation_score, loc_sim,
                        locate_files, prior_relevance, rank_prior_edits,
                        relevance_distribution, relevance_features,
                        select_prior_edits)
from .session import EditSession, region_ref, region_to_dict
from .tokens import NEWLINE_TOKEN, jaccard, overlap_coefficient, tokenize, tokenize_lines

__version__ = "0.1.0"

__all__ = [
    "Backends",
    "BackendUnavailable",
    "CodeWindow",
    "CommitRecord",
    "CoverageMismatch",
    "DependencyScore",
    "DiffParseResult",
    "Edit",
    "EditCandidate",
    "EditRecError",
    "EditSession",
    "EditType",
    "EmptyGroundTruth",
    "EmptyReference",
    "EngineConfig",
    "ExternalBackend",
    "FileDiff",
    "FilterDecision",
    "GeneratorInput",
    "HeuristicLineLabeler",
    "Hunk",
    "HunkRegion",
    "InsufficientNegatives",
    "InvalidAnchor",
    "LexicalPairScorer",
    "LinePrediction",
    "LocatorInput",
    "LogisticCombiner",
    "MalformedDiff",
    "MetricReport",
    "NEWLINE_TOKEN",
    "NoCandidate",
    "PreconditionFailed",
    "ProjectIndex",
    "ProjectSnapshot",
    "Prompt",
    "RegionTooLarge",
    "RevisionMismatch",
    "ScoringConfig",
    "Segment",
    "SkippedFile",
    "SocketTransport",
    "StaleEdit",
    "StdioTransport",
    "TargetLocation",
    "TermFrequencyEmbedder",
    "UnknownRegion",
    "UnknownSession",
    "WindowTooLarge",
    "anchor_context",
    "apply_edit",
    "bleu4",
    "build_generator_input",
    "build_locator_input",
    "build_samples",
    "dep_pair",
    "diff_file_pair",
    "eval_file_location",
    "eval_generation",
    "eval_line_location",
    "evaluate",
    "exact_match",
    "file_location_scores",
    "file_propagation_score",
    "filter_commit",
    "generate_candidates",
    "group_regions",
    "jaccard",
    "label_file",
    "language_of",
    "line_confusion",
    "line_labels_from_hunk",
    "line_metrics",
    "loc_sim",
    "locate_files",
    "make_windows",
    "merge_hunk_labels",
    "merge_predictions",
    "mine",
    "normalize_path",
    "overlap_coefficient",
    "parse_unified_diff",
    "predict_line_labels",
    "prior_relevance",
    "rank_prior_edits",
    "read_commit_dir",
    "read_git_repo",
    "read_samples",
    "region_from_hunk",
    "region_ref",
    "region_to_dict",
    "relevance_distribution",
    "relevance_features",
    "rename_map",
    "render_unified_diff",
    "replay_script",
    "run_ablation",
    "select_prior_edits",
    "serialize_locator_input",
    "split_of",
    "split_segments",
    "tokenize",
    "tokenize_lines",
]
