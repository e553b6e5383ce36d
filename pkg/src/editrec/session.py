"""Interactive editing sessions.

A session holds a project snapshot, a monotonically increasing revision,
and the ordered history of edits made so far.  Every recorded edit becomes
a prior for the next round of recommendations: which files need follow-up
changes, which lines inside them, and what the new content should be.

All state transitions append to an event log; replaying the log rebuilds
the session byte for byte, which the tests rely on.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .backends import Backends, LineLabeler
from .config import EngineConfig
from .diff import anchor_context, apply_edit
from .errors import PreconditionFailed, RevisionMismatch, UnknownRegion
from .generator import (HunkRegion, build_generator_input, generate_candidates,
                        group_regions)
from .locator import LinePrediction, label_file
from .model import Edit, EditType, ProjectSnapshot, Prompt
from .relevance import (ProjectIndex, TargetLocation, locate_files,
                        rank_prior_edits_indexed)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def region_ref(region: HunkRegion) -> str:
    """Deterministic identifier for a recommended region.

    Depends only on the region's identity (file, kind, span, current text),
    so identical regions keep the same ref across revisions and replays.
    """
    payload = "|".join([
        region.file_path,
        region.edit_type.tag,
        str(region.start_line),
        str(region.end_line),
        "\x1f".join(region.target_lines),
    ])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def region_to_dict(region: HunkRegion) -> dict:
    return {
        "ref": region_ref(region),
        "file_path": region.file_path,
        "edit_type": region.edit_type.tag,
        "start_line": region.start_line,
        "end_line": region.end_line,
        "target_lines": list(region.target_lines),
        "confidence": round(region.confidence, 6),
    }


@dataclass
class EditSession:
    """One user's live editing session against a project snapshot."""

    session_id: str
    snapshot: ProjectSnapshot
    config: EngineConfig
    backends: Backends
    prompt: Prompt = field(default_factory=lambda: Prompt(""))
    log_path: Path | None = None

    revision: int = 0
    history: list[Edit] = field(default_factory=list)
    history_contexts: list[tuple[str, ...] | None] = field(default_factory=list)
    owned: dict[str, set[int]] = field(default_factory=dict)
    ignored: dict[str, int] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self._index = ProjectIndex.build(self.snapshot, self.config.scoring,
                                         self.backends)
        self._region_cache: dict[str, HunkRegion] = {}
        self._region_cache_revision = -1

    # ----- construction and replay -----

    @classmethod
    def create(cls, session_id: str, files: dict[str, Sequence[str]],
               config: EngineConfig, backends: Backends,
               prompt: str = "", log_path: str | Path | None = None
               ) -> "EditSession":
        session = cls(
            session_id=session_id,
            snapshot=ProjectSnapshot.from_texts(files)
            if files and isinstance(next(iter(files.values())), str)
            else ProjectSnapshot({p: tuple(v) for p, v in files.items()}),
            config=config,
            backends=backends,
            prompt=Prompt(prompt),
            log_path=Path(log_path) if log_path else None,
        )
        # The created event must head the log; truncate any leftover from
        # an earlier session that used the same path.
        if session.log_path is not None:
            session.log_path.parent.mkdir(parents=True, exist_ok=True)
            session.log_path.write_text("", encoding="utf-8")
        session._log({
            "v": SCHEMA_VERSION,
            "type": "created",
            "session_id": session_id,
            "prompt": prompt,
            "config_hash": config.config_hash(),
            "files": {p: list(session.snapshot.lines(p))
                      for p in session.snapshot.paths()},
        })
        return session

    @classmethod
    def replay(cls, events: Sequence[dict], config: EngineConfig,
               backends: Backends) -> "EditSession":
        """Rebuild a session purely from its event log."""
        if not events or events[0].get("type") != "created":
            raise PreconditionFailed("event log must start with a created event")
        head = events[0]
        session = cls.create(
            session_id=head["session_id"],
            files={p: tuple(v) for p, v in head["files"].items()},
            config=config,
            backends=backends,
            prompt=head.get("prompt", ""),
        )
        # create() logged a fresh created event; keep the original instead.
        session.events = [dict(head)]
        for event in events[1:]:
            kind = event.get("type")
            if kind == "edit":
                session.record_edit(Edit.from_dict(event["edit"]),
                                    revision=event["revision"])
            elif kind == "feedback":
                if event.get("action") == "reject":
                    session._apply_reject(event["ref"], event["revision"])
                    session.events.append(dict(event))
                else:
                    # Accepts carry their state change as the next edit event.
                    session.events.append(dict(event))
            else:
                raise PreconditionFailed(f"unknown event type {kind!r}")
        return session

    @classmethod
    def replay_log(cls, log_path: str | Path, config: EngineConfig,
                   backends: Backends) -> "EditSession":
        events = []
        with open(log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return cls.replay(events, config, backends)

    # ----- state transitions -----

    def record_edit(self, edit: Edit, revision: int) -> int:
        """Apply one edit at the expected revision; returns the new revision.

        Raises:
            RevisionMismatch: client and session revisions disagree.
            StaleEdit: the edit no longer matches the file content.
        """
        if revision != self.revision:
            raise RevisionMismatch(self.revision, revision)
        old_lines = list(self.snapshot.lines(edit.file_path)) \
            if edit.file_path in self.snapshot else []
        new_lines = apply_edit(old_lines, edit)
        context = None
        if edit.edit_type is EditType.INSERT:
            ctx = anchor_context(old_lines, edit.anchor_line)
            context = ctx if ctx else None
        self.snapshot = self.snapshot.with_file(edit.file_path, new_lines)
        self._index.update_file(edit.file_path, new_lines)
        self._shift_owned(edit)
        self.history.append(edit)
        self.history_contexts.append(context)
        self._log({
            "v": SCHEMA_VERSION,
            "type": "edit",
            "revision": self.revision,
            "edit": edit.to_dict(),
            "context": list(context) if context else None,
        })
        self.revision += 1
        return self.revision

    def _shift_owned(self, edit: Edit):
        """Track which current-file lines the edit history already covers."""
        lines = self.owned.setdefault(edit.file_path, set())
        if edit.edit_type is EditType.INSERT:
            cut = edit.anchor_line
            delta = len(edit.after_code)
            start = edit.anchor_line + 1
        else:
            cut = edit.anchor_line - 1
            delta = len(edit.after_code) - len(edit.before_code)
            start = edit.anchor_line
        span_before = len(edit.before_code)
        shifted = set()
        for line in lines:
            if line <= cut:
                shifted.add(line)
            elif line <= cut + span_before:
                continue  # consumed by the rewrite
            else:
                shifted.add(line + delta)
        shifted.update(range(start, start + len(edit.after_code)))
        if edit.edit_type is EditType.INSERT and edit.anchor_line >= 1:
            # The anchor itself is claimed too, else the insert's own context
            # re-flags the spot it just filled.
            shifted.add(edit.anchor_line)
        self.owned[edit.file_path] = shifted

    def _apply_reject(self, ref: str, revision: int):
        if revision != self.revision:
            raise RevisionMismatch(self.revision, revision)
        self.ignored[ref] = revision

    def apply_feedback(self, ref: str, action: str, revision: int,
                       content: Sequence[str] | None = None) -> dict:
        """Accept (optionally with modified content) or reject a region.

        Accepting turns the region into a recorded edit.  Rejecting hides
        the ref until the next revision.
        """
        if revision != self.revision:
            raise RevisionMismatch(self.revision, revision)
        region = self._resolve_region(ref)
        if action == "reject":
            self._apply_reject(ref, revision)
            self._log({
                "v": SCHEMA_VERSION,
                "type": "feedback",
                "revision": revision,
                "ref": ref,
                "action": "reject",
            })
            return {"revision": self.revision, "ref": ref, "action": "reject"}
        if action not in ("accept", "accept_with_modification"):
            raise ValueError(f"unknown feedback action {action!r}")
        if content is None:
            raise ValueError("accept feedback requires content")
        self._log({
            "v": SCHEMA_VERSION,
            "type": "feedback",
            "revision": revision,
            "ref": ref,
            "action": action,
        })
        edit = self._edit_from_region(region, tuple(content))
        new_revision = self.record_edit(edit, revision)
        return {"revision": new_revision, "ref": ref, "action": action,
                "edit": edit.to_dict()}

    @staticmethod
    def _edit_from_region(region: HunkRegion,
                          content: tuple[str, ...]) -> Edit:
        if region.edit_type is EditType.INSERT:
            return Edit(
                file_path=region.file_path,
                anchor_line=region.start_line,
                edit_type=EditType.INSERT,
                before_code=(),
                after_code=content,
            )
        return Edit(
            file_path=region.file_path,
            anchor_line=region.start_line,
            edit_type=EditType.REPLACE,
            before_code=region.target_lines,
            after_code=content,
        )

    # ----- recommendations -----

    def recommend_locations(self) -> dict:
        """Report files likely to need follow-up edits, with line regions.

        The file of the most recent edit is always included; other files
        qualify by propagation score.  Lines the history already covers are
        never re-flagged, and refs rejected at this revision stay hidden.

        Raises:
            PreconditionFailed: no edits recorded yet.
        """
        if not self.history:
            raise PreconditionFailed("record at least one edit first")
        trigger = self.history[-1]
        scored = locate_files(trigger, self.snapshot, self.config.scoring,
                              self.backends, self._index)
        files = [(trigger.file_path, 1.0)]
        files.extend((path, score) for path, score in scored
                     if path != trigger.file_path)

        self._region_cache = {}
        self._region_cache_revision = self.revision
        report_files = []
        for path, score in files:
            regions = self._regions_for(path)
            report_files.append({
                "path": path,
                "score": round(score, 6),
                "regions": [region_to_dict(r) for r in regions],
            })
        report = {
            "v": SCHEMA_VERSION,
            "session_id": self.session_id,
            "revision": self.revision,
            "trigger": trigger.to_dict(),
            "files": report_files,
        }
        return report

    def _regions_for(self, path: str) -> list[HunkRegion]:
        lines = self.snapshot.lines(path) if path in self.snapshot else ()
        if not lines:
            return []
        target = TargetLocation(file_path=path, anchor_line=1,
                                lines=tuple(lines))
        ranked = rank_prior_edits_indexed(self.history, target,
                                          self.config.scoring,
                                          self.config.combiner, self.backends,
                                          self.prompt)
        priors = [edit for _, edit, _ in ranked]
        contexts = [self.history_contexts[idx] for idx, _, _ in ranked]
        predictions = label_file(path, lines, self.prompt, priors, contexts,
                                 self.config, self._line_backend())
        predictions = self._suppress_owned(path, predictions)
        regions = group_regions(predictions, path, lines,
                                self.config.context_lines)
        kept = []
        for region in regions:
            ref = region_ref(region)
            if self.ignored.get(ref) == self.revision:
                continue
            self._region_cache[ref] = region
            kept.append(region)
        return kept

    def _suppress_owned(self, path: str,
                        predictions: list[LinePrediction]
                        ) -> list[LinePrediction]:
        owned = self.owned.get(path)
        if not owned:
            return predictions
        out = []
        for pred in predictions:
            if pred.line in owned and pred.label is not EditType.KEEP:
                out.append(LinePrediction.from_probs(pred.line, (1.0, 0.0, 0.0)))
            else:
                out.append(pred)
        return out

    def _line_backend(self) -> LineLabeler | None:
        return self.backends.line_labeler

    def candidates_for(self, ref: str, k: int = 3) -> dict:
        """Ranked content candidates for a previously reported region.

        Raises:
            UnknownRegion: the ref matches no region at this revision.
            NoCandidate: no prior edit transfers to this region.
        """
        region = self._resolve_region(ref)
        target = TargetLocation(
            file_path=region.file_path,
            anchor_line=region.start_line,
            lines=region.target_lines or region.context_before,
        )
        ranked = rank_prior_edits_indexed(self.history, target,
                                          self.config.scoring,
                                          self.config.combiner, self.backends,
                                          self.prompt)
        kept = [(idx, edit, rel) for idx, edit, rel in ranked
                if rel > self.config.scoring.th_pri]
        if not kept and ranked:
            # Lexical scores are conservative for cross-file priors; rather
            # than starve the region, degrade to the single best prior.
            kept = ranked[:1]
        selected = [(edit, rel) for _, edit, rel in kept]
        contexts = [self.history_contexts[idx] for idx, _, _ in kept]
        inp = build_generator_input(region, self.prompt, selected, contexts,
                                    self.config.token_budget)
        candidates = generate_candidates(inp, self.backends.generator, k)
        return {
            "v": SCHEMA_VERSION,
            "session_id": self.session_id,
            "revision": self.revision,
            "ref": ref,
            "candidates": [
                {
                    "rank": c.rank,
                    "confidence": round(c.confidence, 6),
                    "content": list(c.content),
                }
                for c in candidates
            ],
        }

    def _resolve_region(self, ref: str) -> HunkRegion:
        if self._region_cache_revision != self.revision:
            if not self.history:
                raise UnknownRegion(ref)
            self.recommend_locations()
        region = self._region_cache.get(ref)
        if region is None:
            raise UnknownRegion(ref)
        return region

    # ----- bookkeeping -----

    def _log(self, event: dict):
        self.events.append(event)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    def state_digest(self) -> str:
        """Stable digest of the observable session state."""
        payload = {
            "revision": self.revision,
            "files": {p: list(self.snapshot.lines(p))
                      for p in self.snapshot.paths()},
            "history": [e.to_dict() for e in self.history],
            "owned": {p: sorted(v) for p, v in sorted(self.owned.items()) if v},
            "ignored": dict(sorted(self.ignored.items())),
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()
