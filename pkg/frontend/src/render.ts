/** Pure HTML renderers: string in, string out, so every view is a plain
 * function of ViewState and snapshot-testable without a DOM. */

import { tokenDiff } from "./diff.js";
import {
  TreeLine,
  ViewState,
  activeLine,
  currentCandidate,
} from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const BADGE_LABELS: Record<string, string> = {
  "<I>": "insert",
  "<R>": "replace",
  "<K>": "keep",
};

/** Insert renders green, replace renders red; the class carries the
 * color through styles.css. */
export function renderBadge(editType: string): string {
  const label = BADGE_LABELS[editType] ?? "edit";
  return `<span class="badge ${label}">${label}</span>`;
}

export function renderHealth(state: ViewState): string {
  return (
    `<span class="health ${state.connection}">` +
    `${state.connection}</span>`
  );
}

export function renderHeader(state: ViewState): string {
  const session = state.sessionId === null
    ? "no session"
    : `session ${escapeHtml(state.sessionId)}`;
  const revision = state.revision === null
    ? ""
    : ` <span class="revision">rev ${state.revision}</span>`;
  return (
    `<header>${renderHealth(state)} <span class="session">${session}` +
    `</span>${revision}</header>`
  );
}

function lineItem(state: ViewState, lineRef: string, html: string): string {
  const classes = ["region"];
  if (state.activeRef === lineRef) {
    classes.push("active");
  }
  if (state.staleActions || state.busy) {
    classes.push("disabled");
  }
  return (
    `<li class="${classes.join(" ")}" data-ref="${escapeHtml(lineRef)}">` +
    `${html}</li>`
  );
}

/** The location tree: files as parents ordered as reported (best score
 * first), lines as children ascending. */
export function renderTree(state: ViewState): string {
  if (state.tree.length === 0) {
    return `<p class="empty">No recommendations yet.</p>`;
  }
  const files = state.tree.map((file) => {
    const lines = file.lines.map((line) =>
      lineItem(
        state,
        line.ref,
        `${renderBadge(line.editType)} <span class="line-no">` +
          `${line.startLine}</span> <code>` +
          `${escapeHtml(line.targetLines[0] ?? "")}</code>`,
      ),
    );
    return (
      `<li class="file"><span class="path">${escapeHtml(file.path)}</span>` +
      ` <span class="score">${file.score.toFixed(3)}</span>` +
      `<ul class="lines">${lines.join("")}</ul></li>`
    );
  });
  return `<ul class="loc-tree">${files.join("")}</ul>`;
}

/** Token highlights between the panes: removed tokens in del, added in
 * ins. An insert region's target line is anchor context, not replaced
 * text, so the whole candidate reads as an addition. */
export function renderInlineDiff(line: TreeLine, after: string): string {
  const before = line.editType === "<R>" ? line.targetLines.join("\n") : "";
  const parts = tokenDiff(before, after).map((op) => {
    const text = escapeHtml(op.text);
    if (op.kind === "add") {
      return `<ins>${text}</ins>`;
    }
    if (op.kind === "del") {
      return `<del>${text}</del>`;
    }
    return text;
  });
  return `<div class="inline-diff">${parts.join("")}</div>`;
}

/** Before/after panes for the active region plus the carousel controls.
 * The after pane holds the draft when the user is editing. */
export function renderCandidates(state: ViewState): string {
  const line = activeLine(state);
  if (line === null) {
    return `<p class="empty">Select a region to see candidates.</p>`;
  }
  const candidate = currentCandidate(state);
  if (candidate === null) {
    return `<p class="empty">No candidates for this region.</p>`;
  }
  const before = line.targetLines.map(escapeHtml).join("\n");
  const after = state.draft ?? candidate.content.join("\n");
  const position = `${state.candidateIndex + 1} of ${state.candidates.length}`;
  const disabled = state.staleActions || state.busy ? " disabled" : "";
  return (
    `<div class="candidates" data-ref="${escapeHtml(line.ref)}">` +
    `<div class="carousel"><button class="prev"${disabled}>&lt;</button>` +
    `<span class="position">${position}</span>` +
    `<span class="confidence">${candidate.confidence.toFixed(3)}</span>` +
    `<button class="next"${disabled}>&gt;</button></div>` +
    `<div class="diff"><pre class="pane before">${before}</pre>` +
    `<textarea class="pane after">${escapeHtml(after)}</textarea></div>` +
    renderInlineDiff(line, after) +
    `<div class="actions"><button class="accept"${disabled}>Accept</button>` +
    `<button class="ignore"${disabled}>Ignore</button></div></div>`
  );
}

export function renderToast(state: ViewState): string {
  if (state.toast === null) {
    return "";
  }
  return `<div class="toast">${escapeHtml(state.toast)}</div>`;
}

export function renderPrompt(state: ViewState): string {
  return (
    `<input class="prompt" type="text" placeholder="Describe the change ` +
    `(optional)" value="${escapeHtml(state.prompt)}">`
  );
}

export function renderApp(state: ViewState): string {
  return (
    `<div class="app">${renderHeader(state)}` +
    `<section class="query">${renderPrompt(state)}</section>` +
    `<main><section class="locations">${renderTree(state)}</section>` +
    `<section class="detail">${renderCandidates(state)}</section></main>` +
    `${renderToast(state)}</div>`
  );
}
