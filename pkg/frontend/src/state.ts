/** View state and its pure transitions.
 *
 * Every function returns a fresh state; nothing here touches the network
 * or the DOM. The displayed revision always comes from the last report
 * the server confirmed, never from a local guess. */

import type { Candidate, FileEntry, LocationReport, Region } from "./api.js";

export type ConnectionStatus = "connecting" | "online" | "offline";

export interface TreeLine {
  ref: string;
  editType: string;
  startLine: number;
  endLine: number;
  targetLines: string[];
  confidence: number;
}

export interface TreeFile {
  path: string;
  score: number;
  lines: TreeLine[];
}

export interface ViewState {
  sessionId: string | null;
  revision: number | null;
  prompt: string;
  tree: TreeFile[];
  activeRef: string | null;
  candidates: Candidate[];
  candidateIndex: number;
  draft: string | null;
  connection: ConnectionStatus;
  staleActions: boolean;
  busy: boolean;
  toast: string | null;
}

export function initialState(prompt = ""): ViewState {
  return {
    sessionId: null,
    revision: null,
    prompt,
    tree: [],
    activeRef: null,
    candidates: [],
    candidateIndex: 0,
    draft: null,
    connection: "connecting",
    staleActions: false,
    busy: false,
    toast: null,
  };
}

function toTreeLine(region: Region): TreeLine {
  return {
    ref: region.ref,
    editType: region.edit_type,
    startLine: region.start_line,
    endLine: region.end_line,
    targetLines: [...region.target_lines],
    confidence: region.confidence,
  };
}

function toTreeFile(entry: FileEntry): TreeFile {
  const lines = entry.regions.map(toTreeLine);
  lines.sort((a, b) => a.startLine - b.startLine || (a.ref < b.ref ? -1 : 1));
  return { path: entry.path, score: entry.score, lines };
}

/** Fold a confirmed location report in; this is the only place the
 * revision shown to the user can change. */
export function withReport(state: ViewState, report: LocationReport): ViewState {
  const tree = report.files.map(toTreeFile);
  const refs = new Set(tree.flatMap((f) => f.lines.map((l) => l.ref)));
  const activeRef =
    state.activeRef !== null && refs.has(state.activeRef)
      ? state.activeRef
      : null;
  return {
    ...state,
    sessionId: report.session_id,
    revision: report.revision,
    tree,
    activeRef,
    candidates: activeRef ? state.candidates : [],
    candidateIndex: activeRef ? state.candidateIndex : 0,
    draft: activeRef ? state.draft : null,
    staleActions: false,
  };
}

export function withCandidates(
  state: ViewState,
  ref: string,
  candidates: Candidate[],
): ViewState {
  return {
    ...state,
    activeRef: ref,
    candidates: candidates.map((c) => ({ ...c, content: [...c.content] })),
    candidateIndex: 0,
    draft: null,
  };
}

/** Cycle the candidate carousel; the draft belongs to one candidate and
 * does not follow the browse. */
export function cycleCandidate(state: ViewState, delta: number): ViewState {
  const n = state.candidates.length;
  if (n === 0) {
    return state;
  }
  const candidateIndex = ((state.candidateIndex + delta) % n + n) % n;
  return { ...state, candidateIndex, draft: null };
}

export function withDraft(state: ViewState, draft: string | null): ViewState {
  return { ...state, draft };
}

/** Drop one region from the tree after the server confirmed the reject;
 * the revision is untouched. */
export function removeRegion(state: ViewState, ref: string): ViewState {
  const tree = state.tree.map((file) => ({
    ...file,
    lines: file.lines.filter((line) => line.ref !== ref),
  }));
  const active = state.activeRef === ref ? null : state.activeRef;
  return {
    ...state,
    tree,
    activeRef: active,
    candidates: active ? state.candidates : [],
    candidateIndex: active ? state.candidateIndex : 0,
    draft: active ? state.draft : null,
  };
}

/** A revision conflict disables mutating actions until the next report. */
export function markStale(state: ViewState): ViewState {
  return { ...state, staleActions: true };
}

export function withBusy(state: ViewState, busy: boolean): ViewState {
  return { ...state, busy };
}

export function withConnection(
  state: ViewState,
  connection: ConnectionStatus,
): ViewState {
  return { ...state, connection };
}

export function withToast(state: ViewState, toast: string | null): ViewState {
  return { ...state, toast };
}

export function activeFile(state: ViewState): TreeFile | null {
  if (state.activeRef === null) {
    return null;
  }
  return (
    state.tree.find((f) => f.lines.some((l) => l.ref === state.activeRef)) ??
    null
  );
}

export function activeLine(state: ViewState): TreeLine | null {
  const file = activeFile(state);
  return file?.lines.find((l) => l.ref === state.activeRef) ?? null;
}

export function currentCandidate(state: ViewState): Candidate | null {
  return state.candidates[state.candidateIndex] ?? null;
}

/** Content an accept would post: the user's draft verbatim when present,
 * otherwise the candidate as recommended. */
export function contentToPost(state: ViewState): string[] | null {
  if (state.draft !== null) {
    return state.draft.split("\n");
  }
  const candidate = currentCandidate(state);
  return candidate ? [...candidate.content] : null;
}
