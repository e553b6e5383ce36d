/** Typed client for the session service. All calls go through fetch and
 * either resolve with the parsed payload or throw ApiError. */

export interface HealthInfo {
  status: string;
  sessions: number;
}

export interface SessionInfo {
  session_id: string;
  revision: number;
  config_hash: string;
}

export interface EditPayload {
  file_path: string;
  anchor_line: number;
  edit_type: string;
  before_code: string[];
  after_code: string[];
}

export interface Region {
  ref: string;
  file_path: string;
  edit_type: string;
  start_line: number;
  end_line: number;
  target_lines: string[];
  confidence: number;
}

export interface FileEntry {
  path: string;
  score: number;
  regions: Region[];
}

export interface LocationReport {
  v: number;
  session_id: string;
  revision: number;
  trigger: EditPayload;
  files: FileEntry[];
}

export interface Candidate {
  rank: number;
  confidence: number;
  content: string[];
}

export interface CandidateSet {
  v: number;
  session_id: string;
  revision: number;
  ref: string;
  candidates: Candidate[];
}

export type FeedbackAction = "accept" | "accept_with_modification" | "reject";

export interface FeedbackResult {
  session_id: string;
  revision: number;
  ref: string;
  action: FeedbackAction;
  edit?: EditPayload;
}

/** Error envelope from the service, keyed by a stable snake_case code.
 * Revision conflicts carry the expected and observed revision. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly expected?: number,
    readonly got?: number,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isRevisionMismatch(): boolean {
    return this.code === "revision_mismatch";
  }
}

async function throwApiError(response: Response): Promise<never> {
  let code = "unknown_error";
  let message = `HTTP ${response.status}`;
  let expected: number | undefined;
  let got: number | undefined;
  try {
    const body = (await response.json()) as {
      error?: { code?: string; message?: string; expected?: number; got?: number };
    };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      expected = body.error.expected;
      got = body.error.got;
    }
  } catch {
    // Non-JSON error bodies keep the HTTP status as the message.
  }
  throw new ApiError(response.status, code, message, expected, got);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(
    path: string,
    init: RequestInit = {},
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      await throwApiError(response);
    }
    return (await response.json()) as T;
  }

  health(signal?: AbortSignal): Promise<HealthInfo> {
    return this.request("/healthz", { signal });
  }

  createSession(
    files: Record<string, string | string[]>,
    prompt: string,
    sessionId?: string,
  ): Promise<SessionInfo> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ session_id: sessionId ?? null, files, prompt }),
    });
  }

  recordEdit(
    sessionId: string,
    revision: number,
    edit: EditPayload,
  ): Promise<{ session_id: string; revision: number }> {
    return this.request(`/sessions/${sessionId}/events`, {
      method: "POST",
      body: JSON.stringify({ revision, edit }),
    });
  }

  locations(sessionId: string, signal?: AbortSignal): Promise<LocationReport> {
    return this.request(`/sessions/${sessionId}/locations`, { signal });
  }

  candidates(
    sessionId: string,
    ref: string,
    k = 3,
    signal?: AbortSignal,
  ): Promise<CandidateSet> {
    return this.request(
      `/sessions/${sessionId}/regions/${ref}/candidates?k=${k}`,
      { method: "POST", signal },
    );
  }

  feedback(
    sessionId: string,
    ref: string,
    revision: number,
    action: FeedbackAction,
    content?: string[],
  ): Promise<FeedbackResult> {
    return this.request(`/sessions/${sessionId}/regions/${ref}/feedback`, {
      method: "POST",
      body: JSON.stringify({ revision, action, content: content ?? null }),
    });
  }
}
