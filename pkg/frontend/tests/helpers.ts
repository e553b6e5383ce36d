/** Shared test plumbing: recorded service responses and a scriptable
 * fetch. The recordings were captured verbatim from the HTTP service
 * running on the two-file fixture project. */

import type {
  CandidateSet,
  FeedbackResult,
  HealthInfo,
  LocationReport,
  SessionInfo,
} from "../src/api";
import recordedJson from "./fixtures/recorded.json";

interface RecordedError {
  status: number;
  body: { error: { code: string; message: string; expected?: number; got?: number } };
}

export interface Recorded {
  health: HealthInfo;
  create: SessionInfo;
  record_edit: { session_id: string; revision: number };
  locations: LocationReport;
  candidates: CandidateSet;
  accept_with_modification: FeedbackResult;
  locations_after_accept: LocationReport;
  reject: FeedbackResult;
  locations_after_reject: LocationReport;
  stale_feedback_error: RecordedError;
  unknown_session_error: RecordedError;
}

export const recorded = recordedJson as unknown as Recorded;

export interface FetchCall {
  url: string;
  method: string;
  body: unknown;
  signal: AbortSignal | undefined;
}

export type Route = (
  call: FetchCall,
) => { status: number; body: unknown } | Promise<{ status: number; body: unknown }>;

/** fetch stand-in: routes by "METHOD pathname", records every call, and
 * honors abort signals the way real fetch does. */
export function scriptedFetch(routes: Record<string, Route>) {
  const calls: FetchCall[] = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const path = url.split("?")[0] ?? url;
    const call: FetchCall = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
      signal: init?.signal ?? undefined,
    };
    calls.push(call);
    const route = routes[`${call.method} ${path}`];
    if (!route) {
      throw new Error(`unrouted: ${call.method} ${url}`);
    }
    const result = await route(call);
    if (init?.signal?.aborted) {
      throw new DOMException("The operation was aborted.", "AbortError");
    }
    return new Response(JSON.stringify(result.body), {
      status: result.status,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return { impl, calls };
}

export function deepFreeze<T>(value: T): T {
  if (value !== null && typeof value === "object") {
    for (const key of Object.keys(value as object)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}
