import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { recorded, scriptedFetch } from "./helpers";

describe("ApiClient request shapes", () => {
  it("creates a session with files and prompt", async () => {
    const { impl, calls } = scriptedFetch({
      "POST /sessions": () => ({ status: 201, body: recorded.create }),
    });
    const client = new ApiClient("", impl);
    const files = { "src/benchmark.go": ["package testing"] };
    const info = await client.createSession(files, "propagate the matcher field", "web1");

    expect(info).toEqual(recorded.create);
    expect(calls).toHaveLength(1);
    expect(calls[0]?.body).toEqual({
      session_id: "web1",
      files,
      prompt: "propagate the matcher field",
    });
  });

  it("records an edit against an explicit revision", async () => {
    const { impl, calls } = scriptedFetch({
      "POST /sessions/web1/events": () => ({ status: 200, body: recorded.record_edit }),
    });
    const client = new ApiClient("", impl);
    const edit = {
      file_path: "src/benchmark.go",
      anchor_line: 11,
      edit_type: "<I>",
      before_code: [],
      after_code: ["\tmatch *matcher"],
    };
    const out = await client.recordEdit("web1", 0, edit);

    expect(out).toEqual(recorded.record_edit);
    expect(calls[0]?.body).toEqual({ revision: 0, edit });
  });

  it("fetches locations with GET", async () => {
    const { impl, calls } = scriptedFetch({
      "GET /sessions/web1/locations": () => ({ status: 200, body: recorded.locations }),
    });
    const client = new ApiClient("", impl);
    const report = await client.locations("web1");

    expect(report).toEqual(recorded.locations);
    expect(calls[0]?.method).toBe("GET");
    expect(calls[0]?.body).toBeUndefined();
  });

  it("passes k as a query parameter when asking for candidates", async () => {
    const ref = recorded.candidates.ref;
    const { impl, calls } = scriptedFetch({
      [`POST /sessions/web1/regions/${ref}/candidates`]: () => ({
        status: 200,
        body: recorded.candidates,
      }),
    });
    const client = new ApiClient("", impl);
    const got = await client.candidates("web1", ref, 5);

    expect(got).toEqual(recorded.candidates);
    expect(calls[0]?.url).toContain(`/regions/${ref}/candidates?k=5`);
  });

  it("posts feedback with action and optional content", async () => {
    const ref = recorded.candidates.ref;
    const { impl, calls } = scriptedFetch({
      [`POST /sessions/web1/regions/${ref}/feedback`]: () => ({
        status: 200,
        body: recorded.accept_with_modification,
      }),
    });
    const client = new ApiClient("", impl);
    await client.feedback("web1", ref, 1, "accept_with_modification", ["x"]);
    await client.feedback("web1", ref, 1, "reject");

    expect(calls[0]?.body).toEqual({
      revision: 1,
      action: "accept_with_modification",
      content: ["x"],
    });
    expect(calls[1]?.body).toEqual({ revision: 1, action: "reject", content: null });
  });
});

describe("ApiClient error handling", () => {
  it("turns a recorded stale-revision response into a typed error", async () => {
    const ref = recorded.candidates.ref;
    const { impl } = scriptedFetch({
      [`POST /sessions/web1/regions/${ref}/feedback`]: () => recorded.stale_feedback_error,
    });
    const client = new ApiClient("", impl);

    const err = await client
      .feedback("web1", ref, 0, "accept")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(409);
    expect(apiErr.code).toBe("revision_mismatch");
    expect(apiErr.expected).toBe(2);
    expect(apiErr.got).toBe(0);
    expect(apiErr.isRevisionMismatch).toBe(true);
  });

  it("turns a recorded unknown-session response into a 404 error", async () => {
    const { impl } = scriptedFetch({
      "GET /sessions/nope/locations": () => recorded.unknown_session_error,
    });
    const client = new ApiClient("", impl);

    const err = await client
      .locations("nope")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.code).toBe("unknown_session");
    expect(apiErr.isRevisionMismatch).toBe(false);
  });

  it("propagates network failures unchanged", async () => {
    const impl = (async () => {
      throw new TypeError("fetch failed");
    }) as unknown as typeof fetch;
    const client = new ApiClient("", impl);

    await expect(client.health()).rejects.toThrow(TypeError);
  });
});
