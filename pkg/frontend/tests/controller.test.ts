import { describe, expect, it } from "vitest";

import { ApiClient, EditPayload } from "../src/api";
import { SessionController } from "../src/controller";
import { renderCandidates, renderHeader, renderTree } from "../src/render";
import type { ViewState } from "../src/state";
import { FetchCall, Route, recorded, scriptedFetch } from "./helpers";

const REF = recorded.candidates.ref;
const FILES = { "src/benchmark.go": ["package testing"] };

const TRIGGER_EDIT: EditPayload = {
  file_path: "src/benchmark.go",
  anchor_line: 11,
  edit_type: "<I>",
  before_code: [],
  after_code: ["\tmatch *matcher"],
};

interface Rig {
  controller: SessionController;
  calls: FetchCall[];
  states: ViewState[];
}

/** Controller wired to the recorded conversation; extraRoutes override or
 * extend the happy path. */
function makeRig(extraRoutes: Record<string, Route> = {}): Rig {
  let locationCalls = 0;
  const routes: Record<string, Route> = {
    "POST /sessions": () => ({ status: 201, body: recorded.create }),
    "POST /sessions/web1/events": () => ({ status: 200, body: recorded.record_edit }),
    "GET /sessions/web1/locations": () => {
      locationCalls += 1;
      return {
        status: 200,
        body: locationCalls === 1 ? recorded.locations : recorded.locations_after_accept,
      };
    },
    [`POST /sessions/web1/regions/${REF}/candidates`]: () => ({
      status: 200,
      body: recorded.candidates,
    }),
    [`POST /sessions/web1/regions/${REF}/feedback`]: () => ({
      status: 200,
      body: recorded.accept_with_modification,
    }),
    ...extraRoutes,
  };
  const { impl, calls } = scriptedFetch(routes);
  const states: ViewState[] = [];
  const controller = new SessionController(
    new ApiClient("", impl),
    (state) => states.push(state),
    "propagate the matcher field",
  );
  return { controller, calls, states };
}

async function openRecordedRegion(rig: Rig): Promise<void> {
  await rig.controller.createSession(FILES);
  await rig.controller.triggerRecommendation(TRIGGER_EDIT);
  await rig.controller.openRegion(REF);
}

function feedbackCalls(calls: FetchCall[]): FetchCall[] {
  return calls.filter((c) => c.url.includes("/feedback"));
}

describe("recommendation flow", () => {
  it("records the edit at the confirmed revision and shows the new tree", async () => {
    const rig = makeRig();
    await rig.controller.createSession(FILES);

    const createBody = rig.calls[0]?.body as Record<string, unknown>;
    expect(createBody).toEqual({
      session_id: null,
      files: FILES,
      prompt: "propagate the matcher field",
    });

    await rig.controller.triggerRecommendation(TRIGGER_EDIT);

    const eventCall = rig.calls.find((c) => c.url.endsWith("/events"));
    expect(eventCall?.body).toEqual({ revision: 0, edit: TRIGGER_EDIT });

    const view = rig.controller.view;
    expect(view.revision).toBe(recorded.locations.revision);
    expect(view.tree.map((f) => f.path)).toEqual(["src/benchmark.go", "src/testing.go"]);
    expect(view.busy).toBe(false);
    expect(renderHeader(view)).toContain("rev 1");
    expect(renderTree(view)).toContain(`data-ref="${REF}"`);
  });

  it("loads candidates for the chosen region with the requested k", async () => {
    const rig = makeRig();
    await rig.controller.createSession(FILES);
    await rig.controller.triggerRecommendation(TRIGGER_EDIT);
    await rig.controller.openRegion(REF, 5);

    const candidateCall = rig.calls.find((c) => c.url.includes("/candidates"));
    expect(candidateCall?.url).toContain("?k=5");
    expect(rig.controller.view.activeRef).toBe(REF);
    expect(rig.controller.view.candidates).toEqual(recorded.candidates.candidates);
  });
});

describe("accept", () => {
  it("posts the user's edited content verbatim as a modification", async () => {
    const rig = makeRig();
    await openRecordedRegion(rig);
    rig.controller.editDraft("\tmatch *matcher // tracks the active filter");
    await rig.controller.accept();

    const [call] = feedbackCalls(rig.calls);
    expect(call?.body).toEqual({
      revision: 1,
      action: "accept_with_modification",
      content: ["\tmatch *matcher // tracks the active filter"],
    });

    const view = rig.controller.view;
    expect(view.revision).toBe(recorded.locations_after_accept.revision);
    expect(view.activeRef).toBeNull();
    expect(view.draft).toBeNull();
  });

  it("splits a multi-line draft into lines without rewriting them", async () => {
    const rig = makeRig();
    await openRecordedRegion(rig);
    rig.controller.editDraft("\tmatch *matcher\n\tcount int");
    await rig.controller.accept();

    const [call] = feedbackCalls(rig.calls);
    expect((call?.body as { content: string[] }).content).toEqual([
      "\tmatch *matcher",
      "\tcount int",
    ]);
  });

  it("posts the candidate content as-is when nothing was edited", async () => {
    const rig = makeRig();
    await openRecordedRegion(rig);
    await rig.controller.accept();

    const [call] = feedbackCalls(rig.calls);
    expect(call?.body).toEqual({
      revision: 1,
      action: "accept",
      content: ["\tmatch *matcher"],
    });
  });
});

describe("stale revision recovery", () => {
  it("disables actions, refetches, and surfaces a toast", async () => {
    const rig = makeRig({
      [`POST /sessions/web1/regions/${REF}/feedback`]: () =>
        recorded.stale_feedback_error,
    });
    await openRecordedRegion(rig);
    await rig.controller.accept();

    const staleState = rig.states.find((s) => s.staleActions);
    expect(staleState).toBeDefined();
    expect(renderTree(staleState as ViewState)).toContain("disabled");
    expect(renderCandidates(staleState as ViewState)).toContain(
      `<button class="accept" disabled>`,
    );

    const view = rig.controller.view;
    expect(view.staleActions).toBe(false);
    expect(view.busy).toBe(false);
    expect(view.revision).toBe(recorded.locations_after_accept.revision);
    expect(view.toast).toBe("Recommendations were stale; refreshed.");
  });
});

describe("ignore", () => {
  it("hides the region only after the server acknowledged the reject", async () => {
    const rig = makeRig({
      [`POST /sessions/web1/regions/${REF}/feedback`]: () => ({
        status: 200,
        body: recorded.reject,
      }),
    });
    await openRecordedRegion(rig);
    await rig.controller.ignore();

    const [call] = feedbackCalls(rig.calls);
    expect(call?.body).toEqual({ revision: 1, action: "reject", content: null });

    const view = rig.controller.view;
    expect(view.revision).toBe(1);
    expect(view.tree.flatMap((f) => f.lines)).toEqual([]);
    const locationReads = rig.calls.filter((c) => c.url.endsWith("/locations"));
    expect(locationReads).toHaveLength(1);
  });
});

describe("concurrency rules", () => {
  it("refuses a second mutation while one is in flight", async () => {
    const rig = makeRig({
      [`POST /sessions/web1/regions/${REF}/feedback`]: () =>
        new Promise(() => undefined),
    });
    await openRecordedRegion(rig);

    const hanging = rig.controller.accept();
    await expect(rig.controller.ignore()).rejects.toThrow(
      "another change is still in flight",
    );
    expect(feedbackCalls(rig.calls)).toHaveLength(1);
    void hanging;
  });

  it("lets a newer read cancel and replace an older one", async () => {
    const resolvers: Array<(value: { status: number; body: unknown }) => void> = [];
    const rig = makeRig({
      [`POST /sessions/web1/regions/${REF}/candidates`]: () =>
        new Promise((resolve) => resolvers.push(resolve)),
    });
    await rig.controller.createSession(FILES);
    await rig.controller.triggerRecommendation(TRIGGER_EDIT);

    const first = rig.controller.openRegion(REF);
    const second = rig.controller.openRegion(REF, 5);
    for (const resolve of resolvers) {
      resolve({ status: 200, body: recorded.candidates });
    }
    await Promise.all([first, second]);

    const reads = rig.calls.filter((c) => c.url.includes("/candidates"));
    expect(reads).toHaveLength(2);
    expect(reads[0]?.signal?.aborted).toBe(true);
    expect(reads[1]?.signal?.aborted).toBe(false);
    expect(rig.controller.view.candidates).toEqual(recorded.candidates.candidates);
  });
});

describe("connectivity", () => {
  it("reports offline when the service is unreachable", async () => {
    const failing = (async () => {
      throw new TypeError("fetch failed");
    }) as unknown as typeof fetch;
    const controller = new SessionController(new ApiClient("", failing));
    await controller.checkHealth();

    expect(controller.view.connection).toBe("offline");
  });

  it("flips to offline when a refresh fails mid-session", async () => {
    let healthy = true;
    const rig = makeRig({
      "GET /sessions/web1/locations": () => {
        if (!healthy) {
          throw new TypeError("fetch failed");
        }
        return { status: 200, body: recorded.locations };
      },
    });
    await rig.controller.createSession(FILES);
    await rig.controller.triggerRecommendation(TRIGGER_EDIT);
    expect(rig.controller.view.connection).toBe("online");

    healthy = false;
    await rig.controller.refreshLocations();
    expect(rig.controller.view.connection).toBe("offline");
  });
});
