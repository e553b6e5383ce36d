/** Session controller: the only layer that talks to the service.
 *
 * State changes only after a confirmed server response. At most one
 * mutation is in flight at a time; reads cancel and replace each other. */

import { ApiClient, ApiError, EditPayload } from "./api.js";
import {
  ViewState,
  contentToPost,
  cycleCandidate,
  initialState,
  markStale,
  removeRegion,
  withBusy,
  withCandidates,
  withConnection,
  withDraft,
  withReport,
  withToast,
} from "./state.js";

export type Listener = (state: ViewState) => void;

export class SessionController {
  private state: ViewState;
  private readController: AbortController | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly listener: Listener = () => undefined,
    prompt = "",
  ) {
    this.state = initialState(prompt);
  }

  get view(): ViewState {
    return this.state;
  }

  private commit(state: ViewState): void {
    this.state = state;
    this.listener(state);
  }

  private nextReadSignal(): AbortSignal {
    this.readController?.abort();
    this.readController = new AbortController();
    return this.readController.signal;
  }

  async checkHealth(): Promise<void> {
    try {
      await this.client.health();
      this.commit(withConnection(this.state, "online"));
    } catch {
      this.commit(withConnection(this.state, "offline"));
    }
  }

  async createSession(
    files: Record<string, string | string[]>,
    sessionId?: string,
  ): Promise<void> {
    await this.mutate(async () => {
      const info = await this.client.createSession(
        files,
        this.state.prompt,
        sessionId,
      );
      this.commit({
        ...this.state,
        sessionId: info.session_id,
        revision: info.revision,
        connection: "online",
      });
    });
  }

  setPrompt(prompt: string): void {
    this.commit({ ...this.state, prompt });
  }

  /** Refresh the location tree; a newer read supersedes an older one. */
  async refreshLocations(): Promise<void> {
    const sessionId = this.requireSession();
    const signal = this.nextReadSignal();
    try {
      const report = await this.client.locations(sessionId, signal);
      this.commit(withConnection(withReport(this.state, report), "online"));
    } catch (error) {
      if (signal.aborted) {
        return;
      }
      this.handleNetwork(error);
    }
  }

  /** Record the developer's edit and render the refreshed tree. */
  async triggerRecommendation(edit: EditPayload): Promise<void> {
    await this.mutate(async () => {
      const sessionId = this.requireSession();
      await this.client.recordEdit(
        sessionId,
        this.requireRevision(),
        edit,
      );
      const report = await this.client.locations(sessionId);
      this.commit(withConnection(withReport(this.state, report), "online"));
    });
  }

  /** Load candidates for a region into the carousel. */
  async openRegion(ref: string, k = 3): Promise<void> {
    const sessionId = this.requireSession();
    const signal = this.nextReadSignal();
    try {
      const set = await this.client.candidates(sessionId, ref, k, signal);
      this.commit(withCandidates(this.state, ref, set.candidates));
    } catch (error) {
      if (signal.aborted) {
        return;
      }
      this.handleNetwork(error);
    }
  }

  browse(delta: number): void {
    this.commit(cycleCandidate(this.state, delta));
  }

  editDraft(draft: string | null): void {
    this.commit(withDraft(this.state, draft));
  }

  /** Accept the active candidate; an edited draft posts verbatim as a
   * modification. The refreshed report carries the new revision. */
  async accept(): Promise<void> {
    await this.mutate(async () => {
      const sessionId = this.requireSession();
      const ref = this.requireActiveRef();
      const content = contentToPost(this.state);
      if (content === null) {
        throw new Error("no candidate to accept");
      }
      const action =
        this.state.draft !== null ? "accept_with_modification" : "accept";
      await this.recoverOnMismatch(async () => {
        await this.client.feedback(
          sessionId,
          ref,
          this.requireRevision(),
          action,
          content,
        );
        const report = await this.client.locations(sessionId);
        this.commit(withReport(this.state, report));
      });
    });
  }

  /** Hide the active region; the server log keeps the rejection. */
  async ignore(): Promise<void> {
    await this.mutate(async () => {
      const sessionId = this.requireSession();
      const ref = this.requireActiveRef();
      await this.recoverOnMismatch(async () => {
        await this.client.feedback(
          sessionId,
          ref,
          this.requireRevision(),
          "reject",
        );
        this.commit(removeRegion(this.state, ref));
      });
    });
  }

  /** A revision conflict means the tree on screen is stale: disable
   * actions, pull the current report, and tell the user. */
  private async recoverOnMismatch(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (error) {
      if (error instanceof ApiError && error.isRevisionMismatch) {
        this.commit(markStale(this.state));
        const report = await this.client.locations(this.requireSession());
        this.commit(
          withToast(
            withReport(this.state, report),
            "Recommendations were stale; refreshed.",
          ),
        );
        return;
      }
      throw error;
    }
  }

  dismissToast(): void {
    this.commit(withToast(this.state, null));
  }

  /** Serialize mutations: a second mutation while one is in flight is
   * refused rather than queued, matching the one-writer session model. */
  private async mutate(run: () => Promise<void>): Promise<void> {
    if (this.state.busy) {
      throw new Error("another change is still in flight");
    }
    this.commit(withBusy(this.state, true));
    try {
      await run();
    } catch (error) {
      this.handleNetwork(error);
      throw error;
    } finally {
      this.commit(withBusy(this.state, false));
    }
  }

  private handleNetwork(error: unknown): void {
    if (error instanceof ApiError) {
      this.commit(withToast(this.state, error.message));
      return;
    }
    // fetch rejects with TypeError when the service is unreachable.
    this.commit(withConnection(this.state, "offline"));
  }

  private requireSession(): string {
    if (this.state.sessionId === null) {
      throw new Error("no session");
    }
    return this.state.sessionId;
  }

  private requireRevision(): number {
    if (this.state.revision === null) {
      throw new Error("no confirmed revision");
    }
    return this.state.revision;
  }

  private requireActiveRef(): string {
    if (this.state.activeRef === null) {
      throw new Error("no active region");
    }
    return this.state.activeRef;
  }
}
